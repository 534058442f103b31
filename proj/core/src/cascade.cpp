#include "cpsrisk/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/rng.hpp"

namespace cpsrisk {

namespace {

double capacity_bound_physical(const PhysicalNode& node, double rho_p) {
    return (1.0 + rho_p) * std::sqrt(node.initial_load * node.capacity_param);
}

double capacity_bound_cyber(const CyberNode& node, double rho_c) {
    return (1.0 + rho_c) * node.initial_load;
}

double sum_alive(const std::vector<std::uint8_t>& alive, const std::vector<double>& load) {
    double s = 0.0;
    for (std::size_t i = 0; i < alive.size(); ++i)
        if (alive[i]) s += load[i];
    return s;
}

}  // namespace

CascadeEngine::CascadeEngine(const CoupledNetwork& net, CascadeConfig config)
    : net_(&net), config_(std::move(config)) {
    const int nc = net.cyber_count();
    backed_up_.assign(nc, 0);
    if (!config_.backed_up_cyber.empty()) {
        for (int j : config_.backed_up_cyber) {
            if (j < 0 || j >= nc) throw ConfigError("backup index out of range");
            backed_up_[j] = 1;
        }
    } else if (config_.backup_fraction > 0.0) {
        if (config_.backup_fraction > 1.0) throw ConfigError("backup fraction above 1");
        std::vector<int> order(nc);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const int da = net.cyber.degree(a), db = net.cyber.degree(b);
            if (da != db) return da > db;
            return a < b;
        });
        const int count = static_cast<int>(std::ceil(config_.backup_fraction * nc));
        for (int k = 0; k < count && k < nc; ++k) backed_up_[order[k]] = 1;
    }
}

int CascadeEngine::max_steps() const {
    if (config_.max_steps > 0) return config_.max_steps;
    return 10 * (net_->cyber_count() + net_->physical_count());
}

SystemState CascadeEngine::initial_state(const std::vector<NodeId>& faults,
                                         StepLedger* ledger) const {
    if (faults.empty()) throw ConfigError("initial fault set must be non-empty");
    const int np = net_->physical_count();
    const int nc = net_->cyber_count();

    SystemState s;
    s.physical_alive.assign(np, 1);
    s.cyber_alive.assign(nc, 1);
    s.physical_load.resize(np);
    s.cyber_load.resize(nc);
    s.physical_capacity.resize(np);
    s.cyber_capacity.resize(nc);
    s.physical_uncontrolled.assign(np, 0);
    for (int h = 0; h < np; ++h) {
        s.physical_load[h] = net_->physical_nodes[h].initial_load;
        s.physical_capacity[h] = capacity_bound_physical(net_->physical_nodes[h], net_->params.rho_p);
    }
    for (int j = 0; j < nc; ++j) {
        s.cyber_load[j] = net_->cyber_nodes[j].initial_load;
        s.cyber_capacity[j] = capacity_bound_cyber(net_->cyber_nodes[j], net_->params.rho_c);
    }

    StepLedger led;
    led.before_total = sum_alive(s.physical_alive, s.physical_load) +
                       sum_alive(s.cyber_alive, s.cyber_load);

    // Exogenous faults kill regardless of backups.
    std::vector<int> phys_kills, cyber_kills;
    for (const NodeId& id : faults) {
        if (id.layer == Layer::Physical) {
            if (id.index < 0 || id.index >= np) throw ConfigError("fault index out of range");
            if (s.physical_alive[id.index]) phys_kills.push_back(id.index);
        } else {
            if (id.index < 0 || id.index >= nc) throw ConfigError("fault index out of range");
            if (s.cyber_alive[id.index]) cyber_kills.push_back(id.index);
        }
    }
    std::sort(phys_kills.begin(), phys_kills.end());
    std::sort(cyber_kills.begin(), cyber_kills.end());
    for (int h : phys_kills) s.physical_alive[h] = 0;
    for (int j : cyber_kills) s.cyber_alive[j] = 0;

    // Redistribute the fault loads: physical to alive neighbors weighted by
    // their structural load, cyber to alive neighbors weighted by alive
    // degree^theta. A node with no alive same-layer neighbor drops its load.
    for (int h : phys_kills) {
        double total = s.physical_load[h];
        s.physical_load[h] = 0.0;
        double wsum = 0.0;
        for (int u : net_->physical.neighbors(h))
            if (s.physical_alive[u]) wsum += net_->physical_nodes[u].initial_load;
        if (wsum > 0.0) {
            for (int u : net_->physical.neighbors(h))
                if (s.physical_alive[u])
                    s.physical_load[u] += total * net_->physical_nodes[u].initial_load / wsum;
        } else {
            int alive_neighbors = 0;
            for (int u : net_->physical.neighbors(h))
                if (s.physical_alive[u]) ++alive_neighbors;
            if (alive_neighbors > 0) {
                for (int u : net_->physical.neighbors(h))
                    if (s.physical_alive[u]) s.physical_load[u] += total / alive_neighbors;
            } else {
                led.lost += total;
            }
        }
    }
    for (int j : cyber_kills) {
        double total = s.cyber_load[j];
        s.cyber_load[j] = 0.0;
        double wsum = 0.0;
        for (int u : net_->cyber.neighbors(j))
            if (s.cyber_alive[u])
                wsum += std::pow(static_cast<double>(net_->cyber.degree_among(u, s.cyber_alive)),
                                 net_->params.theta);
        if (wsum > 0.0) {
            for (int u : net_->cyber.neighbors(j))
                if (s.cyber_alive[u])
                    s.cyber_load[u] +=
                        total *
                        std::pow(static_cast<double>(net_->cyber.degree_among(u, s.cyber_alive)),
                                 net_->params.theta) /
                        wsum;
        } else {
            int alive_neighbors = 0;
            for (int u : net_->cyber.neighbors(j))
                if (s.cyber_alive[u]) ++alive_neighbors;
            if (alive_neighbors > 0) {
                for (int u : net_->cyber.neighbors(j))
                    if (s.cyber_alive[u]) s.cyber_load[u] += total / alive_neighbors;
            } else {
                led.lost += total;
            }
        }
    }

    s.physical_failures = static_cast<int>(phys_kills.size());
    s.cyber_failures = static_cast<int>(cyber_kills.size());
    s.last_fault_layer = cyber_kills.empty() ? 0 : 1;
    s.step = 0;
    refresh_flags(s);

    led.after_total = sum_alive(s.physical_alive, s.physical_load) +
                      sum_alive(s.cyber_alive, s.cyber_load);
    if (ledger) *ledger = led;
    return s;
}

std::vector<Violator> CascadeEngine::violators(const SystemState& state) const {
    std::vector<Violator> out;
    const bool probabilistic = config_.failure_mode == FailureMode::Probabilistic;
    for (int h = 0; h < net_->physical_count(); ++h) {
        if (!state.physical_alive[h]) continue;
        const double cap = state.physical_capacity[h];
        if (state.physical_load[h] <= cap) continue;
        const double ratio = cap > 0.0 ? state.physical_load[h] / cap - 1.0
                                       : std::numeric_limits<double>::infinity();
        out.push_back({Layer::Physical, h, ratio,
                       probabilistic ? 1.0 - std::exp(-ratio) : 1.0});
    }
    for (int j = 0; j < net_->cyber_count(); ++j) {
        if (!state.cyber_alive[j] || backed_up_[j]) continue;
        const double cap = state.cyber_capacity[j];
        if (state.cyber_load[j] <= cap) continue;
        const double ratio = cap > 0.0 ? state.cyber_load[j] / cap - 1.0
                                       : std::numeric_limits<double>::infinity();
        out.push_back({Layer::Cyber, j, ratio,
                       probabilistic ? 1.0 - std::exp(-ratio) : 1.0});
    }
    return out;
}

std::vector<NodeId> CascadeEngine::pending_cross_layer(const SystemState& state) const {
    std::vector<NodeId> out;
    const auto& coupling = net_->coupling;
    if (config_.strict_control_coupling && !coupling.controller.empty()) {
        for (int h = 0; h < net_->physical_count(); ++h) {
            if (!state.physical_alive[h]) continue;
            const int c = coupling.controller[h];
            if (c >= 0 && !state.cyber_alive[c]) out.push_back({Layer::Physical, h});
        }
    }
    if (!coupling.supplier.empty()) {
        for (int j = 0; j < net_->cyber_count(); ++j) {
            if (!state.cyber_alive[j]) continue;
            const int p = coupling.supplier[j];
            if (p >= 0 && !state.physical_alive[p]) out.push_back({Layer::Cyber, j});
        }
    }
    return out;
}

void CascadeEngine::refresh_flags(SystemState& state) const {
    const bool pending = !violators(state).empty() || !pending_cross_layer(state).empty();
    state.transition = pending ? 1 : 0;
    state.stability = pending ? 0 : 1;
    // Controllability bookkeeping (informational in the lenient mode).
    if (!net_->coupling.controller.empty()) {
        for (int h = 0; h < net_->physical_count(); ++h) {
            const int c = net_->coupling.controller[h];
            state.physical_uncontrolled[h] = (c >= 0 && !state.cyber_alive[c]) ? 1 : 0;
        }
    }
}

StepLedger CascadeEngine::apply_step(SystemState& state, const std::vector<Violator>& violator_list,
                                     std::uint64_t fail_mask) const {
    StepLedger led;
    led.before_total = sum_alive(state.physical_alive, state.physical_load) +
                       sum_alive(state.cyber_alive, state.cyber_load);

    std::vector<int> phys_kills, cyber_kills;
    for (const NodeId& id : pending_cross_layer(state)) {
        if (id.layer == Layer::Physical)
            phys_kills.push_back(id.index);
        else
            cyber_kills.push_back(id.index);
    }
    for (std::size_t i = 0; i < violator_list.size(); ++i) {
        const Violator& v = violator_list[i];
        const bool fails = (fail_mask >> i) & 1ULL;
        if (fails) {
            if (v.layer == Layer::Physical)
                phys_kills.push_back(v.index);
            else
                cyber_kills.push_back(v.index);
        } else {
            // Ride-through: the node absorbs the overload it survived.
            if (v.layer == Layer::Physical)
                state.physical_capacity[v.index] =
                    std::max(state.physical_capacity[v.index], state.physical_load[v.index]);
            else
                state.cyber_capacity[v.index] =
                    std::max(state.cyber_capacity[v.index], state.cyber_load[v.index]);
        }
    }
    std::sort(phys_kills.begin(), phys_kills.end());
    phys_kills.erase(std::unique(phys_kills.begin(), phys_kills.end()), phys_kills.end());
    std::sort(cyber_kills.begin(), cyber_kills.end());
    cyber_kills.erase(std::unique(cyber_kills.begin(), cyber_kills.end()), cyber_kills.end());

    for (int h : phys_kills) state.physical_alive[h] = 0;
    for (int j : cyber_kills) state.cyber_alive[j] = 0;

    // Physical layer first, then cyber.
    for (int h : phys_kills) {
        double total = state.physical_load[h];
        state.physical_load[h] = 0.0;
        if (total == 0.0) continue;
        double wsum = 0.0;
        for (int u : net_->physical.neighbors(h))
            if (state.physical_alive[u]) wsum += net_->physical_nodes[u].initial_load;
        if (wsum > 0.0) {
            for (int u : net_->physical.neighbors(h))
                if (state.physical_alive[u])
                    state.physical_load[u] += total * net_->physical_nodes[u].initial_load / wsum;
        } else {
            int alive_neighbors = 0;
            for (int u : net_->physical.neighbors(h))
                if (state.physical_alive[u]) ++alive_neighbors;
            if (alive_neighbors > 0) {
                for (int u : net_->physical.neighbors(h))
                    if (state.physical_alive[u]) state.physical_load[u] += total / alive_neighbors;
            } else {
                led.lost += total;
            }
        }
    }
    for (int j : cyber_kills) {
        double total = state.cyber_load[j];
        state.cyber_load[j] = 0.0;
        if (total == 0.0) continue;
        double wsum = 0.0;
        for (int u : net_->cyber.neighbors(j))
            if (state.cyber_alive[u])
                wsum += std::pow(static_cast<double>(net_->cyber.degree_among(u, state.cyber_alive)),
                                 net_->params.theta);
        if (wsum > 0.0) {
            for (int u : net_->cyber.neighbors(j))
                if (state.cyber_alive[u])
                    state.cyber_load[u] +=
                        total *
                        std::pow(
                            static_cast<double>(net_->cyber.degree_among(u, state.cyber_alive)),
                            net_->params.theta) /
                        wsum;
        } else {
            int alive_neighbors = 0;
            for (int u : net_->cyber.neighbors(j))
                if (state.cyber_alive[u]) ++alive_neighbors;
            if (alive_neighbors > 0) {
                for (int u : net_->cyber.neighbors(j))
                    if (state.cyber_alive[u]) state.cyber_load[u] += total / alive_neighbors;
            } else {
                led.lost += total;
            }
        }
    }

    state.physical_failures += static_cast<int>(phys_kills.size());
    state.cyber_failures += static_cast<int>(cyber_kills.size());
    if (!cyber_kills.empty())
        state.last_fault_layer = 1;
    else if (!phys_kills.empty())
        state.last_fault_layer = 0;
    ++state.step;
    refresh_flags(state);

    led.after_total = sum_alive(state.physical_alive, state.physical_load) +
                      sum_alive(state.cyber_alive, state.cyber_load);
    return led;
}

CascadeTrace CascadeEngine::simulate(const std::vector<NodeId>& faults,
                                     std::uint64_t rng_seed) const {
    CascadeTrace trace;
    trace.initial_faults = faults;
    StepLedger led0;
    SystemState state = initial_state(faults, &led0);
    trace.ledgers.push_back(led0);
    trace.physical_failure_step.assign(net_->physical_count(), -1);
    trace.cyber_failure_step.assign(net_->cyber_count(), -1);
    for (int h = 0; h < net_->physical_count(); ++h)
        if (!state.physical_alive[h]) trace.physical_failure_step[h] = 0;
    for (int j = 0; j < net_->cyber_count(); ++j)
        if (!state.cyber_alive[j]) trace.cyber_failure_step[j] = 0;
    trace.states.push_back(state);

    Rng rng(rng_seed);
    const int limit = max_steps();
    int applied = 0;
    while (state.transition == 1 && applied < limit) {
        const auto vlist = violators(state);
        std::uint64_t mask = 0;
        if (config_.failure_mode == FailureMode::Deterministic) {
            mask = vlist.size() >= 64 ? ~std::uint64_t{0}
                                      : ((std::uint64_t{1} << vlist.size()) - 1);
        } else {
            for (std::size_t i = 0; i < vlist.size(); ++i)
                if (rng.next_double() < vlist[i].fail_probability) mask |= (std::uint64_t{1} << i);
        }
        trace.ledgers.push_back(apply_step(state, vlist, mask));
        ++applied;
        for (int h = 0; h < net_->physical_count(); ++h)
            if (!state.physical_alive[h] && trace.physical_failure_step[h] < 0)
                trace.physical_failure_step[h] = state.step;
        for (int j = 0; j < net_->cyber_count(); ++j)
            if (!state.cyber_alive[j] && trace.cyber_failure_step[j] < 0)
                trace.cyber_failure_step[j] = state.step;
        trace.states.push_back(state);
    }
    trace.truncated = state.transition == 1;
    return trace;
}

StateClass classify_state(const CoupledNetwork& net, const SystemState& state) {
    for (int h = 0; h < net.physical_count(); ++h)
        if (state.physical_alive[h] && state.physical_load[h] > state.physical_capacity[h])
            return StateClass::Transition;
    for (int j = 0; j < net.cyber_count(); ++j)
        if (state.cyber_alive[j] && state.cyber_load[j] > state.cyber_capacity[j])
            return StateClass::Transition;
    return StateClass::Absorption;
}

CascadeTrace simulate(const CoupledNetwork& net, const std::vector<NodeId>& faults,
                      std::uint64_t rng_seed, const CascadeConfig& config) {
    return CascadeEngine(net, config).simulate(faults, rng_seed);
}

std::string CascadeTrace::to_jsonl() const {
    std::ostringstream out;
    for (const SystemState& s : states) {
        out << "{\"n\":" << s.step << ",\"X\":" << s.physical_failures
            << ",\"Y\":" << s.cyber_failures << ",\"I\":" << s.stability
            << ",\"L\":" << s.last_fault_layer << ",\"K\":" << s.transition
            << ",\"failed_node_ids\":[";
        bool first = true;
        for (std::size_t h = 0; h < s.physical_alive.size(); ++h) {
            if (s.physical_alive[h]) continue;
            if (!first) out << ',';
            out << "\"p" << h << "\"";
            first = false;
        }
        for (std::size_t j = 0; j < s.cyber_alive.size(); ++j) {
            if (s.cyber_alive[j]) continue;
            if (!first) out << ',';
            out << "\"c" << j << "\"";
            first = false;
        }
        out << "]}\n";
    }
    return out.str();
}

bool TransitionEstimate::Key::operator<(const Key& o) const {
    return std::tie(x, y, i, l, k, physical_alive, cyber_alive) <
           std::tie(o.x, o.y, o.i, o.l, o.k, o.physical_alive, o.cyber_alive);
}

TransitionEstimate empirical_transition_probability(const SystemState& /*from*/,
                                                    const std::vector<SystemState>& successors) {
    if (successors.empty()) throw ConfigError("successor ensemble must be non-empty");
    TransitionEstimate est;
    std::map<TransitionEstimate::Key, long> counts;
    std::array<long, 2> layer_counts{0, 0};
    for (const SystemState& s : successors) {
        TransitionEstimate::Key key{s.physical_failures, s.cyber_failures, s.stability,
                                    s.last_fault_layer,  s.transition,     s.physical_alive,
                                    s.cyber_alive};
        ++counts[key];
        ++layer_counts[s.last_fault_layer];
    }
    const double n = static_cast<double>(successors.size());
    for (const auto& [key, count] : counts) {
        est.successor_probability[key] = count / n;
        est.conditional_within_layer[key] = count / static_cast<double>(layer_counts[key.l]);
    }
    est.layer_probability = {layer_counts[0] / n, layer_counts[1] / n};
    return est;
}

}  // namespace cpsrisk
