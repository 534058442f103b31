#include "cpsrisk/network_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/rng.hpp"

namespace cpsrisk {

Graph generate_ba_cyber(int n, int m0, int m, std::uint64_t rng_seed) {
    if (!(n > m0 && m0 >= m && m >= 1))
        throw ConfigError("scale-free generator requires n > m0 >= m >= 1");
    Graph g(n);
    // Seed clique.
    std::vector<int> urn;  // one entry per incident edge endpoint
    for (int a = 0; a < m0; ++a)
        for (int b = a + 1; b < m0; ++b) {
            g.add_edge(a, b);
            urn.push_back(a);
            urn.push_back(b);
        }
    Rng rng(rng_seed);
    for (int v = m0; v < n; ++v) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < m) {
            int candidate = urn[static_cast<std::size_t>(rng.next_below(urn.size()))];
            targets.insert(candidate);
        }
        for (int t : targets) {
            g.add_edge(v, t);
            urn.push_back(v);
            urn.push_back(t);
        }
    }
    return g;
}

Graph load_physical_topology(std::string_view source) {
    if (source == "ieee39") return ieee39_topology();
    return parse_edge_list(source);
}

double cyber_total_load(const CoupledNetwork& net) {
    const auto alive = net.physical_alive();
    double total = 0.0;
    for (int h = 0; h < net.physical_count(); ++h) {
        if (!net.physical_nodes[h].alive) continue;
        const int d = net.physical.degree_among(h, alive);
        total += net.params.alpha * std::pow(static_cast<double>(d), net.params.delta);
    }
    return total;
}

std::vector<double> distribute_cyber_load(const CoupledNetwork& net, double total) {
    const int n = net.cyber_count();
    std::vector<double> loads(n, 0.0);
    const auto alive = net.cyber_alive();
    double weight_sum = 0.0;
    std::vector<double> weights(n, 0.0);
    for (int j = 0; j < n; ++j) {
        if (!alive[j]) continue;
        const int d = net.cyber.degree_among(j, alive);
        weights[j] = std::pow(static_cast<double>(d), net.params.theta);
        weight_sum += weights[j];
    }
    if (total == 0.0) return loads;
    const bool any_alive = std::any_of(alive.begin(), alive.end(), [](auto a) { return a != 0; });
    if (!any_alive) throw TotalCollapseError("no alive cyber node can carry the monitoring load");
    if (weight_sum == 0.0) {
        // All alive nodes have degree 0 under theta > 0: split evenly.
        int alive_count = static_cast<int>(std::count(alive.begin(), alive.end(), 1));
        for (int j = 0; j < n; ++j)
            if (alive[j]) loads[j] = total / alive_count;
        return loads;
    }
    for (int j = 0; j < n; ++j)
        if (alive[j]) loads[j] = total * weights[j] / weight_sum;
    return loads;
}

double physical_node_load(int initial_degree, double beta, double mu) {
    return beta * std::pow(static_cast<double>(initial_degree), mu);
}

bool check_cyber_constraint(const CyberNode& node, double rho_c) {
    return node.current_load <= (1.0 + rho_c) * node.initial_load;
}

bool check_physical_constraint(const PhysicalNode& node, double rho_p) {
    return node.current_load <=
           (1.0 + rho_p) * std::sqrt(node.initial_load * node.capacity_param);
}

std::vector<std::uint8_t> CoupledNetwork::physical_alive() const {
    std::vector<std::uint8_t> alive(physical_nodes.size());
    for (std::size_t i = 0; i < physical_nodes.size(); ++i) alive[i] = physical_nodes[i].alive;
    return alive;
}

std::vector<std::uint8_t> CoupledNetwork::cyber_alive() const {
    std::vector<std::uint8_t> alive(cyber_nodes.size());
    for (std::size_t i = 0; i < cyber_nodes.size(); ++i) alive[i] = cyber_nodes[i].alive;
    return alive;
}

CoupledNetwork make_network(Graph physical, Graph cyber, LayerParams params,
                            std::vector<PhysicalRole> physical_roles) {
    CoupledNetwork net;
    net.params = params;
    net.physical = std::move(physical);
    net.cyber = std::move(cyber);

    const int np = net.physical.node_count();
    if (!physical_roles.empty() && static_cast<int>(physical_roles.size()) != np)
        throw ConfigError("physical role table size does not match node count");
    net.physical_nodes.resize(np);
    for (int h = 0; h < np; ++h) {
        auto& node = net.physical_nodes[h];
        node.role = physical_roles.empty() ? PhysicalRole::Substation : physical_roles[h];
        node.initial_degree = net.physical.degree(h);
        node.initial_load = physical_node_load(node.initial_degree, params.beta, params.mu);
        node.capacity_param = node.initial_load;
        node.current_load = node.initial_load;
    }

    const int nc = net.cyber.node_count();
    net.cyber_nodes.resize(nc);
    for (int j = 0; j < nc; ++j) {
        net.cyber_nodes[j].initial_degree = net.cyber.degree(j);
    }
    if (nc > 0) {
        const double total = cyber_total_load(net);
        const auto shares = distribute_cyber_load(net, total);
        for (int j = 0; j < nc; ++j) {
            net.cyber_nodes[j].initial_load = shares[j];
            net.cyber_nodes[j].current_load = shares[j];
        }
    }
    return net;
}

void assign_cyber_roles(CoupledNetwork& net, double control_fraction) {
    if (control_fraction < 0.0 || control_fraction > 1.0)
        throw ConfigError("control fraction must lie in [0, 1]");
    const int nc = net.cyber_count();
    std::vector<int> order(nc);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const int da = net.cyber.degree(a), db = net.cyber.degree(b);
        if (da != db) return da > db;
        return a < b;
    });
    const int control_count = static_cast<int>(std::ceil(control_fraction * nc));
    for (int j = 0; j < nc; ++j) net.cyber_nodes[j].role = CyberRole::Monitor;
    for (int k = 0; k < control_count && k < nc; ++k)
        net.cyber_nodes[order[k]].role = CyberRole::Control;
}

std::string CouplingMap::serialize() const {
    std::ostringstream out;
    out << "# cyber_id physical_id branch_kind\n";
    for (const auto& b : branches) {
        const char* kind = b.kind == CouplingBranch::Kind::Power     ? "power"
                           : b.kind == CouplingBranch::Kind::Control ? "control"
                                                                     : "monitor";
        out << b.cyber << ' ' << b.physical << ' ' << kind << '\n';
    }
    return out.str();
}

CouplingMap CouplingMap::parse(std::string_view text, int cyber_count, int physical_count) {
    CouplingMap map;
    map.supplier.assign(cyber_count, -1);
    map.controller.assign(physical_count, -1);
    map.monitor.assign(physical_count, -1);
    int line_number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string line(text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                        : eol - pos));
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream in(line);
        int c, p;
        std::string kind;
        if (!(in >> c)) continue;  // blank
        if (!(in >> p >> kind)) throw ParseError("expected `cyber physical kind`", line_number);
        if (c < 0 || c >= cyber_count || p < 0 || p >= physical_count)
            throw ParseError("coupling endpoint out of range", line_number);
        CouplingBranch::Kind k;
        if (kind == "power") {
            k = CouplingBranch::Kind::Power;
            map.supplier[c] = p;
        } else if (kind == "control") {
            k = CouplingBranch::Kind::Control;
            map.controller[p] = c;
        } else if (kind == "monitor") {
            k = CouplingBranch::Kind::Monitor;
            map.monitor[p] = c;
        } else {
            throw ParseError("unknown branch kind `" + kind + "`", line_number);
        }
        map.branches.push_back({c, p, k});
    }
    return map;
}

}  // namespace cpsrisk
