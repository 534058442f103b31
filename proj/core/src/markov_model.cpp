#include "cpsrisk/markov_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "cpsrisk/errors.hpp"

namespace cpsrisk {

namespace {

double at_clamped(const std::vector<double>& v, int i) {
    if (v.empty()) throw ConfigError("recovery profile axis is empty");
    if (i < 0) return v.front();
    if (i >= static_cast<int>(v.size())) return v.back();
    return v[static_cast<std::size_t>(i)];
}

}  // namespace

RecoveryProfile RecoveryProfile::constant(double p_value, double q_value, double d_value,
                                          int x_max, int y_max) {
    RecoveryProfile prof;
    prof.p.assign(static_cast<std::size_t>(x_max) + 1, p_value);
    prof.q.assign(static_cast<std::size_t>(y_max) + 1, q_value);
    prof.d.assign(static_cast<std::size_t>(y_max) + 1, d_value);
    return prof;
}

RecoveryProfile RecoveryProfile::parametric(double p0, double lambda_p, double q0,
                                            double lambda_q, double d0, double lambda_d,
                                            int x_max, int y_max) {
    RecoveryProfile prof;
    for (int x = 0; x <= x_max; ++x)
        prof.p.push_back(std::clamp(p0 * std::exp(-lambda_p * x), 0.0, 1.0));
    for (int y = 0; y <= y_max; ++y) {
        prof.q.push_back(std::clamp(q0 * std::exp(-lambda_q * y), 0.0, 1.0));
        prof.d.push_back(std::clamp(d0 * std::exp(-lambda_d * y), 0.0, 1.0));
    }
    return prof;
}

double RecoveryProfile::p_at(int x) const { return at_clamped(p, x); }
double RecoveryProfile::q_at(int y) const { return at_clamped(q, y); }
double RecoveryProfile::d_at(int y) const { return at_clamped(d, y); }

std::string RecoveryProfile::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "# recovery profile: axis index value\n";
    for (std::size_t i = 0; i < p.size(); ++i) out << "p " << i << ' ' << p[i] << '\n';
    for (std::size_t i = 0; i < q.size(); ++i) out << "q " << i << ' ' << q[i] << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) out << "d " << i << ' ' << d[i] << '\n';
    return out.str();
}

RecoveryProfile RecoveryProfile::parse(std::string_view text) {
    RecoveryProfile prof;
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
        std::string axis;
        if (!(in >> axis)) continue;
        int index;
        double value;
        if (!(in >> index >> value)) throw ParseError("expected `axis index value`", line_number);
        std::vector<double>* target = axis == "p"   ? &prof.p
                                      : axis == "q" ? &prof.q
                                      : axis == "d" ? &prof.d
                                                    : nullptr;
        if (!target) throw ParseError("unknown profile axis `" + axis + "`", line_number);
        if (index < 0) throw ParseError("negative index", line_number);
        if (static_cast<std::size_t>(index) >= target->size())
            target->resize(static_cast<std::size_t>(index) + 1, 0.0);
        (*target)[static_cast<std::size_t>(index)] = value;
    }
    return prof;
}

std::pair<double, double> cyber_transition(double q) {
    if (q < 0.0 || q > 1.0) throw ConfigError("q must lie in [0, 1]");
    return {q, 1.0 - q};
}

std::pair<double, double> physical_transition(double p, double d, double k) {
    if (p < 0.0 || p > 1.0 || d < 0.0 || d > 1.0 || k < 0.0 || k > 1.0)
        throw ConfigError("physical transition inputs must lie in [0, 1]");
    const double denom = k + d * (1.0 - k);
    if (denom == 0.0) throw SingularProfileError("k + d*(1-k)");
    const double cont = p * d / denom;
    return {1.0 - cont, cont};
}

AlphaCoefficients alpha_coefficients(const RecoveryProfile& profile, int x_i, int y_i) {
    const double p_i = profile.p_at(x_i);
    const double p_prev = profile.p_at(x_i - 1);
    const double q_i = profile.q_at(y_i);
    const double q_prev = profile.q_at(y_i - 1);
    const double d_i = profile.d_at(y_i);
    const double d_prev = profile.d_at(y_i - 1);
    if (p_prev == 0.0) throw SingularProfileError("p(x_{i-1})");
    if (d_prev == 0.0) throw SingularProfileError("d(y_{i-1})");

    AlphaCoefficients a{};
    a.a1 = p_i * (1.0 - q_i) * (1.0 - p_prev) / p_prev;
    a.a2 = p_i * d_i * q_prev * (1.0 - p_prev * d_prev) / (p_prev * d_prev);
    a.a3 = (1.0 - q_prev) * p_i * d_i * (p_prev - (1.0 - p_prev) / d_prev) +
           q_prev * p_i * (1.0 - q_i) * (1.0 - d_i);
    a.a4 = (1.0 - p_prev) / p_prev;
    a.a5 = q_prev * (1.0 - p_prev * d_i) - d_i * (1.0 - p_prev);
    return a;
}

double AsymptoticTable::x_at(int x, int y) const {
    if (x < x0 || x > x_max || y < y0 || y > y_max) return 0.0;
    const int width = y_max - y0 + 1;
    return X[static_cast<std::size_t>((x - x0) * width + (y - y0))];
}

double AsymptoticTable::y_at(int x, int y) const {
    if (x < x0 || x > x_max || y < y0 || y > y_max) return 0.0;
    const int width = y_max - y0 + 1;
    return Y[static_cast<std::size_t>((x - x0) * width + (y - y0))];
}

std::string AsymptoticTable::to_csv() const {
    std::ostringstream out;
    out << "x,y,X,Y\n";
    char buf[64];
    for (int x = x0; x <= x_max; ++x)
        for (int y = y0; y <= y_max; ++y) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.5e,%.5e\n", x, y, x_at(x, y), y_at(x, y));
            out << buf;
        }
    return out.str();
}

AsymptoticTable asymptotic_probabilities(const RecoveryProfile& profile, int x_max, int y_max,
                                         InitialCondition init, RecursionReading reading) {
    if (x_max < init.x0 || y_max < init.y0)
        throw ConfigError("asymptotic grid must contain the initial cell");
    AsymptoticTable t;
    t.x0 = init.x0;
    t.y0 = init.y0;
    t.x_max = x_max;
    t.y_max = y_max;
    const int width = y_max - init.y0 + 1;
    const int height = x_max - init.x0 + 1;
    t.X.assign(static_cast<std::size_t>(width) * height, 0.0);
    t.Y.assign(static_cast<std::size_t>(width) * height, 0.0);

    auto clamp01 = [&t](double v) {
        if (v < 0.0 || v > 1.0) {
            ++t.clamp_events;
            return std::clamp(v, 0.0, 1.0);
        }
        return v;
    };
    auto idx = [&](int x, int y) {
        return static_cast<std::size_t>((x - t.x0) * width + (y - t.y0));
    };

    // Anchor: the system starts in transition at the initial fault cell of a
    // cyber-initiated cascade and absorbs there with probability q(y0).
    t.Y[idx(init.x0, init.y0)] = 1.0;
    t.X[idx(init.x0, init.y0)] = clamp01(profile.q_at(init.y0));

    // First row: no physical fault yet, so the cascade walks the cyber
    // absorption chain; each further cell keeps (1 - q) of the transition
    // mass and absorbs q of it.
    for (int y = init.y0 + 1; y <= y_max; ++y) {
        const double carried = t.Y[idx(init.x0, y - 1)] * (1.0 - profile.q_at(y - 1));
        t.Y[idx(init.x0, y)] = clamp01(carried);
        t.X[idx(init.x0, y)] = clamp01(carried * profile.q_at(y));
    }

    for (int x = init.x0 + 1; x <= x_max; ++x) {
        for (int y = init.y0; y <= y_max; ++y) {
            const AlphaCoefficients a = alpha_coefficients(profile, x, y);
            const double x_up = t.x_at(x - 1, y);
            const double x_diag = t.x_at(x - 1, y - 1);
            const double y_diag = t.y_at(x - 1, y - 1);
            double xv;
            if (reading == RecursionReading::Verbatim) {
                xv = a.a1 * x_up + a.a2 * x_diag + a.a3 * x_diag;
            } else {
                const double x_left = t.x_at(x, y - 1);
                xv = a.a1 * x_up + a.a2 * x_left + a.a3 * x_diag;
            }
            const double yv = a.a4 * x_up + a.a5 * y_diag;
            t.X[idx(x, y)] = clamp01(xv);
            t.Y[idx(x, y)] = clamp01(yv);
        }
    }
    return t;
}

void Region::canonicalize() {
    std::sort(cyber.begin(), cyber.end());
    cyber.erase(std::unique(cyber.begin(), cyber.end()), cyber.end());
    std::sort(physical.begin(), physical.end());
    physical.erase(std::unique(physical.begin(), physical.end()), physical.end());
}

bool Region::operator<(const Region& o) const {
    return std::tie(cyber, physical) < std::tie(o.cyber, o.physical);
}

bool region_admissible(const Region& region, const CoupledNetwork& net,
                       const PredictionContext& ctx) {
    if (region.size() == 0) return false;
    const auto in_cyber = [&](int j) {
        return std::binary_search(region.cyber.begin(), region.cyber.end(), j);
    };
    const auto in_physical = [&](int h) {
        return std::binary_search(region.physical.begin(), region.physical.end(), h);
    };

    // Seeds: initial faults contained in the region.
    std::vector<int> cyber_seen(net.cyber_count(), 0), phys_seen(net.physical_count(), 0);
    std::vector<NodeId> stack;
    for (const NodeId& f : ctx.initial_faults) {
        if (f.layer == Layer::Cyber && in_cyber(f.index) && !cyber_seen[f.index]) {
            cyber_seen[f.index] = 1;
            stack.push_back(f);
        } else if (f.layer == Layer::Physical && in_physical(f.index) && !phys_seen[f.index]) {
            phys_seen[f.index] = 1;
            stack.push_back(f);
        }
    }
    if (stack.empty()) return false;

    // Failure can travel along same-layer edges, from a supplier to its
    // dependents, and (strict mode) from a controller to its governed nodes.
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        if (v.layer == Layer::Cyber) {
            for (int u : net.cyber.neighbors(v.index)) {
                if (in_cyber(u) && !cyber_seen[u]) {
                    cyber_seen[u] = 1;
                    stack.push_back({Layer::Cyber, u});
                }
            }
            if (ctx.strict_control_coupling && !net.coupling.controller.empty()) {
                for (int h = 0; h < net.physical_count(); ++h) {
                    if (net.coupling.controller[h] == v.index && in_physical(h) && !phys_seen[h]) {
                        phys_seen[h] = 1;
                        stack.push_back({Layer::Physical, h});
                    }
                }
            }
        } else {
            for (int u : net.physical.neighbors(v.index)) {
                if (in_physical(u) && !phys_seen[u]) {
                    phys_seen[u] = 1;
                    stack.push_back({Layer::Physical, u});
                }
            }
            if (!net.coupling.supplier.empty()) {
                for (int j = 0; j < net.cyber_count(); ++j) {
                    if (net.coupling.supplier[j] == v.index && in_cyber(j) && !cyber_seen[j]) {
                        cyber_seen[j] = 1;
                        stack.push_back({Layer::Cyber, j});
                    }
                }
            }
        }
    }
    for (int j : region.cyber)
        if (!cyber_seen[j]) return false;
    for (int h : region.physical)
        if (!phys_seen[h]) return false;
    return true;
}

double region_probability(const Region& region, const AsymptoticTable& table,
                          const CoupledNetwork& net, const PredictionContext& ctx) {
    if (!region_admissible(region, net, ctx)) return 0.0;
    return table.x_at(static_cast<int>(region.physical.size()),
                      static_cast<int>(region.cyber.size()));
}

double fixed_transfer_probability(int region_size, double rate, double absorption_factor) {
    if (rate <= 0.0 || rate >= 1.0) throw ConfigError("fixed transfer rate must lie in (0, 1)");
    if (region_size < 1) throw ConfigError("region size must be at least 1");
    return absorption_factor * std::pow(rate, region_size - 1);
}

RecoveryProfile estimate_profile(std::span<const CascadeTrace> traces,
                                 const EstimateOptions& options) {
    if (traces.empty()) throw ConfigError("profile estimation needs at least one trace");

    std::map<int, std::pair<long, long>> p_counts, q_counts;  // count -> {absorbed, seen}
    std::map<int, std::pair<long, long>> d_counts;            // y -> {physical share, continuing}
    for (const CascadeTrace& trace : traces) {
        for (std::size_t i = 0; i + 1 < trace.states.size(); ++i) {
            const SystemState& s = trace.states[i];
            const SystemState& next = trace.states[i + 1];
            if (s.transition != 1) continue;
            const bool absorbed = next.transition == 0;
            if (s.last_fault_layer == 1) {
                auto& c = q_counts[s.cyber_failures];
                c.second += 1;
                if (absorbed) c.first += 1;
            } else {
                auto& c = p_counts[s.physical_failures];
                c.second += 1;
                if (absorbed) c.first += 1;
            }
            if (!absorbed) {
                const bool new_physical = next.physical_failures > s.physical_failures;
                const bool new_cyber = next.cyber_failures > s.cyber_failures;
                if (new_physical || new_cyber) {
                    auto& c = d_counts[s.cyber_failures];
                    c.second += 1;
                    if (new_physical) c.first += 1;
                }
            }
        }
    }

    int x_domain = 0, y_domain = 0;
    for (const CascadeTrace& trace : traces) {
        x_domain = std::max(x_domain, trace.terminal().physical_failures);
        y_domain = std::max(y_domain, trace.terminal().cyber_failures);
    }

    auto fill_axis = [](const std::map<int, std::pair<long, long>>& counts, int domain,
                        double fallback) {
        std::vector<double> axis(static_cast<std::size_t>(domain) + 1, -1.0);
        for (const auto& [idx, c] : counts) {
            if (idx <= domain && c.second > 0)
                axis[static_cast<std::size_t>(idx)] =
                    static_cast<double>(c.first) / static_cast<double>(c.second);
        }
        // Nearest observed neighbor for the gaps; overall fallback when no
        // count was ever observed.
        std::vector<int> observed;
        for (int i = 0; i <= domain; ++i)
            if (axis[static_cast<std::size_t>(i)] >= 0.0) observed.push_back(i);
        if (observed.empty()) {
            std::fill(axis.begin(), axis.end(), fallback);
            return axis;
        }
        for (int i = 0; i <= domain; ++i) {
            if (axis[static_cast<std::size_t>(i)] >= 0.0) continue;
            int best = observed.front();
            for (int o : observed)
                if (std::abs(o - i) < std::abs(best - i)) best = o;
            axis[static_cast<std::size_t>(i)] = axis[static_cast<std::size_t>(best)];
        }
        return axis;
    };

    RecoveryProfile prof;
    prof.p = fill_axis(p_counts, x_domain, options.default_p);
    prof.q = fill_axis(q_counts, y_domain, options.default_q);
    prof.d = fill_axis(d_counts, y_domain, options.default_d);
    for (double& v : prof.p) v = std::max(v, options.denominator_floor);
    for (double& v : prof.d) v = std::max(v, options.denominator_floor);
    return prof;
}

}  // namespace cpsrisk
