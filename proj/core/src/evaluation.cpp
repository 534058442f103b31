#include "cpsrisk/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "cpsrisk/errors.hpp"

namespace cpsrisk {

namespace {

// Connected components over functional nodes of the combined two-layer
// graph; node ids: [0, np) physical, [np, np+nc) cyber.
std::vector<int> component_sizes_of(const CoupledNetwork& net,
                                    const std::vector<std::uint8_t>& phys_ok,
                                    const std::vector<std::uint8_t>& cyber_ok) {
    const int np = net.physical_count();
    const int nc = net.cyber_count();
    std::vector<int> comp(np + nc, -1);
    std::vector<int> sizes;
    std::vector<int> stack;
    for (int start = 0; start < np + nc; ++start) {
        const bool ok = start < np ? phys_ok[start] != 0 : cyber_ok[start - np] != 0;
        if (!ok || comp[start] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        sizes.push_back(0);
        comp[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            ++sizes[id];
            auto visit = [&](int u) {
                const bool u_ok = u < np ? phys_ok[u] != 0 : cyber_ok[u - np] != 0;
                if (u_ok && comp[u] < 0) {
                    comp[u] = id;
                    stack.push_back(u);
                }
            };
            if (v < np) {
                for (int u : net.physical.neighbors(v)) visit(u);
            } else {
                for (int u : net.cyber.neighbors(v - np)) visit(np + u);
            }
            for (const CouplingBranch& b : net.coupling.branches) {
                if (v < np && b.physical == v) visit(np + b.cyber);
                if (v >= np && b.cyber == v - np) visit(b.physical);
            }
        }
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<int>());
    return sizes;
}

}  // namespace

ResidualReport evaluate_removal(const CoupledNetwork& net, const Region& region,
                                const CascadeConfig& config) {
    ResidualReport report;
    report.removed = region;

    const int np = net.physical_count();
    const int nc = net.cyber_count();

    std::vector<std::uint8_t> phys_alive(np, 1), cyber_alive(nc, 1);
    double before_load = 0.0;
    for (int h = 0; h < np; ++h) before_load += net.physical_nodes[h].initial_load;

    if (region.size() > 0) {
        std::vector<NodeId> faults;
        for (int j : region.cyber) faults.push_back({Layer::Cyber, j});
        for (int h : region.physical) faults.push_back({Layer::Physical, h});
        // Deterministic reconvergence regardless of the prediction-side mode.
        CascadeConfig eval_config = config;
        eval_config.failure_mode = FailureMode::Deterministic;
        CascadeEngine engine(net, eval_config);
        const CascadeTrace trace = engine.simulate(faults, 0);
        phys_alive = trace.terminal().physical_alive;
        cyber_alive = trace.terminal().cyber_alive;
    }

    // Mutual support: powered cyber nodes, controllable physical nodes.
    std::vector<std::uint8_t> phys_ok = phys_alive, cyber_ok = cyber_alive;
    if (!net.coupling.supplier.empty()) {
        for (int j = 0; j < nc; ++j) {
            const int p = net.coupling.supplier[j];
            if (p >= 0 && !phys_alive[p]) cyber_ok[j] = 0;
        }
    }
    if (config.strict_control_coupling && !net.coupling.controller.empty()) {
        for (int h = 0; h < np; ++h) {
            const int c = net.coupling.controller[h];
            if (c >= 0 && !cyber_alive[c]) phys_ok[h] = 0;
        }
    }

    report.component_sizes = component_sizes_of(net, phys_ok, cyber_ok);
    const double v_total = static_cast<double>(net.total_count());
    const double pairs = v_total * (v_total - 1.0);
    const double largest =
        report.component_sizes.empty() ? 0.0 : static_cast<double>(report.component_sizes[0]);
    report.r_max = pairs > 0.0 ? largest * (largest - 1.0) / pairs : (largest > 0.0 ? 1.0 : 0.0);

    if (before_load <= 0.0) throw UndefinedMetricError("network carries no physical load");
    double after_load = 0.0;
    for (int h = 0; h < np; ++h)
        if (phys_alive[h]) after_load += net.physical_nodes[h].initial_load;
    report.eta = (before_load - after_load) / before_load;
    return report;
}

double max_connectivity(const CoupledNetwork& net, const Region& region,
                        const CascadeConfig& config) {
    return evaluate_removal(net, region, config).r_max;
}

double load_loss(const CoupledNetwork& net, const SystemState& before, const SystemState& after) {
    double before_load = 0.0, after_load = 0.0;
    for (int h = 0; h < net.physical_count(); ++h) {
        if (before.physical_alive[h]) before_load += net.physical_nodes[h].initial_load;
        if (after.physical_alive[h]) after_load += net.physical_nodes[h].initial_load;
    }
    if (before_load == 0.0) throw UndefinedMetricError("no pre-excision physical load");
    return (before_load - after_load) / before_load;
}

std::string ResidualReport::csv_row() const {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.5e,%.5e\n", removed.size(),
                  static_cast<int>(removed.cyber.size()),
                  static_cast<int>(removed.physical.size()), r_max, eta);
    return buf;
}

}  // namespace cpsrisk
