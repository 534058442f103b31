#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpsrisk/cascade.hpp"
#include "cpsrisk/markov_model.hpp"

namespace cpsrisk {

// Terminal-region distribution observed (Monte Carlo) or derived exactly
// (exhaustive). Probabilities over recorded regions sum to 1 - residual,
// where residual is the mass of truncated runs.
struct RegionFrequencyTable {
    std::map<Region, double> probability;
    long runs = 0;  // 0 marks an exact table
    double residual = 0.0;

    double standard_error(const Region& region) const;
    std::string to_csv() const;  // header cyber_ids,physical_ids,probability,stderr
};

struct InitialFaultDistribution {
    // Normalized at construction.
    std::vector<std::pair<NodeId, double>> support;

    static InitialFaultDistribution uniform_cyber(const CoupledNetwork& net);
    static InitialFaultDistribution point(NodeId fault);

    NodeId sample(double u) const;  // u in [0, 1)
};

// Independent seeded cascades; tabulates the terminal failed sets.
// Deterministic for a fixed seed regardless of thread count.
RegionFrequencyTable monte_carlo_regions(const CoupledNetwork& net,
                                         const InitialFaultDistribution& faults, long runs,
                                         std::uint64_t seed, const CascadeConfig& config,
                                         int threads = 1);

// Walks every stochastic branch of the cascade tree (each violating node
// fails or rides through) and accumulates exact path probabilities per
// terminal region. Refuses instances above node_cap total nodes.
RegionFrequencyTable exhaustive_regions(const CoupledNetwork& net,
                                        const std::vector<NodeId>& initial_fault,
                                        const CascadeConfig& config, int node_cap = 12);

}  // namespace cpsrisk
