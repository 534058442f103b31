#pragma once

#include <string>
#include <vector>

#include "cpsrisk/cascade.hpp"
#include "cpsrisk/markov_model.hpp"

namespace cpsrisk {

// Residual-network functionality after excising a region and letting the
// cascade reconverge.
//   r_max  ordered-pair connectivity of the largest mutually-supported
//          component, normalized by V(V-1) over the original node count.
//   eta    fraction of the structural physical load carried by nodes that
//          are dead after excision (loss-positive sign).
struct ResidualReport {
    Region removed;
    double r_max = 0.0;
    double eta = 0.0;
    std::vector<int> component_sizes;  // functional components, descending

    std::string csv_row() const;  // region_size,cyber_count,physical_count,r_max,eta
};

// A residual node is functional when it is alive, its power supplier (cyber
// side) is alive, and — in strict mode — its controller (physical side) is
// alive. Components are taken over both layers' edges plus all coupling
// branches.
ResidualReport evaluate_removal(const CoupledNetwork& net, const Region& region,
                                const CascadeConfig& config = {});

double max_connectivity(const CoupledNetwork& net, const Region& region,
                        const CascadeConfig& config = {});

// eta between two states of the same network over structural loads of alive
// physical nodes. Throws UndefinedMetricError when the before state carries
// no load.
double load_loss(const CoupledNetwork& net, const SystemState& before, const SystemState& after);

}  // namespace cpsrisk
