#pragma once

#include <cstdint>
#include <vector>

#include "cpsrisk/network_model.hpp"

namespace cpsrisk {

// Per-physical-node support capacities: how many cyber nodes each physical
// node can power, derived from its structural load.
struct SupportCapacity {
    std::vector<int> per_node;  // floor(beta * load^mu), one per physical node
    double mean = 0.0;          // degree-distribution average
};

// floor(beta * load^mu): a capacity count is integral, rounding down.
int max_support(double load, double beta, double mu);

// Degree-distribution average of capacities: sum_z P_d(z) * N_z.
// degree_probabilities must sum to 1 (within 1e-9); one entry per class,
// aligned with the capacities vector.
double mean_max_support(const std::vector<double>& degree_probabilities,
                        const std::vector<int>& capacities);

// Unnormalized placement weight of one bin turned into a probability:
// P = P_d * load / (S_p * mean_capacity), clamped to [0, 1]. The allocator
// renormalizes these across bins before sampling. Throws AllocationError
// when mean_capacity is zero.
double allocation_probability(double degree_probability, double load, int physical_size,
                              double mean_capacity);

SupportCapacity compute_support_capacity(const CoupledNetwork& net);

struct CouplingOptions {
    double control_fraction = 0.2;  // share of cyber nodes given the Control role
};

// Places every cyber node (ball) into a physical supplier (bin) sampled by
// the load-derived weights, never exceeding a bin's capacity; then wires
// control and monitor branches: each physical node is governed by the
// nearest Control cyber node and watched by the nearest Monitor cyber node
// (hop distance through the power branches plus the cyber graph, ties by
// lowest index). Deterministic for a fixed seed. Also assigns cyber roles.
CouplingMap allocate_coupling(CoupledNetwork& net, std::uint64_t rng_seed,
                              const CouplingOptions& options = {});

// Distribution of the number of balls landing in one bin of the given
// class: binomial over the total ball count with success probability p,
// truncated at the bin's degree and renormalized.
std::vector<double> ball_count_pmf_for_class(int ball_count, double p, int degree_truncation);

// Mixture of the per-class distributions weighted by the degree
// distribution of the physical layer.
std::vector<double> ball_count_pmf(const CoupledNetwork& net);

}  // namespace cpsrisk
