#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cpsrisk/cascade.hpp"
#include "cpsrisk/markov_model.hpp"
#include "cpsrisk/rng.hpp"

namespace cpsrisk {

// Search positions live in [0, 1]^dim throughout; fitness is maximized.
struct Wolf {
    std::vector<double> position;
    double fitness = -std::numeric_limits<double>::infinity();
    double personal_best = -std::numeric_limits<double>::infinity();
    int stagnation = 0;
};

struct PackState {
    std::vector<Wolf> wolves;
    std::array<int, 3> leaders{0, 0, 0};  // indices of the three best, ties by index
    int iteration = 0;
};

struct OptimizerConfig {
    int pack_size = 40;
    int max_iterations = 1000;
    // Control-coefficient knobs: the encircling coefficient decays as
    // a(t) = (omega / 4) * (1 - t / max_iterations)^(eta / 2), so the
    // defaults omega = 8, eta = 2 recover the canonical 2 -> 0 linear decay.
    double omega = 8.0;
    double eta = 2.0;
    bool adaptive_position = true;  // fitness-weighted leader aggregation
    bool cross_optimal = true;      // perturb stagnant wolves toward the best
    int stagnation_threshold = 10;
    int convergence_patience = 100;  // best-ever unchanged this long -> stop
    int threads = 1;
};

enum class OptimizerVariant : std::uint8_t { Classic, CrossAdaptive };

struct ConvergenceHistory {
    std::vector<double> best_fitness;  // best-ever after each iteration
    std::vector<double> mean_fitness;
    std::string to_csv() const;  // header iteration,best_fitness,mean_fitness
};

struct OptimizeResult {
    Wolf best;  // best-ever
    ConvergenceHistory history;
    int reinit_events = 0;  // wolves re-seeded after a non-finite fitness
    int iterations_run = 0;
};

using FitnessFn = std::function<double(std::span<const double>)>;

// Fitness-weighted aggregation of the three leader-derived candidates. For a
// wolf whose fitness reciprocal reaches the pack average the candidates are
// combined with weights k_i, k_j, k_z; otherwise (or when the weights sum to
// zero) they are averaged plainly. Output is a convex combination either way.
std::vector<double> adaptive_position_update(std::span<const double> w1,
                                             std::span<const double> w2,
                                             std::span<const double> w3, double k_i, double k_j,
                                             double k_z, double k_n, double k_avg);

// Perturbation toward the incumbent best: W' = W_best + |g * W_best - W| * b
// coordinatewise, then clamped to the unit box.
std::vector<double> cross_optimal_apply(std::span<const double> wolf,
                                        std::span<const double> best, double gamma, double beta);

// Same with g uniform in [1, 2] and b uniform in [0, 1].
std::vector<double> cross_optimal_update(std::span<const double> wolf,
                                         std::span<const double> best, Rng& rng);

// One canonical encircling step applied to the whole pack: every wolf moves
// to the plain average of its three leader-derived candidates, positions are
// clamped, fitness re-evaluated and leaders refreshed.
void classic_gwo_step(PackState& pack, const FitnessFn& fitness, int t,
                      const OptimizerConfig& config, std::uint64_t master_seed);

OptimizeResult optimize(const FitnessFn& fitness, int dimension, const OptimizerConfig& config,
                        OptimizerVariant variant, std::uint64_t rng_seed);

// --- Region search -------------------------------------------------------

// Membership encoding over [0,1]^(nc+np): cyber block first, then physical;
// a coordinate strictly above 0.5 puts the node in the region.
std::vector<double> encode_region(const Region& region, int cyber_count, int physical_count);
Region decode_region(std::span<const double> position, int cyber_count, int physical_count);

struct RegionFitnessParams {
    double connectivity_weight = 0.5;  // weight of (1 - residual connectivity)
    double load_loss_weight = 0.5;     // weight of the load-loss share
    int min_size = 1;
    int max_size = std::numeric_limits<int>::max();
};

// Occurrence probability times removal impact; empty, out-of-band or
// inadmissible regions score zero.
double region_fitness(const Region& region, const AsymptoticTable& table,
                      const CoupledNetwork& net, const PredictionContext& ctx,
                      const CascadeConfig& eval_config, const RegionFitnessParams& params);

// Position-space wrapper around region_fitness with memoization on the
// decoded region.
FitnessFn make_region_fitness(const AsymptoticTable& table, const CoupledNetwork& net,
                              const PredictionContext& ctx, const CascadeConfig& eval_config,
                              const RegionFitnessParams& params);

}  // namespace cpsrisk
