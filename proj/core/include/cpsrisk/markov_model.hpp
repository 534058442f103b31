#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpsrisk/cascade.hpp"
#include "cpsrisk/network_model.hpp"

namespace cpsrisk {

// Recovery behavior of the two layers as a function of the running fault
// counts:
//   p[x]  probability that the system returns to absorption from a
//         transition state whose newest fault is physical, given x physical
//         faults so far;
//   q[y]  the cyber analogue, given y cyber faults;
//   d[y]  influence of y cyber faults on the physical layer, in [0, 1]
//         (1 = strongest).
// Indices beyond a vector's domain read as its nearest endpoint value.
struct RecoveryProfile {
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> d;

    static RecoveryProfile constant(double p_value, double q_value, double d_value, int x_max,
                                    int y_max);
    // Exponential family: p[x] = p0 * exp(-lambda_p * x), likewise q and d,
    // all clamped to [0, 1].
    static RecoveryProfile parametric(double p0, double lambda_p, double q0, double lambda_q,
                                      double d0, double lambda_d, int x_max, int y_max);

    double p_at(int x) const;
    double q_at(int y) const;
    double d_at(int y) const;

    std::string serialize() const;
    static RecoveryProfile parse(std::string_view text);
};

// One-step law when the newest fault is cyber: the system absorbs with
// probability q and keeps cascading otherwise. Returned as
// {P(absorb), P(continue)}.
std::pair<double, double> cyber_transition(double q);

// One-step law when the newest fault is physical (coupling involved):
// P(continue) = p*d / (k + d*(1-k)), P(absorb) the complement. k is the
// current transition indicator. Throws SingularProfileError when the
// denominator vanishes.
std::pair<double, double> physical_transition(double p, double d, double k);

// The five recursion coefficients evaluated at grid cell (x_i, y_i).
// Written exactly as derived; several can exceed [0, 1] or go negative for
// some profiles, which the table fill later clamps.
struct AlphaCoefficients {
    double a1, a2, a3, a4, a5;
};

AlphaCoefficients alpha_coefficients(const RecoveryProfile& profile, int x_i, int y_i);

// Two readings of the absorption recursion. The printed form multiplies both
// the a2 and a3 terms by the same lagged-diagonal cell; the corrected form
// sources the a2 term from the same-row previous-column cell instead, which
// keeps absorbed probability mass from re-entering the recursion.
enum class RecursionReading : std::uint8_t { Verbatim, Corrected };

// Asymptotic probabilities over a fault-count grid. X(x, y) is the
// probability that the cascade settles at exactly x physical and y cyber
// faults; Y(x, y) the probability of still being in transition there. The
// grid is anchored at the initial fault cell (x0, y0) with Y = 1 and
// X = q(y0) (cyber-initiated fault), and the x0 row follows the pure-cyber
// absorption chain. Entries are clamped to [0, 1]; clamp_events counts how
// often that fired.
struct AsymptoticTable {
    int x0 = 0, y0 = 1;
    int x_max = 0, y_max = 0;
    std::vector<double> X, Y;  // dense, row-major over [x0..x_max] x [y0..y_max]
    int clamp_events = 0;

    double x_at(int x, int y) const;
    double y_at(int x, int y) const;
    std::string to_csv() const;  // header x,y,X,Y
};

struct InitialCondition {
    int x0 = 0;
    int y0 = 1;
};

AsymptoticTable asymptotic_probabilities(const RecoveryProfile& profile, int x_max, int y_max,
                                         InitialCondition init = {},
                                         RecursionReading reading = RecursionReading::Verbatim);

// A candidate risk region: the failed sets split by layer. Kept sorted.
struct Region {
    std::vector<int> cyber;
    std::vector<int> physical;

    int size() const { return static_cast<int>(cyber.size() + physical.size()); }
    void canonicalize();
    friend bool operator==(const Region&, const Region&) = default;
    bool operator<(const Region& o) const;
};

// What region probabilities are conditioned on: where the cascade starts and
// which cross-layer links can transmit failures.
struct PredictionContext {
    std::vector<NodeId> initial_faults;
    bool strict_control_coupling = false;
};

// True when every region node is reachable from an initial fault through
// failure-propagation links restricted to the region: same-layer adjacency,
// supplier -> dependent (physical to cyber), and controller -> governed
// (cyber to physical, strict mode only). The region must contain a fault.
bool region_admissible(const Region& region, const CoupledNetwork& net,
                       const PredictionContext& ctx);

// Probability that the cascade's final failed set equals this region: the
// asymptotic table value at the region's layer split, zero for regions the
// coupling structure cannot produce.
double region_probability(const Region& region, const AsymptoticTable& table,
                          const CoupledNetwork& net, const PredictionContext& ctx);

// Split-size-only baseline: absorption_factor * rate^(size - 1). Identical
// for every layer split of the same total size. rate must lie in (0, 1).
// The default absorption factor is a presentation choice sized so that a
// 0.35 rate yields ~3.4e-2 at size 2.
inline constexpr double kFixedTransferAbsorption = 0.098;
double fixed_transfer_probability(int region_size, double rate,
                                  double absorption_factor = kFixedTransferAbsorption);

struct EstimateOptions {
    // Frequencies are used raw; counts never observed are filled from the
    // nearest observed count. A layer with no observations at all falls back
    // to these defaults.
    double default_p = 1.0;
    double default_q = 1.0;
    double default_d = 1.0;
    // Floor applied to p and d (they sit in denominators downstream).
    double denominator_floor = 1e-3;
};

// Estimates p, q, d from simulated histories. p(x): absorption frequency
// among transition states with x physical faults and a physical newest
// fault; q(y) the cyber analogue; d(y): among continuing transitions from
// states with y cyber faults, the share whose new failures include a
// physical node.
RecoveryProfile estimate_profile(std::span<const CascadeTrace> traces,
                                 const EstimateOptions& options = {});

enum class PredictionModel : std::uint8_t {
    DependentMarkov,
    FixedTransfer,
    Exhaustive,
    MonteCarlo,
};

struct RiskRegionPrediction {
    Region region;
    double probability = 0.0;
    // Node -> failure step, parallel to the region vectors.
    std::vector<int> cyber_failure_order;
    std::vector<int> physical_failure_order;
    PredictionModel model = PredictionModel::DependentMarkov;
};

}  // namespace cpsrisk
