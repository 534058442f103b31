#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cpsrisk/network_model.hpp"

namespace cpsrisk {

enum class FailureMode : std::uint8_t {
    // Every constraint-violating node fails in the step where it violates.
    Deterministic,
    // A violating node fails with probability 1 - exp(-overload ratio);
    // a survivor rides through: its capacity rises to the load it survived.
    Probabilistic,
};

struct CascadeConfig {
    FailureMode failure_mode = FailureMode::Deterministic;
    // When set, the failure of a Control cyber node kills the physical nodes
    // it governs one step later. Otherwise those nodes merely lose
    // controllability (tracked, but not fatal).
    bool strict_control_coupling = false;
    // Share of cyber nodes carrying backup devices; such nodes never fail
    // from load (they still die when their power supplier does). Selected as
    // the highest-degree nodes, ties by lower index.
    double backup_fraction = 0.0;
    // Explicit backup list; when non-empty it replaces the fraction rule.
    std::vector<int> backed_up_cyber;
    // 0 means 10 * (cyber + physical node count).
    int max_steps = 0;
};

// Full system state snapshot.
//   physical_failures (X) / cyber_failures (Y): failed-node counts
//   stability (I): 1 in absorption, 0 in transition
//   last_fault_layer (L): 0 physical, 1 cyber
//   transition (K): 1 while failures are pending, 0 once absorbed
// Capacities start at the tolerance bound and only rise (ride-through).
struct SystemState {
    int step = 0;
    int physical_failures = 0;
    int cyber_failures = 0;
    int stability = 1;
    int last_fault_layer = 1;
    int transition = 0;
    std::vector<std::uint8_t> physical_alive;
    std::vector<std::uint8_t> cyber_alive;
    std::vector<double> physical_load;
    std::vector<double> cyber_load;
    std::vector<double> physical_capacity;
    std::vector<double> cyber_capacity;
    // Physical nodes whose controller died (informational unless strict).
    std::vector<std::uint8_t> physical_uncontrolled;
};

enum class StateClass : std::uint8_t { Absorption, Transition };

// Per-step conservation ledger: alive load before the step equals alive load
// after plus the load dropped at nodes with no alive same-layer neighbor.
struct StepLedger {
    double before_total = 0.0;
    double after_total = 0.0;
    double lost = 0.0;
};

struct CascadeTrace {
    std::vector<SystemState> states;
    std::vector<NodeId> initial_faults;
    std::vector<StepLedger> ledgers;          // ledgers[0] covers the initial fault
    std::vector<int> physical_failure_step;   // -1 while alive
    std::vector<int> cyber_failure_step;
    bool truncated = false;

    const SystemState& terminal() const { return states.back(); }
    // One JSON object per line: n, X, Y, I, L, K, failed_node_ids.
    std::string to_jsonl() const;
};

struct Violator {
    Layer layer;
    int index;
    double overload_ratio;     // load / capacity - 1
    double fail_probability;   // 1 under the deterministic rule
};

class CascadeEngine {
  public:
    CascadeEngine(const CoupledNetwork& net, CascadeConfig config);

    // Marks the faults dead and redistributes their loads. Throws
    // ConfigError when faults is empty.
    SystemState initial_state(const std::vector<NodeId>& faults, StepLedger* ledger = nullptr) const;

    // Alive, non-exempt nodes above their capacity; physical first, then
    // cyber, each in ascending index order.
    std::vector<Violator> violators(const SystemState& state) const;

    // Cross-layer kills pending for the next step: cyber nodes whose
    // supplier died, and (strict mode) physical nodes whose controller died.
    std::vector<NodeId> pending_cross_layer(const SystemState& state) const;

    // Applies one step: pending cross-layer kills plus the violators whose
    // mask bit is set fail; surviving violators ride through. Bit i of
    // fail_mask corresponds to violator_list[i].
    StepLedger apply_step(SystemState& state, const std::vector<Violator>& violator_list,
                          std::uint64_t fail_mask) const;

    CascadeTrace simulate(const std::vector<NodeId>& faults, std::uint64_t rng_seed) const;

    const CascadeConfig& config() const { return config_; }
    const CoupledNetwork& network() const { return *net_; }
    int max_steps() const;
    bool is_backed_up(int cyber_index) const { return backed_up_[cyber_index] != 0; }

  private:
    void refresh_flags(SystemState& state) const;

    const CoupledNetwork* net_;
    CascadeConfig config_;
    std::vector<std::uint8_t> backed_up_;
};

// Absorption iff every alive node satisfies its load constraint.
StateClass classify_state(const CoupledNetwork& net, const SystemState& state);

// Convenience wrapper: build an engine and simulate.
CascadeTrace simulate(const CoupledNetwork& net, const std::vector<NodeId>& faults,
                      std::uint64_t rng_seed, const CascadeConfig& config = {});

// Frequency estimate of the one-step transition law from an ensemble of
// observed successor states, factored by the layer of the newest fault.
struct TransitionEstimate {
    struct Key {
        int x, y, i, l, k;
        std::vector<std::uint8_t> physical_alive;
        std::vector<std::uint8_t> cyber_alive;
        bool operator<(const Key& o) const;
    };
    std::map<Key, double> successor_probability;       // sums to 1
    std::array<double, 2> layer_probability{0.0, 0.0}; // indexed by L of successor
    std::map<Key, double> conditional_within_layer;    // sums to 1 within each layer
};

TransitionEstimate empirical_transition_probability(const SystemState& from,
                                                    const std::vector<SystemState>& successors);

}  // namespace cpsrisk
