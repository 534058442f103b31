#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cpsrisk/cascade.hpp"
#include "cpsrisk/coupling.hpp"
#include "cpsrisk/errors.hpp"
#include "cpsrisk/markov_model.hpp"
#include "cpsrisk/network_model.hpp"
#include "cpsrisk/optimizer.hpp"
#include "cpsrisk/oracle.hpp"

namespace cpsrisk {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentError : Error {
    ExperimentError(const std::string& stage, const std::string& message)
        : Error("stage " + stage + ": " + message), stage_name(stage) {}
    std::string stage_name;
};

// Full description of one reproducible run. Loadable from a JSON file; the
// name "ieee39-ba110" resolves to the built-in study configuration.
struct ExperimentConfig {
    // Topology.
    std::string physical_source = "ieee39";  // builtin name or edge-list file
    std::string cyber_source = "ba";         // "ba" or edge-list file
    int cyber_nodes = 110;
    int ba_m0 = 3;
    int ba_m = 2;

    LayerParams params;

    double control_fraction = 0.2;

    // Cascade dynamics used for estimation and prediction.
    bool probabilistic_failures = true;
    bool strict_control_coupling = true;
    double backup_fraction = 0.3;
    int max_steps = 0;

    // Recovery profile source.
    std::string profile_source = "estimate";  // "estimate", "parametric", or a file path
    long estimation_runs = 20000;
    double parametric_p0 = 0.8, parametric_lambda_p = 0.1;
    double parametric_q0 = 0.8, parametric_lambda_q = 0.1;
    double parametric_d0 = 1.0, parametric_lambda_d = 0.1;

    // Asymptotic table.
    int table_x_max = 12;
    int table_y_max = 12;
    RecursionReading reading = RecursionReading::Corrected;

    // Size-only baseline.
    double fixed_rate = 0.35;
    double fixed_absorption = kFixedTransferAbsorption;

    // Prediction output.
    int max_region_size = 9;

    // Optimization.
    OptimizerConfig optimizer;
    RegionFitnessParams fitness;

    // Residual evaluation: one optimizer run per algorithm per target size.
    std::vector<int> evaluation_sizes = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    int evaluation_iterations = 120;

    std::uint64_t master_seed = 1;
    int threads = 1;

    static ExperimentConfig builtin(const std::string& name);
    static ExperimentConfig load(const std::string& path_or_builtin);
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    std::uint64_t config_hash() const;  // FNV-1a over the canonical JSON
};

// Lazily builds the shared artifacts and writes one stage's outputs at a
// time. Stages recompute their inputs deterministically from the config, so
// they can run standalone.
class Experiment {
  public:
    explicit Experiment(ExperimentConfig config);

    const ExperimentConfig& config() const { return config_; }
    const CoupledNetwork& network();
    const RecoveryProfile& profile();
    const AsymptoticTable& table();
    CascadeConfig cascade_config() const;
    PredictionContext prediction_context();

    void run_generate(const std::filesystem::path& out_dir);
    void run_estimate(const std::filesystem::path& out_dir);
    void run_predict(const std::filesystem::path& out_dir);
    void run_optimize(const std::filesystem::path& out_dir);
    void run_evaluate(const std::filesystem::path& out_dir);
    void run_all(const std::filesystem::path& out_dir);

    // Best size-constrained regions per algorithm, as used by run_evaluate.
    struct SizedResult {
        int target_size;
        Region region;
        double fitness;
    };
    std::vector<SizedResult> optimize_per_size(OptimizerVariant variant);

  private:
    void write_manifest(const std::filesystem::path& out_dir,
                        const std::vector<std::string>& stages);

    ExperimentConfig config_;
    std::optional<CoupledNetwork> network_;
    std::optional<RecoveryProfile> profile_;
    std::optional<AsymptoticTable> table_;
};

// Reads regions_markov.csv and regions_fixed.csv from a bundle and writes
// model_comparison.csv with side-by-side rows keyed by the layer split.
void compare_models(const std::filesystem::path& bundle_dir);

}  // namespace cpsrisk
