// Experiment runner for the coupled-network risk toolkit. Builds the study
// system, estimates a recovery profile from simulated cascades, predicts
// risk-region probabilities with the dependent-chain and size-only models,
// searches for high-risk regions with GWO/CAGWO, and scores the predictions
// with residual-network metrics.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cpsrisk/experiment.hpp"

namespace {

struct CommonOptions {
    std::string config = "ieee39-ba110";
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "configuration file or built-in name")
        ->capture_default_str();
    cmd->add_option("--out", opts.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", opts.seed, "master seed override")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--threads", opts.threads, "worker thread cap");
}

cpsrisk::Experiment make_experiment(const CommonOptions& opts) {
    cpsrisk::ExperimentConfig cfg = cpsrisk::ExperimentConfig::load(opts.config);
    if (opts.seed_set) cfg.master_seed = opts.seed;
    if (opts.threads > 0) cfg.threads = opts.threads;
    return cpsrisk::Experiment(std::move(cfg));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled cyber-physical cascading-failure risk prediction toolkit"};
    app.require_subcommand(1);

    CommonOptions opts;
    CLI::App* generate = app.add_subcommand("generate", "build the coupled network and coupling map");
    CLI::App* estimate = app.add_subcommand("estimate", "estimate the recovery profile from cascades");
    CLI::App* predict = app.add_subcommand("predict", "region probabilities for both models");
    CLI::App* optimize = app.add_subcommand("optimize", "search for the highest-risk regions");
    CLI::App* evaluate = app.add_subcommand("evaluate", "residual-network metrics per region size");
    CLI::App* all = app.add_subcommand("all", "run every stage into one bundle");
    for (CLI::App* cmd : {generate, estimate, predict, optimize, evaluate, all})
        add_common(cmd, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        cpsrisk::Experiment experiment = make_experiment(opts);
        const std::filesystem::path out_dir = opts.out;
        if (generate->parsed()) experiment.run_generate(out_dir);
        if (estimate->parsed()) experiment.run_estimate(out_dir);
        if (predict->parsed()) experiment.run_predict(out_dir);
        if (optimize->parsed()) experiment.run_optimize(out_dir);
        if (evaluate->parsed()) experiment.run_evaluate(out_dir);
        if (all->parsed()) experiment.run_all(out_dir);
    } catch (const cpsrisk::ExperimentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
