#include "cpsrisk/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/evaluation.hpp"
#include "cpsrisk/rng.hpp"

namespace cpsrisk {

namespace {

using nlohmann::json;

std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5e", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename T>
void maybe(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::builtin(const std::string& name) {
    if (name == "ieee39-ba110") {
        ExperimentConfig cfg;  // defaults are the study configuration
        return cfg;
    }
    throw ConfigError("unknown built-in configuration `" + name + "`");
}

ExperimentConfig ExperimentConfig::load(const std::string& path_or_builtin) {
    if (path_or_builtin == "ieee39-ba110") return builtin(path_or_builtin);
    if (!std::filesystem::exists(path_or_builtin))
        throw ConfigError("configuration file not found: " + path_or_builtin);
    return from_json(read_file(path_or_builtin));
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["topology"]["physical"] = physical_source;
    j["topology"]["cyber"]["source"] = cyber_source;
    j["topology"]["cyber"]["nodes"] = cyber_nodes;
    j["topology"]["cyber"]["m0"] = ba_m0;
    j["topology"]["cyber"]["m"] = ba_m;
    j["params"] = {{"alpha", params.alpha}, {"delta", params.delta}, {"theta", params.theta},
                   {"beta", params.beta},   {"mu", params.mu},       {"rho_c", params.rho_c},
                   {"rho_p", params.rho_p}};
    j["coupling"]["control_fraction"] = control_fraction;
    j["cascade"] = {{"probabilistic", probabilistic_failures},
                    {"strict_control_coupling", strict_control_coupling},
                    {"backup_fraction", backup_fraction},
                    {"max_steps", max_steps}};
    j["profile"] = {{"source", profile_source},
                    {"estimation_runs", estimation_runs},
                    {"p0", parametric_p0},
                    {"lambda_p", parametric_lambda_p},
                    {"q0", parametric_q0},
                    {"lambda_q", parametric_lambda_q},
                    {"d0", parametric_d0},
                    {"lambda_d", parametric_lambda_d}};
    j["table"] = {{"x_max", table_x_max},
                  {"y_max", table_y_max},
                  {"reading", reading == RecursionReading::Verbatim ? "verbatim" : "corrected"}};
    j["fixed_model"] = {{"rate", fixed_rate}, {"absorption_factor", fixed_absorption}};
    j["prediction"]["max_region_size"] = max_region_size;
    j["optimizer"] = {{"pack_size", optimizer.pack_size},
                      {"max_iterations", optimizer.max_iterations},
                      {"omega", optimizer.omega},
                      {"eta", optimizer.eta},
                      {"stagnation_threshold", optimizer.stagnation_threshold},
                      {"convergence_patience", optimizer.convergence_patience}};
    j["fitness"] = {{"connectivity_weight", fitness.connectivity_weight},
                    {"load_loss_weight", fitness.load_loss_weight}};
    j["evaluation"] = {{"sizes", evaluation_sizes}, {"iterations", evaluation_iterations}};
    j["master_seed"] = master_seed;
    j["threads"] = threads;
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    ExperimentConfig cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (j.contains("topology")) {
        const json& t = j["topology"];
        maybe(t, "physical", cfg.physical_source);
        if (t.contains("cyber")) {
            const json& c = t["cyber"];
            maybe(c, "source", cfg.cyber_source);
            maybe(c, "nodes", cfg.cyber_nodes);
            maybe(c, "m0", cfg.ba_m0);
            maybe(c, "m", cfg.ba_m);
        }
    }
    if (j.contains("params")) {
        const json& p = j["params"];
        maybe(p, "alpha", cfg.params.alpha);
        maybe(p, "delta", cfg.params.delta);
        maybe(p, "theta", cfg.params.theta);
        maybe(p, "beta", cfg.params.beta);
        maybe(p, "mu", cfg.params.mu);
        maybe(p, "rho_c", cfg.params.rho_c);
        maybe(p, "rho_p", cfg.params.rho_p);
    }
    if (j.contains("coupling")) maybe(j["coupling"], "control_fraction", cfg.control_fraction);
    if (j.contains("cascade")) {
        const json& c = j["cascade"];
        maybe(c, "probabilistic", cfg.probabilistic_failures);
        maybe(c, "strict_control_coupling", cfg.strict_control_coupling);
        maybe(c, "backup_fraction", cfg.backup_fraction);
        maybe(c, "max_steps", cfg.max_steps);
    }
    if (j.contains("profile")) {
        const json& p = j["profile"];
        maybe(p, "source", cfg.profile_source);
        maybe(p, "estimation_runs", cfg.estimation_runs);
        maybe(p, "p0", cfg.parametric_p0);
        maybe(p, "lambda_p", cfg.parametric_lambda_p);
        maybe(p, "q0", cfg.parametric_q0);
        maybe(p, "lambda_q", cfg.parametric_lambda_q);
        maybe(p, "d0", cfg.parametric_d0);
        maybe(p, "lambda_d", cfg.parametric_lambda_d);
    }
    if (j.contains("table")) {
        const json& t = j["table"];
        maybe(t, "x_max", cfg.table_x_max);
        maybe(t, "y_max", cfg.table_y_max);
        if (t.contains("reading")) {
            const std::string r = t["reading"].get<std::string>();
            if (r == "verbatim")
                cfg.reading = RecursionReading::Verbatim;
            else if (r == "corrected")
                cfg.reading = RecursionReading::Corrected;
            else
                throw ConfigError("table.reading must be `verbatim` or `corrected`");
        }
    }
    if (j.contains("fixed_model")) {
        maybe(j["fixed_model"], "rate", cfg.fixed_rate);
        maybe(j["fixed_model"], "absorption_factor", cfg.fixed_absorption);
    }
    if (j.contains("prediction")) maybe(j["prediction"], "max_region_size", cfg.max_region_size);
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        maybe(o, "pack_size", cfg.optimizer.pack_size);
        maybe(o, "max_iterations", cfg.optimizer.max_iterations);
        maybe(o, "omega", cfg.optimizer.omega);
        maybe(o, "eta", cfg.optimizer.eta);
        maybe(o, "stagnation_threshold", cfg.optimizer.stagnation_threshold);
        maybe(o, "convergence_patience", cfg.optimizer.convergence_patience);
    }
    if (j.contains("fitness")) {
        maybe(j["fitness"], "connectivity_weight", cfg.fitness.connectivity_weight);
        maybe(j["fitness"], "load_loss_weight", cfg.fitness.load_loss_weight);
    }
    if (j.contains("evaluation")) {
        maybe(j["evaluation"], "sizes", cfg.evaluation_sizes);
        maybe(j["evaluation"], "iterations", cfg.evaluation_iterations);
    }
    maybe(j, "master_seed", cfg.master_seed);
    maybe(j, "threads", cfg.threads);
    return cfg;
}

std::uint64_t ExperimentConfig::config_hash() const {
    const std::string canonical = to_json();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {}

CascadeConfig Experiment::cascade_config() const {
    CascadeConfig c;
    c.failure_mode = config_.probabilistic_failures ? FailureMode::Probabilistic
                                                    : FailureMode::Deterministic;
    c.strict_control_coupling = config_.strict_control_coupling;
    c.backup_fraction = config_.backup_fraction;
    c.max_steps = config_.max_steps;
    return c;
}

const CoupledNetwork& Experiment::network() {
    if (network_) return *network_;
    try {
        Graph physical;
        std::vector<PhysicalRole> roles;
        if (config_.physical_source == "ieee39") {
            physical = ieee39_topology();
            roles = ieee39_roles();
        } else {
            if (!std::filesystem::exists(config_.physical_source))
                throw ConfigError("physical topology file not found: " + config_.physical_source);
            physical = load_physical_topology(read_file(config_.physical_source));
        }
        Graph cyber;
        if (config_.cyber_source == "ba") {
            cyber = generate_ba_cyber(config_.cyber_nodes, config_.ba_m0, config_.ba_m,
                                      derive_seed(config_.master_seed, 0x0BA));
        } else {
            if (!std::filesystem::exists(config_.cyber_source))
                throw ConfigError("cyber topology file not found: " + config_.cyber_source);
            cyber = parse_edge_list(read_file(config_.cyber_source));
        }
        CoupledNetwork net = make_network(std::move(physical), std::move(cyber), config_.params,
                                          std::move(roles));
        CouplingOptions copts;
        copts.control_fraction = config_.control_fraction;
        allocate_coupling(net, derive_seed(config_.master_seed, 0xC0), copts);
        network_ = std::move(net);
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError("generate", e.what());
    }
    return *network_;
}

PredictionContext Experiment::prediction_context() {
    PredictionContext ctx;
    ctx.strict_control_coupling = config_.strict_control_coupling;
    const auto dist = InitialFaultDistribution::uniform_cyber(network());
    ctx.initial_faults.reserve(dist.support.size());
    for (const auto& [id, w] : dist.support) ctx.initial_faults.push_back(id);
    return ctx;
}

const RecoveryProfile& Experiment::profile() {
    if (profile_) return *profile_;
    try {
        if (config_.profile_source == "estimate") {
            const CoupledNetwork& net = network();
            const CascadeEngine engine(net, cascade_config());
            const auto dist = InitialFaultDistribution::uniform_cyber(net);
            std::vector<CascadeTrace> traces;
            traces.reserve(static_cast<std::size_t>(config_.estimation_runs));
            for (long r = 0; r < config_.estimation_runs; ++r) {
                const std::uint64_t run_seed =
                    derive_seed(config_.master_seed, 0xE57, static_cast<std::uint64_t>(r));
                Rng pick(derive_seed(run_seed, 0x66));
                const NodeId fault = dist.sample(pick.next_double());
                traces.push_back(engine.simulate({fault}, run_seed));
            }
            profile_ = estimate_profile(traces);
        } else if (config_.profile_source == "parametric") {
            profile_ = RecoveryProfile::parametric(
                config_.parametric_p0, config_.parametric_lambda_p, config_.parametric_q0,
                config_.parametric_lambda_q, config_.parametric_d0, config_.parametric_lambda_d,
                config_.table_x_max, config_.table_y_max);
        } else {
            if (!std::filesystem::exists(config_.profile_source))
                throw ConfigError("profile file not found: " + config_.profile_source);
            profile_ = RecoveryProfile::parse(read_file(config_.profile_source));
        }
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError("estimate", e.what());
    }
    return *profile_;
}

const AsymptoticTable& Experiment::table() {
    if (table_) return *table_;
    try {
        table_ = asymptotic_probabilities(profile(), config_.table_x_max, config_.table_y_max,
                                          InitialCondition{0, 1}, config_.reading);
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError("predict", e.what());
    }
    return *table_;
}

void Experiment::run_generate(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const CoupledNetwork& net = network();
    std::ostringstream summary;
    summary << "physical_nodes " << net.physical_count() << "\n"
            << "physical_edges " << net.physical.edge_count() << "\n"
            << "cyber_nodes " << net.cyber_count() << "\n"
            << "cyber_edges " << net.cyber.edge_count() << "\n"
            << "coupling_branches " << net.coupling.branches.size() << "\n"
            << "params alpha " << format_sci(config_.params.alpha) << "\n"
            << "params delta " << format_sci(config_.params.delta) << "\n"
            << "params theta " << format_sci(config_.params.theta) << "\n"
            << "params beta " << format_sci(config_.params.beta) << "\n"
            << "params mu " << format_sci(config_.params.mu) << "\n"
            << "params rho_c " << format_sci(config_.params.rho_c) << "\n"
            << "params rho_p " << format_sci(config_.params.rho_p) << "\n";
    write_file(out_dir / "network_summary.txt", summary.str());
    write_file(out_dir / "coupling_map.txt", net.coupling.serialize());
    write_manifest(out_dir, {"generate"});
}

void Experiment::run_estimate(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "profile.txt", profile().serialize());
    // A few example histories for inspection.
    const CoupledNetwork& net = network();
    const CascadeEngine engine(net, cascade_config());
    const auto dist = InitialFaultDistribution::uniform_cyber(net);
    std::string sample;
    for (long r = 0; r < std::min<long>(5, config_.estimation_runs); ++r) {
        const std::uint64_t run_seed =
            derive_seed(config_.master_seed, 0xE57, static_cast<std::uint64_t>(r));
        Rng pick(derive_seed(run_seed, 0x66));
        const NodeId fault = dist.sample(pick.next_double());
        sample += engine.simulate({fault}, run_seed).to_jsonl();
    }
    write_file(out_dir / "trace_sample.jsonl", sample);
    write_manifest(out_dir, {"estimate"});
}

void Experiment::run_predict(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    try {
        const AsymptoticTable& tab = table();
        write_file(out_dir / "asymptotic_table.csv", tab.to_csv());

        std::ostringstream markov, fixed;
        markov << "total_size,cyber_count,physical_count,probability\n";
        fixed << "total_size,probability\n";
        for (int size = 1; size <= config_.max_region_size; ++size) {
            fixed << size << ','
                  << format_sci(
                         fixed_transfer_probability(size, config_.fixed_rate, config_.fixed_absorption))
                  << '\n';
            for (int y = std::max(1, size - config_.table_x_max);
                 y <= std::min(size, config_.table_y_max); ++y) {
                const int x = size - y;
                markov << size << ',' << y << ',' << x << ',' << format_sci(tab.x_at(x, y)) << '\n';
            }
        }
        write_file(out_dir / "regions_markov.csv", markov.str());
        write_file(out_dir / "regions_fixed.csv", fixed.str());
        compare_models(out_dir);
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError("predict", e.what());
    }
    write_manifest(out_dir, {"predict"});
}

void Experiment::run_optimize(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    try {
        const CoupledNetwork& net = network();
        const AsymptoticTable& tab = table();
        const PredictionContext ctx = prediction_context();
        RegionFitnessParams params = config_.fitness;
        params.max_size = config_.max_region_size;
        CascadeConfig eval_config = cascade_config();
        const FitnessFn fn = make_region_fitness(tab, net, ctx, eval_config, params);
        OptimizerConfig opt = config_.optimizer;
        opt.threads = 1;  // memoized fitness; parallel evaluation buys nothing here

        std::ostringstream best_rows;
        best_rows << "algo,fitness,region_size,cyber_count,physical_count,cyber_ids,physical_ids\n";
        for (const auto& [variant, name] :
             {std::pair{OptimizerVariant::Classic, "gwo"},
              std::pair{OptimizerVariant::CrossAdaptive, "cagwo"}}) {
            const OptimizeResult res = optimize(fn, net.total_count(), opt, variant,
                                                derive_seed(config_.master_seed, 0x0F7));
            write_file(out_dir / (std::string("convergence_") + name + ".csv"),
                       res.history.to_csv());
            const Region region = decode_region(res.best.position, net.cyber_count(),
                                                net.physical_count());
            best_rows << name << ',' << format_sci(res.best.fitness) << ',' << region.size() << ','
                      << region.cyber.size() << ',' << region.physical.size() << ',';
            for (std::size_t i = 0; i < region.cyber.size(); ++i)
                best_rows << (i ? ";" : "") << region.cyber[i];
            best_rows << ',';
            for (std::size_t i = 0; i < region.physical.size(); ++i)
                best_rows << (i ? ";" : "") << region.physical[i];
            best_rows << '\n';
        }
        write_file(out_dir / "best_regions.csv", best_rows.str());
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError("optimize", e.what());
    }
    write_manifest(out_dir, {"optimize"});
}

std::vector<Experiment::SizedResult> Experiment::optimize_per_size(OptimizerVariant variant) {
    const CoupledNetwork& net = network();
    const AsymptoticTable& tab = table();
    const PredictionContext ctx = prediction_context();
    const CascadeConfig eval_config = cascade_config();

    std::vector<SizedResult> results;
    for (int size : config_.evaluation_sizes) {
        RegionFitnessParams params = config_.fitness;
        params.min_size = size;
        params.max_size = size;
        const FitnessFn fn = make_region_fitness(tab, net, ctx, eval_config, params);
        OptimizerConfig opt = config_.optimizer;
        opt.max_iterations = config_.evaluation_iterations;
        opt.convergence_patience = config_.evaluation_iterations;
        opt.threads = 1;
        const OptimizeResult res =
            optimize(fn, net.total_count(), opt, variant,
                     derive_seed(config_.master_seed, 0x51ED, static_cast<std::uint64_t>(size)));
        results.push_back({size,
                           decode_region(res.best.position, net.cyber_count(), net.physical_count()),
                           res.best.fitness});
    }
    return results;
}

void Experiment::run_evaluate(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    try {
        const CoupledNetwork& net = network();
        const CascadeConfig eval_config = cascade_config();
        for (const auto& [variant, name] :
             {std::pair{OptimizerVariant::Classic, "gwo"},
              std::pair{OptimizerVariant::CrossAdaptive, "cagwo"}}) {
            std::ostringstream rows;
            rows << "region_size,cyber_count,physical_count,r_max,eta\n";
            for (const SizedResult& r : optimize_per_size(variant)) {
                const ResidualReport report = evaluate_removal(net, r.region, eval_config);
                rows << report.csv_row();
            }
            write_file(out_dir / (std::string("residual_metrics_") + name + ".csv"), rows.str());
        }
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError("evaluate", e.what());
    }
    write_manifest(out_dir, {"evaluate"});
}

void Experiment::run_all(const std::filesystem::path& out_dir) {
    run_generate(out_dir);
    run_estimate(out_dir);
    run_predict(out_dir);
    run_optimize(out_dir);
    run_evaluate(out_dir);
    write_manifest(out_dir, {"generate", "estimate", "predict", "optimize", "evaluate"});
}

void Experiment::write_manifest(const std::filesystem::path& out_dir,
                                const std::vector<std::string>& stages) {
    json manifest;
    manifest["version"] = kVersion;
    manifest["master_seed"] = config_.master_seed;
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_.config_hash()));
    manifest["config_hash"] = hash;
    manifest["config"] = json::parse(config_.to_json());

    // Stages accumulate across invocations on the same bundle.
    const auto path = out_dir / "manifest.json";
    std::vector<std::string> all_stages;
    if (std::filesystem::exists(path)) {
        try {
            json previous = json::parse(read_file(path));
            if (previous.contains("stages"))
                all_stages = previous["stages"].get<std::vector<std::string>>();
        } catch (...) {
            // Unreadable manifest: rewrite from scratch.
        }
    }
    for (const std::string& s : stages)
        if (std::find(all_stages.begin(), all_stages.end(), s) == all_stages.end())
            all_stages.push_back(s);
    manifest["stages"] = all_stages;
    write_file(path, manifest.dump(2) + "\n");
}

void compare_models(const std::filesystem::path& bundle_dir) {
    const std::string markov = read_file(bundle_dir / "regions_markov.csv");
    const std::string fixed = read_file(bundle_dir / "regions_fixed.csv");

    std::map<int, std::string> fixed_by_size;
    std::istringstream fin(fixed);
    std::string line;
    std::getline(fin, line);  // header
    while (std::getline(fin, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        fixed_by_size[std::stoi(line.substr(0, comma))] = line.substr(comma + 1);
    }

    std::ostringstream out;
    out << "total_size,cyber_count,physical_count,dependent_markov,fixed_transfer\n";
    std::istringstream min(markov);
    std::getline(min, line);  // header
    while (std::getline(min, line)) {
        if (line.empty()) continue;
        const int size = std::stoi(line.substr(0, line.find(',')));
        out << line << ',' << fixed_by_size[size] << '\n';
    }
    write_file(bundle_dir / "model_comparison.csv", out.str());
}

}  // namespace cpsrisk
