#include <benchmark/benchmark.h>

#include "cpsrisk/cascade.hpp"
#include "cpsrisk/coupling.hpp"
#include "cpsrisk/markov_model.hpp"
#include "cpsrisk/network_model.hpp"
#include "cpsrisk/optimizer.hpp"

namespace {

cpsrisk::CoupledNetwork study_network() {
    using namespace cpsrisk;
    Graph physical = ieee39_topology();
    Graph cyber = generate_ba_cyber(110, 3, 2, 42);
    CoupledNetwork net =
        make_network(std::move(physical), std::move(cyber), LayerParams{}, ieee39_roles());
    allocate_coupling(net, 7);
    return net;
}

void BM_ScaleFreeGeneration(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto g = cpsrisk::generate_ba_cyber(110, 3, 2, seed++);
        benchmark::DoNotOptimize(g);
    }
}
BENCHMARK(BM_ScaleFreeGeneration);

void BM_CascadeStudyScale(benchmark::State& state) {
    using namespace cpsrisk;
    const CoupledNetwork net = study_network();
    CascadeConfig config;
    config.failure_mode = FailureMode::Probabilistic;
    config.strict_control_coupling = true;
    config.backup_fraction = 0.3;
    const CascadeEngine engine(net, config);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto trace = engine.simulate({{Layer::Cyber, static_cast<int>(seed % 110)}}, seed);
        benchmark::DoNotOptimize(trace);
        ++seed;
    }
}
BENCHMARK(BM_CascadeStudyScale);

void BM_AsymptoticTable(benchmark::State& state) {
    using namespace cpsrisk;
    const auto profile = RecoveryProfile::parametric(0.8, 0.1, 0.8, 0.1, 1.0, 0.05, 50, 50);
    for (auto _ : state) {
        auto table = asymptotic_probabilities(profile, 50, 50, {0, 1},
                                              RecursionReading::Corrected);
        benchmark::DoNotOptimize(table);
    }
}
BENCHMARK(BM_AsymptoticTable);

void BM_OptimizerSphere(benchmark::State& state) {
    using namespace cpsrisk;
    const auto fitness = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) {
            const double z = (v - 0.5) * 200.0;
            s += z * z;
        }
        return -s;
    };
    OptimizerConfig config;
    config.max_iterations = static_cast<int>(state.range(0));
    config.convergence_patience = config.max_iterations;
    for (auto _ : state) {
        auto result = optimize(fitness, 30, config, OptimizerVariant::CrossAdaptive, 1);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_OptimizerSphere)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
