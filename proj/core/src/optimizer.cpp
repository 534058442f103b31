#include "cpsrisk/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/evaluation.hpp"

namespace cpsrisk {

namespace {

constexpr double kReciprocalShiftEpsilon = 1e-12;

void clamp_unit(std::vector<double>& v) {
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
}

std::array<int, 3> find_leaders(const std::vector<Wolf>& wolves) {
    std::array<int, 3> leaders{0, 0, 0};
    std::vector<int> order(wolves.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + std::min<std::size_t>(3, order.size()),
                      order.end(), [&](int a, int b) {
                          if (wolves[a].fitness != wolves[b].fitness)
                              return wolves[a].fitness > wolves[b].fitness;
                          return a < b;
                      });
    for (int k = 0; k < 3; ++k)
        leaders[k] = order[std::min<std::size_t>(k, order.size() - 1)];
    return leaders;
}

// Encircling candidate toward one leader with the canonical random
// coefficients, drawn per coordinate from the wolf's stream.
std::vector<double> leader_candidate(std::span<const double> leader, std::span<const double> pos,
                                     double a, Rng& rng) {
    std::vector<double> out(pos.size());
    for (std::size_t k = 0; k < pos.size(); ++k) {
        const double r1 = rng.next_double();
        const double r2 = rng.next_double();
        const double A = 2.0 * a * r1 - a;
        const double C = 2.0 * r2;
        const double D = std::abs(C * leader[k] - pos[k]);
        out[k] = leader[k] - A * D;
    }
    return out;
}

struct Reciprocals {
    std::vector<double> per_wolf;
    double average;  // reciprocal of the mean fitness
};

// Fitness reciprocals with a positivity shift when any fitness is
// non-positive.
Reciprocals fitness_reciprocals(const std::vector<Wolf>& wolves) {
    double min_f = wolves.front().fitness, sum = 0.0;
    for (const Wolf& w : wolves) {
        min_f = std::min(min_f, w.fitness);
        sum += w.fitness;
    }
    const double shift = min_f <= 0.0 ? -min_f + kReciprocalShiftEpsilon : 0.0;
    Reciprocals r;
    r.per_wolf.reserve(wolves.size());
    for (const Wolf& w : wolves) r.per_wolf.push_back(1.0 / (w.fitness + shift));
    const double mean = sum / static_cast<double>(wolves.size());
    r.average = 1.0 / (mean + shift);
    return r;
}

void evaluate_pack(PackState& pack, const FitnessFn& fitness, const OptimizerConfig& config,
                   std::uint64_t master_seed, int iteration, int* reinit_events) {
    const int n = static_cast<int>(pack.wolves.size());
    auto eval_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            Wolf& w = pack.wolves[i];
            w.fitness = fitness(w.position);
        }
    };
    const int workers = std::clamp(config.threads, 1, n);
    if (workers == 1) {
        eval_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(eval_range, w * chunk, std::min(n, (w + 1) * chunk));
        for (auto& t : pool) t.join();
    }
    for (int i = 0; i < n; ++i) {
        Wolf& w = pack.wolves[i];
        if (!std::isfinite(w.fitness)) {
            Rng rng(derive_seed(master_seed, 0xDEAD, static_cast<std::uint64_t>(iteration) * n + i));
            for (double& x : w.position) x = rng.next_double();
            w.fitness = fitness(w.position);
            if (!std::isfinite(w.fitness)) w.fitness = -1e300;
            if (reinit_events) ++(*reinit_events);
        }
    }
}

double control_coefficient(int t, const OptimizerConfig& config) {
    const double progress = 1.0 - static_cast<double>(t) / config.max_iterations;
    return (config.omega / 4.0) * std::pow(std::max(progress, 0.0), config.eta / 2.0);
}

}  // namespace

std::vector<double> adaptive_position_update(std::span<const double> w1,
                                             std::span<const double> w2,
                                             std::span<const double> w3, double k_i, double k_j,
                                             double k_z, double k_n, double k_avg) {
    const std::size_t dim = w1.size();
    std::vector<double> out(dim);
    const double weight_sum = k_i + k_j + k_z;
    if (k_n >= k_avg && weight_sum > 0.0) {
        for (std::size_t k = 0; k < dim; ++k)
            out[k] = (k_i * w1[k] + k_j * w2[k] + k_z * w3[k]) / weight_sum;
    } else {
        for (std::size_t k = 0; k < dim; ++k) out[k] = (w1[k] + w2[k] + w3[k]) / 3.0;
    }
    return out;
}

std::vector<double> cross_optimal_apply(std::span<const double> wolf,
                                        std::span<const double> best, double gamma, double beta) {
    std::vector<double> out(wolf.size());
    for (std::size_t k = 0; k < wolf.size(); ++k) {
        out[k] = best[k] + std::abs(gamma * best[k] - wolf[k]) * beta;
        out[k] = std::clamp(out[k], 0.0, 1.0);
    }
    return out;
}

std::vector<double> cross_optimal_update(std::span<const double> wolf,
                                         std::span<const double> best, Rng& rng) {
    const double gamma = 1.0 + rng.next_double();
    const double beta = rng.next_double();
    return cross_optimal_apply(wolf, best, gamma, beta);
}

void classic_gwo_step(PackState& pack, const FitnessFn& fitness, int t,
                      const OptimizerConfig& config, std::uint64_t master_seed) {
    const double a = control_coefficient(t, config);
    pack.leaders = find_leaders(pack.wolves);
    const std::vector<double> lead1 = pack.wolves[pack.leaders[0]].position;
    const std::vector<double> lead2 = pack.wolves[pack.leaders[1]].position;
    const std::vector<double> lead3 = pack.wolves[pack.leaders[2]].position;
    for (std::size_t i = 0; i < pack.wolves.size(); ++i) {
        Wolf& w = pack.wolves[i];
        Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(t) + 1, i));
        const auto c1 = leader_candidate(lead1, w.position, a, rng);
        const auto c2 = leader_candidate(lead2, w.position, a, rng);
        const auto c3 = leader_candidate(lead3, w.position, a, rng);
        std::vector<double> pos(w.position.size());
        for (std::size_t k = 0; k < pos.size(); ++k) pos[k] = (c1[k] + c2[k] + c3[k]) / 3.0;
        clamp_unit(pos);
        w.position = std::move(pos);
    }
    evaluate_pack(pack, fitness, config, master_seed, t + 1, nullptr);
    pack.leaders = find_leaders(pack.wolves);
    ++pack.iteration;
}

OptimizeResult optimize(const FitnessFn& fitness, int dimension, const OptimizerConfig& config,
                        OptimizerVariant variant, std::uint64_t rng_seed) {
    if (config.pack_size < 4) throw ConfigError("pack size must be at least 4");
    if (config.max_iterations < 1) throw ConfigError("max iterations must be at least 1");
    if (dimension < 1) throw ConfigError("dimension must be at least 1");

    OptimizeResult result;
    PackState pack;
    pack.wolves.resize(static_cast<std::size_t>(config.pack_size));
    for (std::size_t i = 0; i < pack.wolves.size(); ++i) {
        Wolf& w = pack.wolves[i];
        w.position.resize(static_cast<std::size_t>(dimension));
        Rng rng(derive_seed(rng_seed, 0xFFFF, i));
        for (double& x : w.position) x = rng.next_double();
    }
    evaluate_pack(pack, fitness, config, rng_seed, 0, &result.reinit_events);
    for (Wolf& w : pack.wolves) w.personal_best = w.fitness;

    Wolf best = *std::max_element(pack.wolves.begin(), pack.wolves.end(),
                                  [](const Wolf& a, const Wolf& b) { return a.fitness < b.fitness; });
    int since_improvement = 0;

    auto record = [&](const PackState& p) {
        double mean = 0.0;
        for (const Wolf& w : p.wolves) mean += w.fitness;
        mean /= static_cast<double>(p.wolves.size());
        result.history.best_fitness.push_back(best.fitness);
        result.history.mean_fitness.push_back(mean);
    };
    record(pack);

    for (int t = 0; t < config.max_iterations; ++t) {
        pack.leaders = find_leaders(pack.wolves);
        const std::vector<double> lead1 = pack.wolves[pack.leaders[0]].position;
        const std::vector<double> lead2 = pack.wolves[pack.leaders[1]].position;
        const std::vector<double> lead3 = pack.wolves[pack.leaders[2]].position;
        const double a = control_coefficient(t, config);

        Reciprocals recip;
        if (variant == OptimizerVariant::CrossAdaptive && config.adaptive_position)
            recip = fitness_reciprocals(pack.wolves);

        for (std::size_t i = 0; i < pack.wolves.size(); ++i) {
            Wolf& w = pack.wolves[i];
            Rng rng(derive_seed(rng_seed, static_cast<std::uint64_t>(t) + 1, i));
            const auto c1 = leader_candidate(lead1, w.position, a, rng);
            const auto c2 = leader_candidate(lead2, w.position, a, rng);
            const auto c3 = leader_candidate(lead3, w.position, a, rng);
            std::vector<double> pos;
            if (variant == OptimizerVariant::CrossAdaptive && config.adaptive_position) {
                pos = adaptive_position_update(c1, c2, c3, recip.per_wolf[pack.leaders[0]],
                                               recip.per_wolf[pack.leaders[1]],
                                               recip.per_wolf[pack.leaders[2]], recip.per_wolf[i],
                                               recip.average);
            } else {
                pos.resize(w.position.size());
                for (std::size_t k = 0; k < pos.size(); ++k)
                    pos[k] = (c1[k] + c2[k] + c3[k]) / 3.0;
            }
            clamp_unit(pos);
            if (variant == OptimizerVariant::CrossAdaptive && config.cross_optimal &&
                w.stagnation >= config.stagnation_threshold) {
                pos = cross_optimal_update(pos, best.position, rng);
                w.stagnation = 0;
            }
            w.position = std::move(pos);
        }

        evaluate_pack(pack, fitness, config, rng_seed, t + 1, &result.reinit_events);
        ++pack.iteration;
        ++result.iterations_run;

        bool improved = false;
        for (Wolf& w : pack.wolves) {
            if (w.fitness > w.personal_best) {
                w.personal_best = w.fitness;
                w.stagnation = 0;
            } else {
                ++w.stagnation;
            }
            if (w.fitness > best.fitness) {
                best = w;
                improved = true;
            }
        }
        record(pack);
        since_improvement = improved ? 0 : since_improvement + 1;
        if (since_improvement >= config.convergence_patience) break;
    }
    result.best = best;
    return result;
}

std::string ConvergenceHistory::to_csv() const {
    std::ostringstream out;
    out << "iteration,best_fitness,mean_fitness\n";
    char buf[96];
    for (std::size_t i = 0; i < best_fitness.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.5e,%.5e\n", i, best_fitness[i], mean_fitness[i]);
        out << buf;
    }
    return out.str();
}

std::vector<double> encode_region(const Region& region, int cyber_count, int physical_count) {
    std::vector<double> pos(static_cast<std::size_t>(cyber_count + physical_count), 0.0);
    for (int j : region.cyber) pos[static_cast<std::size_t>(j)] = 1.0;
    for (int h : region.physical) pos[static_cast<std::size_t>(cyber_count + h)] = 1.0;
    return pos;
}

Region decode_region(std::span<const double> position, int cyber_count, int physical_count) {
    if (static_cast<int>(position.size()) != cyber_count + physical_count)
        throw ConfigError("position length does not match node count");
    Region r;
    for (int j = 0; j < cyber_count; ++j)
        if (position[static_cast<std::size_t>(j)] > 0.5) r.cyber.push_back(j);
    for (int h = 0; h < physical_count; ++h)
        if (position[static_cast<std::size_t>(cyber_count + h)] > 0.5) r.physical.push_back(h);
    return r;
}

double region_fitness(const Region& region, const AsymptoticTable& table,
                      const CoupledNetwork& net, const PredictionContext& ctx,
                      const CascadeConfig& eval_config, const RegionFitnessParams& params) {
    const int size = region.size();
    if (size == 0 || size < params.min_size || size > params.max_size) return 0.0;
    const double probability = region_probability(region, table, net, ctx);
    if (probability <= 0.0) return 0.0;
    const ResidualReport report = evaluate_removal(net, region, eval_config);
    const double impact =
        params.connectivity_weight * (1.0 - report.r_max) + params.load_loss_weight * report.eta;
    return probability * impact;
}

FitnessFn make_region_fitness(const AsymptoticTable& table, const CoupledNetwork& net,
                              const PredictionContext& ctx, const CascadeConfig& eval_config,
                              const RegionFitnessParams& params) {
    struct Cache {
        std::mutex mutex;
        std::map<Region, double> values;
    };
    auto cache = std::make_shared<Cache>();
    const int nc = net.cyber_count();
    const int np = net.physical_count();
    return [=, &table, &net](std::span<const double> position) {
        Region region = decode_region(position, nc, np);
        {
            std::lock_guard<std::mutex> lock(cache->mutex);
            auto it = cache->values.find(region);
            if (it != cache->values.end()) return it->second;
        }
        const double value = region_fitness(region, table, net, ctx, eval_config, params);
        std::lock_guard<std::mutex> lock(cache->mutex);
        cache->values[region] = value;
        return value;
    };
}

}  // namespace cpsrisk
