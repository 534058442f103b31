#include "cpsrisk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/rng.hpp"

namespace cpsrisk {

double RegionFrequencyTable::standard_error(const Region& region) const {
    if (runs <= 0) return 0.0;
    auto it = probability.find(region);
    const double f = it == probability.end() ? 0.0 : it->second;
    return std::sqrt(f * (1.0 - f) / static_cast<double>(runs));
}

std::string RegionFrequencyTable::to_csv() const {
    std::ostringstream out;
    out << "cyber_ids,physical_ids,probability,stderr\n";
    char buf[64];
    for (const auto& [region, prob] : probability) {
        bool first = true;
        for (int j : region.cyber) {
            if (!first) out << ';';
            out << j;
            first = false;
        }
        out << ',';
        first = true;
        for (int h : region.physical) {
            if (!first) out << ';';
            out << h;
            first = false;
        }
        std::snprintf(buf, sizeof(buf), ",%.5e,%.5e\n", prob, standard_error(region));
        out << buf;
    }
    return out.str();
}

InitialFaultDistribution InitialFaultDistribution::uniform_cyber(const CoupledNetwork& net) {
    InitialFaultDistribution dist;
    const int nc = net.cyber_count();
    if (nc == 0) throw ConfigError("no cyber nodes to draw the initial fault from");
    dist.support.reserve(nc);
    for (int j = 0; j < nc; ++j)
        dist.support.push_back({{Layer::Cyber, j}, 1.0 / nc});
    return dist;
}

InitialFaultDistribution InitialFaultDistribution::point(NodeId fault) {
    InitialFaultDistribution dist;
    dist.support.push_back({fault, 1.0});
    return dist;
}

NodeId InitialFaultDistribution::sample(double u) const {
    double acc = 0.0;
    for (const auto& [id, w] : support) {
        acc += w;
        if (u < acc) return id;
    }
    return support.back().first;
}

namespace {

Region terminal_region(const SystemState& state) {
    Region r;
    for (std::size_t j = 0; j < state.cyber_alive.size(); ++j)
        if (!state.cyber_alive[j]) r.cyber.push_back(static_cast<int>(j));
    for (std::size_t h = 0; h < state.physical_alive.size(); ++h)
        if (!state.physical_alive[h]) r.physical.push_back(static_cast<int>(h));
    return r;
}

}  // namespace

RegionFrequencyTable monte_carlo_regions(const CoupledNetwork& net,
                                         const InitialFaultDistribution& faults, long runs,
                                         std::uint64_t seed, const CascadeConfig& config,
                                         int threads) {
    if (runs < 1) throw ConfigError("monte carlo needs at least one run");
    if (threads < 1) threads = 1;
    CascadeEngine engine(net, config);

    struct Chunk {
        std::map<Region, long> counts;
        long truncated = 0;
    };
    const int workers = static_cast<int>(std::min<long>(threads, runs));
    std::vector<Chunk> chunks(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            Chunk& chunk = chunks[w];
            for (long r = w; r < runs; r += workers) {
                const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
                Rng pick(derive_seed(run_seed, 0x66));
                const NodeId fault = faults.sample(pick.next_double());
                CascadeTrace trace = engine.simulate({fault}, run_seed);
                if (trace.truncated) {
                    ++chunk.truncated;
                } else {
                    ++chunk.counts[terminal_region(trace.terminal())];
                }
            }
        });
    }
    for (auto& t : pool) t.join();

    RegionFrequencyTable table;
    table.runs = runs;
    std::map<Region, long> merged;
    long truncated = 0;
    for (const Chunk& chunk : chunks) {
        truncated += chunk.truncated;
        for (const auto& [region, count] : chunk.counts) merged[region] += count;
    }
    for (const auto& [region, count] : merged)
        table.probability[region] = static_cast<double>(count) / static_cast<double>(runs);
    table.residual = static_cast<double>(truncated) / static_cast<double>(runs);
    return table;
}

RegionFrequencyTable exhaustive_regions(const CoupledNetwork& net,
                                        const std::vector<NodeId>& initial_fault,
                                        const CascadeConfig& config, int node_cap) {
    if (net.total_count() > node_cap)
        throw SizeBoundError("exhaustive enumeration capped at " + std::to_string(node_cap) +
                             " nodes, instance has " + std::to_string(net.total_count()));
    CascadeEngine engine(net, config);
    const int limit = engine.max_steps();

    RegionFrequencyTable table;
    table.runs = 0;

    struct Node {
        SystemState state;
        double probability;
    };
    std::vector<Node> stack;
    stack.push_back({engine.initial_state(initial_fault), 1.0});

    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.state.transition == 0) {
            table.probability[terminal_region(node.state)] += node.probability;
            continue;
        }
        if (node.state.step >= limit) {
            table.residual += node.probability;
            continue;
        }
        const auto vlist = engine.violators(node.state);
        if (vlist.size() > 20)
            throw SizeBoundError("branch factor too large for exhaustive enumeration");
        const std::uint64_t mask_count = std::uint64_t{1} << vlist.size();
        for (std::uint64_t mask = 0; mask < mask_count; ++mask) {
            double branch_probability = node.probability;
            for (std::size_t i = 0; i < vlist.size(); ++i) {
                const double pf = vlist[i].fail_probability;
                branch_probability *= ((mask >> i) & 1ULL) ? pf : (1.0 - pf);
            }
            if (branch_probability == 0.0) continue;
            SystemState child = node.state;
            engine.apply_step(child, vlist, mask);
            stack.push_back({std::move(child), branch_probability});
        }
    }
    return table;
}

}  // namespace cpsrisk
