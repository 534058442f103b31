#include "cpsrisk/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/rng.hpp"

namespace cpsrisk {

int max_support(double load, double beta, double mu) {
    if (load < 0.0) throw ConfigError("support capacity needs a non-negative load");
    return static_cast<int>(std::floor(beta * std::pow(load, mu)));
}

double mean_max_support(const std::vector<double>& degree_probabilities,
                        const std::vector<int>& capacities) {
    if (degree_probabilities.size() != capacities.size())
        throw ConfigError("degree distribution and capacity table sizes differ");
    double sum = 0.0;
    for (double p : degree_probabilities) sum += p;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("degree distribution does not sum to 1");
    double mean = 0.0;
    for (std::size_t i = 0; i < capacities.size(); ++i)
        mean += degree_probabilities[i] * capacities[i];
    return mean;
}

double allocation_probability(double degree_probability, double load, int physical_size,
                              double mean_capacity) {
    if (mean_capacity <= 0.0)
        throw AllocationError("mean support capacity is zero; no bin can take a ball");
    double p = degree_probability * load / (physical_size * mean_capacity);
    return std::clamp(p, 0.0, 1.0);
}

SupportCapacity compute_support_capacity(const CoupledNetwork& net) {
    SupportCapacity cap;
    const int np = net.physical_count();
    cap.per_node.resize(np);
    // Degree distribution over the physical layer.
    std::map<int, int> degree_counts;
    for (int h = 0; h < np; ++h) ++degree_counts[net.physical.degree(h)];
    double mean = 0.0;
    for (int h = 0; h < np; ++h) {
        cap.per_node[h] =
            max_support(net.physical_nodes[h].initial_load, net.params.beta, net.params.mu);
    }
    for (const auto& [degree, count] : degree_counts) {
        const double pd = static_cast<double>(count) / np;
        // Capacity is a function of degree alone, so any representative works.
        const double load = physical_node_load(degree, net.params.beta, net.params.mu);
        mean += pd * max_support(load, net.params.beta, net.params.mu);
    }
    cap.mean = mean;
    return cap;
}

namespace {

// Hop distances from every physical node to each cyber node through the
// combined power-branch + cyber-edge graph (physical edges do not count).
std::vector<int> nearest_cyber_with_role(const CoupledNetwork& net,
                                         const std::vector<int>& supplier, CyberRole role) {
    const int np = net.physical_count();
    const int nc = net.cyber_count();
    // Adjacency of the search graph: physical node h <-> cyber nodes it supplies,
    // cyber-cyber edges as in the cyber layer.
    std::vector<std::vector<int>> supplied(np);
    for (int j = 0; j < nc; ++j)
        if (supplier[j] >= 0) supplied[supplier[j]].push_back(j);

    std::vector<int> result(np, -1);
    std::vector<int> dist(nc);
    for (int h = 0; h < np; ++h) {
        std::fill(dist.begin(), dist.end(), -1);
        std::queue<int> frontier;
        for (int j : supplied[h]) {
            if (dist[j] < 0) {
                dist[j] = 1;
                frontier.push(j);
            }
        }
        int best = -1, best_dist = -1;
        while (!frontier.empty()) {
            int j = frontier.front();
            frontier.pop();
            if (net.cyber_nodes[j].role == role) {
                if (best_dist < 0 || dist[j] < best_dist ||
                    (dist[j] == best_dist && j < best)) {
                    best = j;
                    best_dist = dist[j];
                }
                // Later hops cannot beat this distance once the queue passes it,
                // but equal-distance lower indices may still appear.
            }
            if (best_dist >= 0 && dist[j] > best_dist) break;
            for (int u : net.cyber.neighbors(j)) {
                if (dist[u] < 0) {
                    dist[u] = dist[j] + 1;
                    frontier.push(u);
                }
            }
        }
        if (best < 0) {
            // Unreachable: fall back to the lowest-index node of the role.
            for (int j = 0; j < nc; ++j)
                if (net.cyber_nodes[j].role == role) {
                    best = j;
                    break;
                }
        }
        result[h] = best;
    }
    return result;
}

}  // namespace

CouplingMap allocate_coupling(CoupledNetwork& net, std::uint64_t rng_seed,
                              const CouplingOptions& options) {
    const int np = net.physical_count();
    const int nc = net.cyber_count();
    const SupportCapacity cap = compute_support_capacity(net);

    long total_capacity = 0;
    for (int c : cap.per_node) total_capacity += c;
    if (total_capacity < nc)
        throw AllocationError("total support capacity " + std::to_string(total_capacity) +
                              " cannot host " + std::to_string(nc) + " cyber nodes");

    // Degree distribution for the per-bin weights.
    std::map<int, int> degree_counts;
    for (int h = 0; h < np; ++h) ++degree_counts[net.physical.degree(h)];
    std::vector<double> weight(np);
    for (int h = 0; h < np; ++h) {
        const double pd =
            static_cast<double>(degree_counts[net.physical.degree(h)]) / np;
        weight[h] = allocation_probability(pd, net.physical_nodes[h].initial_load, np, cap.mean);
    }

    CouplingMap map;
    map.supplier.assign(nc, -1);
    map.controller.assign(np, -1);
    map.monitor.assign(np, -1);

    Rng rng(rng_seed);
    std::vector<int> occupancy(np, 0);
    for (int j = 0; j < nc; ++j) {
        double available = 0.0;
        for (int h = 0; h < np; ++h)
            if (occupancy[h] < cap.per_node[h]) available += weight[h];
        if (available <= 0.0)
            throw AllocationError("no bin with remaining capacity has positive weight");
        double u = rng.next_double() * available;
        int chosen = -1;
        for (int h = 0; h < np; ++h) {
            if (occupancy[h] >= cap.per_node[h]) continue;
            u -= weight[h];
            chosen = h;
            if (u <= 0.0) break;
        }
        map.supplier[j] = chosen;
        ++occupancy[chosen];
        map.branches.push_back({j, chosen, CouplingBranch::Kind::Power});
    }

    assign_cyber_roles(net, options.control_fraction);
    map.controller = nearest_cyber_with_role(net, map.supplier, CyberRole::Control);
    map.monitor = nearest_cyber_with_role(net, map.supplier, CyberRole::Monitor);
    for (int h = 0; h < np; ++h) {
        if (map.controller[h] >= 0)
            map.branches.push_back({map.controller[h], h, CouplingBranch::Kind::Control});
        if (map.monitor[h] >= 0)
            map.branches.push_back({map.monitor[h], h, CouplingBranch::Kind::Monitor});
    }
    net.coupling = map;
    return map;
}

std::vector<double> ball_count_pmf_for_class(int ball_count, double p, int degree_truncation) {
    if (ball_count < 0 || degree_truncation < 0)
        throw ConfigError("ball count and truncation must be non-negative");
    p = std::clamp(p, 0.0, 1.0);
    const int t_max = std::min(ball_count, degree_truncation);
    std::vector<double> pmf(static_cast<std::size_t>(t_max) + 1, 0.0);
    if (p == 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p == 1.0) {
        pmf[t_max] = 1.0;
        return pmf;
    }
    double norm = 0.0;
    for (int t = 0; t <= t_max; ++t) {
        const double log_choose = std::lgamma(ball_count + 1.0) - std::lgamma(t + 1.0) -
                                  std::lgamma(ball_count - t + 1.0);
        pmf[t] = std::exp(log_choose + t * std::log(p) + (ball_count - t) * std::log1p(-p));
        norm += pmf[t];
    }
    for (double& v : pmf) v /= norm;
    return pmf;
}

std::vector<double> ball_count_pmf(const CoupledNetwork& net) {
    const int np = net.physical_count();
    const int nc = net.cyber_count();
    const SupportCapacity cap = compute_support_capacity(net);
    std::map<int, int> degree_counts;
    for (int h = 0; h < np; ++h) ++degree_counts[net.physical.degree(h)];

    std::vector<double> mixture;
    for (const auto& [degree, count] : degree_counts) {
        const double pd = static_cast<double>(count) / np;
        const double load = physical_node_load(degree, net.params.beta, net.params.mu);
        const double p = allocation_probability(pd, load, np, cap.mean);
        const auto pmf = ball_count_pmf_for_class(nc, p, degree);
        if (pmf.size() > mixture.size()) mixture.resize(pmf.size(), 0.0);
        for (std::size_t t = 0; t < pmf.size(); ++t) mixture[t] += pd * pmf[t];
    }
    return mixture;
}

}  // namespace cpsrisk
