#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/oracle.hpp"
#include "support/toys.hpp"

using namespace cpsrisk;

namespace {

// Coin probability of the chain frontier at depth k: the surviving neighbor
// carries (k+1) load units against a (1+rho) bound.
double frontier_fail_probability(int k, double rho) {
    const double ratio = (k + 1.0) / (1.0 + rho) - 1.0;
    return 1.0 - std::exp(-ratio);
}

// Exact stop-at-depth distribution of a chain toy with `length` cyber nodes
// (the far end backed up): stop at y < length-1 when the frontier survives
// its coin; y = length-1 is certain once every coin failed.
std::vector<double> chain_stop_distribution(int length, double rho) {
    std::vector<double> prob(static_cast<std::size_t>(length), 0.0);
    double reach = 1.0;
    for (int y = 1; y <= length - 2; ++y) {
        const double pi = frontier_fail_probability(y, rho);
        prob[static_cast<std::size_t>(y)] = reach * (1.0 - pi);
        reach *= pi;
    }
    prob[static_cast<std::size_t>(length - 1)] = reach;
    return prob;
}

Region prefix_region(int y) {
    Region r;
    for (int j = 0; j < y; ++j) r.cyber.push_back(j);
    return r;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("deterministic dynamics give one region with probability one") {
    toys::Toy toy = toys::chain_toy(6, 0.5);
    toy.cascade.failure_mode = FailureMode::Deterministic;
    SUBCASE("exhaustive") {
        auto table = exhaustive_regions(toy.net, {toy.initial_fault}, toy.cascade);
        REQUIRE(table.probability.size() == 1);
        CHECK(table.probability.begin()->second == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(table.probability.begin()->first == prefix_region(5));
        CHECK(table.residual == 0.0);
    }
    SUBCASE("monte carlo") {
        auto table = monte_carlo_regions(toy.net, InitialFaultDistribution::point(toy.initial_fault),
                                         2000, 7, toy.cascade, 4);
        REQUIRE(table.probability.size() == 1);
        CHECK(table.probability.begin()->second == doctest::Approx(1.0));
        CHECK(table.standard_error(table.probability.begin()->first) == 0.0);
    }
}

TEST_CASE("exhaustive probabilities match the analytic chain distribution") {
    for (double rho : {0.3, 0.5, 0.8}) {
        const int length = 7;
        toys::Toy toy = toys::chain_toy(length, rho);
        auto table = exhaustive_regions(toy.net, {toy.initial_fault}, toy.cascade);
        const auto analytic = chain_stop_distribution(length, rho);
        double total = 0.0;
        for (const auto& [region, prob] : table.probability) total += prob;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (int y = 1; y <= length - 1; ++y) {
            const Region region = prefix_region(y);
            auto it = table.probability.find(region);
            REQUIRE(it != table.probability.end());
            CHECK(it->second ==
                  doctest::Approx(analytic[static_cast<std::size_t>(y)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("a single binary branch splits exactly by its coin") {
    // Three-node chain: the only coin is the first frontier's.
    toys::Toy toy = toys::chain_toy(3, 0.5);
    auto table = exhaustive_regions(toy.net, {toy.initial_fault}, toy.cascade);
    REQUIRE(table.probability.size() == 2);
    const double pi = frontier_fail_probability(1, 0.5);
    CHECK(table.probability.at(prefix_region(1)) == doctest::Approx(1.0 - pi).epsilon(1e-12));
    CHECK(table.probability.at(prefix_region(2)) == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("monte carlo agrees with exhaustive within three standard errors") {
    toys::Toy toy = toys::chain_toy(8, 0.5);
    auto exact = exhaustive_regions(toy.net, {toy.initial_fault}, toy.cascade);
    auto mc = monte_carlo_regions(toy.net, InitialFaultDistribution::point(toy.initial_fault),
                                  100000, 99, toy.cascade, 4);
    double mc_total = mc.residual;
    for (const auto& [region, freq] : mc.probability) mc_total += freq;
    CHECK(mc_total == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& [region, exact_prob] : exact.probability) {
        auto it = mc.probability.find(region);
        const double freq = it == mc.probability.end() ? 0.0 : it->second;
        const double se = std::sqrt(std::max(freq * (1.0 - freq), 1e-12) / 100000.0);
        CHECK(std::abs(freq - exact_prob) <= 3.0 * se);
    }
}

TEST_CASE("monte carlo is reproducible per seed and thread-count independent") {
    toys::Toy toy = toys::chain_toy(7, 0.4);
    auto dist = InitialFaultDistribution::point(toy.initial_fault);
    auto a = monte_carlo_regions(toy.net, dist, 20000, 123, toy.cascade, 1);
    auto b = monte_carlo_regions(toy.net, dist, 20000, 123, toy.cascade, 8);
    CHECK(a.to_csv() == b.to_csv());
    auto c = monte_carlo_regions(toy.net, dist, 20000, 124, toy.cascade, 8);
    CHECK(a.to_csv() != c.to_csv());
}

TEST_CASE("exhaustive refuses oversized instances") {
    LayerParams params;
    Graph p(4);
    p.add_edge(0, 1);
    p.add_edge(1, 2);
    p.add_edge(2, 3);
    Graph c(12);
    for (int j = 0; j + 1 < 12; ++j) c.add_edge(j, j + 1);
    CoupledNetwork net = make_network(std::move(p), std::move(c), params);
    CascadeConfig config;
    CHECK_THROWS_AS(exhaustive_regions(net, {{Layer::Cyber, 0}}, config), SizeBoundError);
    // The cap is configurable.
    CHECK_NOTHROW(exhaustive_regions(net, {{Layer::Cyber, 0}}, config, 16));
}

TEST_CASE("uniform cyber fault distribution samples every node") {
    toys::Toy toy = toys::chain_toy(6, 0.5);
    auto dist = InitialFaultDistribution::uniform_cyber(toy.net);
    REQUIRE(dist.support.size() == 6);
    double total = 0.0;
    for (const auto& [id, w] : dist.support) total += w;
    CHECK(total == doctest::Approx(1.0));
    CHECK(dist.sample(0.0).index == 0);
    CHECK(dist.sample(0.999).index == 5);
}

TEST_CASE("frequency table csv") {
    toys::Toy toy = toys::chain_toy(4, 0.5);
    auto table = exhaustive_regions(toy.net, {toy.initial_fault}, toy.cascade);
    const std::string csv = table.to_csv();
    CHECK(csv.rfind("cyber_ids,physical_ids,probability,stderr\n", 0) == 0);
    CHECK(csv.find("0;1") != std::string::npos);
}

}  // TEST_SUITE
