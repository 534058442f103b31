#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cpsrisk/cascade.hpp"
#include "cpsrisk/coupling.hpp"
#include "cpsrisk/errors.hpp"
#include "cpsrisk/rng.hpp"
#include "support/toys.hpp"

using namespace cpsrisk;

namespace {

// Random small coupled network for property checks.
CoupledNetwork random_net(std::uint64_t seed, LayerParams params) {
    Rng rng(seed);
    const int np = 3 + static_cast<int>(rng.next_below(3));
    const int nc = 4 + static_cast<int>(rng.next_below(5));
    Graph p(np);
    for (int v = 1; v < np; ++v) p.add_edge(v, static_cast<int>(rng.next_below(v)));
    Graph c(nc);
    for (int v = 1; v < nc; ++v) c.add_edge(v, static_cast<int>(rng.next_below(v)));
    for (int extra = 0; extra < nc / 2; ++extra) {
        int a = static_cast<int>(rng.next_below(nc));
        int b = static_cast<int>(rng.next_below(nc));
        if (a != b && !c.has_edge(std::min(a, b), std::max(a, b))) c.add_edge(a, b);
    }
    CoupledNetwork net = make_network(std::move(p), std::move(c), params);
    allocate_coupling(net, seed ^ 0xC0FFEE);
    return net;
}

}  // namespace

TEST_SUITE("cascade") {

TEST_CASE("status interaction scenario: cyber fault disables its governed "
          "physical node, which starves a powered cyber node") {
    toys::Toy toy = toys::fig2_toy();
    CascadeEngine engine(toy.net, toy.cascade);
    CascadeTrace trace = engine.simulate({toy.initial_fault}, 1);

    REQUIRE(trace.states.size() == 3);
    CHECK(trace.cyber_failure_step[0] == 0);     // attacked node
    CHECK(trace.physical_failure_step[0] == 1);  // its governed physical node
    CHECK(trace.cyber_failure_step[1] == 2);     // powered by that node
    CHECK(trace.cyber_failure_step[2] == -1);    // bystander survives
    CHECK(trace.physical_failure_step[1] == -1);
    const SystemState& final_state = trace.terminal();
    CHECK(final_state.transition == 0);
    CHECK(final_state.stability == 1);
    CHECK(final_state.physical_failures == 1);
    CHECK(final_state.cyber_failures == 2);
    CHECK(final_state.last_fault_layer == 1);
    CHECK_FALSE(trace.truncated);
}

TEST_CASE("no violating nodes: state unchanged, transition flag drops") {
    // A fault whose load lands well inside every neighbor's margin.
    Graph c(3);
    c.add_edge(0, 1);
    c.add_edge(1, 2);
    Graph p(2);
    p.add_edge(0, 1);
    LayerParams params;
    params.theta = 0.0;
    params.delta = 0.0;
    params.rho_c = 5.0;
    params.rho_p = 5.0;
    CoupledNetwork net = make_network(std::move(p), std::move(c), params);
    CascadeTrace trace = simulate(net, {{Layer::Cyber, 0}}, 1);
    REQUIRE(trace.states.size() == 1);  // absorbed immediately
    CHECK(trace.terminal().transition == 0);
    CHECK(trace.terminal().cyber_failures == 1);
}

TEST_CASE("initial fault set must be non-empty") {
    toys::Toy toy = toys::chain_toy(6, 0.5);
    CascadeEngine engine(toy.net, toy.cascade);
    CHECK_THROWS_AS(engine.initial_state({}), ConfigError);
}

TEST_CASE("isolated failed node drops its load into the ledger") {
    Graph c(3);
    c.add_edge(1, 2);  // node 0 isolated
    Graph p(2);
    p.add_edge(0, 1);
    LayerParams params;
    params.theta = 0.0;
    params.delta = 0.0;
    CoupledNetwork net = make_network(std::move(p), std::move(c), params);
    const double isolated_load = net.cyber_nodes[0].initial_load;
    CHECK(isolated_load > 0.0);  // theta = 0 still gives it an even share
    CascadeTrace trace = simulate(net, {{Layer::Cyber, 0}}, 1);
    REQUIRE(!trace.ledgers.empty());
    CHECK(trace.ledgers[0].lost == doctest::Approx(isolated_load));
    CHECK(trace.ledgers[0].before_total ==
          doctest::Approx(trace.ledgers[0].after_total + trace.ledgers[0].lost));
    // No further propagation.
    CHECK(trace.terminal().cyber_failures == 1);
}

TEST_CASE("load conservation holds step by step") {
    LayerParams params;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        CoupledNetwork net = random_net(seed, params);
        CascadeConfig config;  // deterministic
        CascadeEngine engine(net, config);
        CascadeTrace trace =
            engine.simulate({{Layer::Cyber, static_cast<int>(seed) % net.cyber_count()}}, seed);
        for (const StepLedger& led : trace.ledgers) {
            const double balance = led.after_total + led.lost;
            CHECK(std::abs(balance - led.before_total) <=
                  1e-9 * std::max(1.0, std::abs(led.before_total)));
        }
    }
}

TEST_CASE("failure counts never decrease and absorption is terminal") {
    LayerParams params;
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        CoupledNetwork net = random_net(seed, params);
        CascadeConfig config;
        config.failure_mode = FailureMode::Probabilistic;
        CascadeEngine engine(net, config);
        CascadeTrace trace =
            engine.simulate({{Layer::Cyber, static_cast<int>(seed) % net.cyber_count()}}, seed);
        int transitions_to_absorption = 0;
        for (std::size_t i = 0; i + 1 < trace.states.size(); ++i) {
            CHECK(trace.states[i + 1].physical_failures >= trace.states[i].physical_failures);
            CHECK(trace.states[i + 1].cyber_failures >= trace.states[i].cyber_failures);
            CHECK(trace.states[i].stability == 1 - trace.states[i].transition);
            if (trace.states[i].transition == 1 && trace.states[i + 1].transition == 0)
                ++transitions_to_absorption;
            // Absorption is terminal: no 0 -> 1 flips.
            if (trace.states[i].transition == 0) CHECK(trace.states[i + 1].transition == 0);
        }
        CHECK(transitions_to_absorption <= 1);
    }
}

TEST_CASE("simulation is bitwise reproducible per seed") {
    toys::Toy toy = toys::chain_toy(8, 0.5);
    CascadeEngine engine(toy.net, toy.cascade);
    CascadeTrace a = engine.simulate({toy.initial_fault}, 4242);
    CascadeTrace b = engine.simulate({toy.initial_fault}, 4242);
    CHECK(a.to_jsonl() == b.to_jsonl());
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(a.states[i].cyber_load == b.states[i].cyber_load);
        CHECK(a.states[i].physical_load == b.states[i].physical_load);
    }
}

TEST_CASE("raising tolerances never enlarges the failed set") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        LayerParams tight;
        tight.rho_c = 0.2;
        tight.rho_p = 0.2;
        LayerParams loose = tight;
        loose.rho_c = 0.8;
        loose.rho_p = 0.9;
        CoupledNetwork net_tight = random_net(seed, tight);
        CoupledNetwork net_loose = random_net(seed, loose);
        // Same topology and coupling: regenerated from the same seed.
        const int fault = static_cast<int>(seed) % net_tight.cyber_count();
        CascadeTrace a = simulate(net_tight, {{Layer::Cyber, fault}}, seed);
        CascadeTrace b = simulate(net_loose, {{Layer::Cyber, fault}}, seed);
        for (int j = 0; j < net_tight.cyber_count(); ++j)
            if (!b.terminal().cyber_alive[j]) CHECK(!a.terminal().cyber_alive[j]);
        for (int h = 0; h < net_tight.physical_count(); ++h)
            if (!b.terminal().physical_alive[h]) CHECK(!a.terminal().physical_alive[h]);
    }
}

TEST_CASE("a cyber node whose only supplier fails dies in the next step") {
    Graph c(2);
    c.add_edge(0, 1);
    Graph p(2);
    p.add_edge(0, 1);
    LayerParams params;
    params.rho_c = 10.0;
    params.rho_p = 10.0;
    CoupledNetwork net = make_network(std::move(p), std::move(c), params);
    CouplingMap coupling;
    coupling.supplier = {0, 1};  // c0 powered by p0, c1 by p1
    coupling.controller = {-1, -1};
    coupling.monitor = {-1, -1};
    coupling.branches = {{0, 0, CouplingBranch::Kind::Power}, {1, 1, CouplingBranch::Kind::Power}};
    net.coupling = coupling;
    CascadeTrace trace = simulate(net, {{Layer::Physical, 0}}, 1);
    CHECK(trace.physical_failure_step[0] == 0);
    CHECK(trace.cyber_failure_step[0] == 1);  // exactly the following step
    CHECK(trace.cyber_failure_step[1] == -1);
}

TEST_CASE("huge tolerances absorb right after the initial fault") {
    LayerParams params;
    params.rho_c = 1e9;
    params.rho_p = 1e9;
    for (std::uint64_t seed = 300; seed < 310; ++seed) {
        CoupledNetwork net = random_net(seed, params);
        CascadeTrace trace =
            simulate(net, {{Layer::Cyber, static_cast<int>(seed) % net.cyber_count()}}, seed);
        CHECK(trace.terminal().cyber_failures == 1);
        CHECK(trace.terminal().physical_failures == 0);
        CHECK(trace.states.size() == 1);
    }
}

TEST_CASE("step limit sets the truncation flag") {
    toys::Toy toy = toys::chain_toy(8, 0.3);
    toy.cascade.failure_mode = FailureMode::Deterministic;
    toy.cascade.max_steps = 2;  // the chain needs several more to absorb
    CascadeEngine engine(toy.net, toy.cascade);
    CascadeTrace trace = engine.simulate({toy.initial_fault}, 1);
    CHECK(trace.truncated);
    CHECK(trace.states.size() == 3);  // initial + two applied steps
}

TEST_CASE("state classification") {
    toys::Toy tight = toys::chain_toy(6, 0.5);
    CascadeEngine tight_engine(tight.net, tight.cascade);
    SystemState overloaded = tight_engine.initial_state({tight.initial_fault});
    // The neighbor of the faulted end is overloaded: doubled load vs 1.5x.
    CHECK(classify_state(tight.net, overloaded) == StateClass::Transition);

    // With a wide margin the same fault leaves every survivor in bounds.
    toys::Toy slack = toys::chain_toy(6, 5.0);
    CascadeEngine slack_engine(slack.net, slack.cascade);
    SystemState fresh = slack_engine.initial_state({slack.initial_fault});
    CHECK(classify_state(slack.net, fresh) == StateClass::Absorption);

    // Boundary-exactly-at-limit is absorption (inclusive bound).
    SystemState boundary = fresh;
    boundary.cyber_load[2] = boundary.cyber_capacity[2];
    CHECK(classify_state(slack.net, boundary) == StateClass::Absorption);
    boundary.cyber_load[2] = boundary.cyber_capacity[2] * (1.0 + 1e-9);
    CHECK(classify_state(slack.net, boundary) == StateClass::Transition);
}

TEST_CASE("empirical transition frequencies") {
    toys::Toy toy = toys::chain_toy(6, 0.5);
    CascadeEngine engine(toy.net, toy.cascade);
    const SystemState start = engine.initial_state({toy.initial_fault});

    SUBCASE("deterministic rule puts all mass on one successor") {
        CascadeConfig det = toy.cascade;
        det.failure_mode = FailureMode::Deterministic;
        CascadeEngine det_engine(toy.net, det);
        std::vector<SystemState> successors;
        for (int r = 0; r < 50; ++r) {
            SystemState s = start;
            det_engine.apply_step(s, det_engine.violators(s), ~std::uint64_t{0});
            successors.push_back(std::move(s));
        }
        auto est = empirical_transition_probability(start, successors);
        REQUIRE(est.successor_probability.size() == 1);
        CHECK(est.successor_probability.begin()->second == doctest::Approx(1.0));
    }

    SUBCASE("a two-outcome branch matches its coin and sums to one") {
        // First frontier of the 0.5-tolerance chain: overload ratio 1/3,
        // failure probability 1 - exp(-1/3).
        std::vector<SystemState> successors;
        const int runs = 100000;
        for (int r = 0; r < runs; ++r) {
            SystemState s = start;
            const auto v = engine.violators(s);
            REQUIRE(v.size() == 1);
            Rng rng(derive_seed(9000, static_cast<std::uint64_t>(r)));
            const std::uint64_t mask = rng.next_double() < v[0].fail_probability ? 1 : 0;
            engine.apply_step(s, v, mask);
            successors.push_back(std::move(s));
        }
        auto est = empirical_transition_probability(start, successors);
        REQUIRE(est.successor_probability.size() == 2);
        double total = 0.0;
        for (const auto& [key, prob] : est.successor_probability) total += prob;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        const double expected_fail = 1.0 - std::exp(-1.0 / 3.0);
        for (const auto& [key, prob] : est.successor_probability) {
            if (key.k == 1)
                CHECK(prob == doctest::Approx(expected_fail).epsilon(0.02));
            else
                CHECK(prob == doctest::Approx(1.0 - expected_fail).epsilon(0.02));
        }
    }
}

TEST_CASE("trace exports one json object per state") {
    toys::Toy toy = toys::fig2_toy();
    CascadeEngine engine(toy.net, toy.cascade);
    CascadeTrace trace = engine.simulate({toy.initial_fault}, 1);
    const std::string jsonl = trace.to_jsonl();
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 3);
    CHECK(jsonl.find("\"n\":0") != std::string::npos);
    CHECK(jsonl.find("\"failed_node_ids\":[\"c0\"]") != std::string::npos);
    CHECK(jsonl.find("\"p0\"") != std::string::npos);
}

}  // TEST_SUITE
