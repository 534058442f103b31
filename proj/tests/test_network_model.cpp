#include <doctest.h>

#include <cmath>
#include <set>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/network_model.hpp"
#include "cpsrisk/rng.hpp"

using namespace cpsrisk;

namespace {

// Two-physical / three-cyber fixture with hand-checkable loads.
CoupledNetwork tiny_net(LayerParams params) {
    Graph physical(2);
    physical.add_edge(0, 1);
    Graph cyber(3);
    cyber.add_edge(0, 1);
    cyber.add_edge(1, 2);
    return make_network(std::move(physical), std::move(cyber), params);
}

}  // namespace

TEST_SUITE("network_model") {

TEST_CASE("total monitoring load over alive physical degrees") {
    // Triangle 0-1-2 plus pendant 3 on node 1.
    Graph physical(4);
    physical.add_edge(0, 1);
    physical.add_edge(0, 2);
    physical.add_edge(1, 2);
    physical.add_edge(1, 3);
    Graph cyber(2);
    cyber.add_edge(0, 1);
    LayerParams params;
    params.alpha = 1.0;
    params.delta = 2.0;
    CoupledNetwork net = make_network(std::move(physical), std::move(cyber), params);
    // Fresh: degrees {2,3,2,1} -> 4+9+4+1 = 18.
    CHECK(cyber_total_load(net) == doctest::Approx(18.0).epsilon(1e-12));
    // Kill the pendant: alive degrees {2,2,2} -> 12. Failed nodes are not
    // monitored and their edges drop out of the residual degrees.
    net.physical_nodes[3].alive = false;
    CHECK(cyber_total_load(net) == doctest::Approx(12.0).epsilon(1e-12));
    // Kill node 2 as well: alive 0 and 1 see only each other -> 1+1 = 2.
    net.physical_nodes[2].alive = false;
    CHECK(cyber_total_load(net) == doctest::Approx(2.0).epsilon(1e-12));

    SUBCASE("all physical failed gives zero") {
        for (auto& n : net.physical_nodes) n.alive = false;
        CHECK(cyber_total_load(net) == 0.0);
    }

    SUBCASE("degree-independent case delta=0 counts alive nodes") {
        LayerParams p0 = params;
        p0.delta = 0.0;
        CoupledNetwork net0 = tiny_net(p0);
        CHECK(cyber_total_load(net0) == doctest::Approx(2.0));
        net0.physical_nodes[0].alive = false;
        CHECK(cyber_total_load(net0) == doctest::Approx(1.0));
    }
}

TEST_CASE("degree-weighted cyber load split") {
    LayerParams params;
    params.theta = 2.0;
    // Path 0-1-2: degrees {1,2,1}, weights {1,4,1}; hand evaluation of the
    // share formula gives {13/6, 52/6, 13/6} for a total of 13.
    CoupledNetwork fresh = tiny_net(params);
    auto loads = distribute_cyber_load(fresh, 13.0);
    CHECK(loads[0] == doctest::Approx(13.0 / 6.0));
    CHECK(loads[1] == doctest::Approx(52.0 / 6.0));
    CHECK(loads[2] == doctest::Approx(13.0 / 6.0));

    SUBCASE("alive degrees 1,2,3 with a dead neighbor excluded") {
        // Alive 0..3 with alive degrees {1,2,3,2}; node 4 is dead and hangs
        // off node 0, so node 0's raw degree 2 must count as 1.
        Graph c(5);
        c.add_edge(2, 0);
        c.add_edge(2, 1);
        c.add_edge(2, 3);
        c.add_edge(1, 3);
        c.add_edge(0, 4);
        Graph p(2);
        p.add_edge(0, 1);
        CoupledNetwork net2 = make_network(std::move(p), std::move(c), params);
        net2.cyber_nodes[4].alive = false;
        // Weights {1, 4, 9, 4}, sum 18.
        auto l2 = distribute_cyber_load(net2, 13.0);
        CHECK(l2[0] == doctest::Approx(13.0 / 18.0));
        CHECK(l2[1] == doctest::Approx(52.0 / 18.0));
        CHECK(l2[2] == doctest::Approx(117.0 / 18.0));
        CHECK(l2[3] == doctest::Approx(52.0 / 18.0));
        CHECK(l2[4] == 0.0);
        CHECK(l2[0] + l2[1] + l2[2] + l2[3] == doctest::Approx(13.0).epsilon(1e-9));
    }

    SUBCASE("identical degrees split evenly") {
        Graph c(4);
        c.add_edge(0, 1);
        c.add_edge(1, 2);
        c.add_edge(2, 3);
        c.add_edge(3, 0);  // cycle: all degree 2
        Graph p(2);
        p.add_edge(0, 1);
        CoupledNetwork net2 = make_network(std::move(p), std::move(c), params);
        auto loads2 = distribute_cyber_load(net2, 8.0);
        for (double v : loads2) CHECK(v == doctest::Approx(2.0));
    }

    SUBCASE("theta=0 splits uniformly regardless of degree") {
        LayerParams p0 = params;
        p0.theta = 0.0;
        CoupledNetwork net0 = tiny_net(p0);
        auto loads0 = distribute_cyber_load(net0, 9.0);
        for (double v : loads0) CHECK(v == doctest::Approx(3.0));
    }

    SUBCASE("failed nodes get zero and the rest still sum to the total") {
        CoupledNetwork net0 = tiny_net(params);
        net0.cyber_nodes[1].alive = false;
        auto loads0 = distribute_cyber_load(net0, 5.0);
        CHECK(loads0[1] == 0.0);
        CHECK(loads0[0] + loads0[2] == doctest::Approx(5.0).epsilon(1e-9));
    }

    SUBCASE("total collapse signalled") {
        CoupledNetwork net0 = tiny_net(params);
        for (auto& n : net0.cyber_nodes) n.alive = false;
        CHECK_THROWS_AS(distribute_cyber_load(net0, 1.0), TotalCollapseError);
        CHECK_NOTHROW(distribute_cyber_load(net0, 0.0));
    }
}

TEST_CASE("structural physical load") {
    CHECK(physical_node_load(3, 1.0, 2.0) == doctest::Approx(9.0));
    CHECK(physical_node_load(0, 1.0, 2.0) == 0.0);
    CHECK(physical_node_load(5, 2.0, 1.0) == doctest::Approx(10.0));
}

TEST_CASE("tolerance checks are inclusive at the bound") {
    CyberNode cyber;
    cyber.initial_load = 1.0;
    cyber.current_load = 1.5;
    CHECK(check_cyber_constraint(cyber, 0.5));  // boundary holds
    cyber.current_load = 1.51;
    CHECK_FALSE(check_cyber_constraint(cyber, 0.5));
    cyber.current_load = 0.0;
    CHECK(check_cyber_constraint(cyber, 0.0));

    PhysicalNode phys;
    phys.initial_load = 9.0;
    phys.capacity_param = 9.0;
    phys.current_load = 9.0;
    CHECK(check_physical_constraint(phys, 0.5));  // bound is 13.5
    phys.current_load = 13.5;
    CHECK(check_physical_constraint(phys, 0.5));
    phys.current_load = 13.6;
    CHECK_FALSE(check_physical_constraint(phys, 0.5));
    phys.current_load = 0.0;
    CHECK(check_physical_constraint(phys, 0.5));
}

TEST_CASE("constraint checks are monotone in the tolerance") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        CyberNode node;
        node.initial_load = rng.next_double() * 10.0;
        node.current_load = rng.next_double() * 30.0;
        const double rho_small = rng.next_double();
        const double rho_large = rho_small + rng.next_double();
        if (check_cyber_constraint(node, rho_small))
            CHECK(check_cyber_constraint(node, rho_large));
    }
}

TEST_CASE("scale-free generator") {
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(generate_ba_cyber(5, 5, 2, 1), ConfigError);
        CHECK_THROWS_AS(generate_ba_cyber(10, 2, 3, 1), ConfigError);
        CHECK_THROWS_AS(generate_ba_cyber(10, 3, 0, 1), ConfigError);
    }
    SUBCASE("smallest growth step") {
        Graph g = generate_ba_cyber(4, 3, 1, 7);
        CHECK(g.node_count() == 4);
        CHECK(g.edge_count() == 4);  // triangle + one attachment
        CHECK(g.degree(3) == 1);
    }
    SUBCASE("study-scale instance") {
        Graph g = generate_ba_cyber(110, 3, 2, 42);
        CHECK(g.node_count() == 110);
        CHECK(g.edge_count() == 3 + 107 * 2);
        CHECK(g.connected());
    }
    SUBCASE("deterministic for a fixed seed") {
        Graph a = generate_ba_cyber(60, 3, 2, 1234);
        Graph b = generate_ba_cyber(60, 3, 2, 1234);
        CHECK(a.edges() == b.edges());
        Graph c = generate_ba_cyber(60, 3, 2, 1235);
        CHECK(a.edges() != c.edges());
    }
    SUBCASE("mean degree approaches 2m over many seeds") {
        double total_mean_degree = 0.0;
        const int trials = 1000;
        for (int s = 0; s < trials; ++s) {
            Graph g = generate_ba_cyber(110, 3, 2, static_cast<std::uint64_t>(s));
            total_mean_degree += 2.0 * g.edge_count() / g.node_count();
        }
        const double mean = total_mean_degree / trials;
        CHECK(mean == doctest::Approx(4.0).epsilon(0.05));
    }
    SUBCASE("preferential attachment favors the hub") {
        // On a star seed the high-degree center should keep attracting; check
        // the degree distribution is right-skewed: max degree well above 2m.
        Graph g = generate_ba_cyber(200, 3, 2, 5);
        int max_degree = 0;
        for (int v = 0; v < g.node_count(); ++v) max_degree = std::max(max_degree, g.degree(v));
        CHECK(max_degree >= 12);
    }
}

TEST_CASE("built-in 39-bus topology") {
    Graph g = ieee39_topology();
    CHECK(g.node_count() == 39);
    CHECK(g.edge_count() == 46);
    CHECK(g.connected());
    auto roles = ieee39_roles();
    REQUIRE(roles.size() == 39);
    int generators = 0, loads = 0, substations = 0;
    for (auto r : roles) {
        if (r == PhysicalRole::Generator) ++generators;
        if (r == PhysicalRole::Load) ++loads;
        if (r == PhysicalRole::Substation) ++substations;
    }
    CHECK(generators == 10);
    CHECK(loads == 17);
    CHECK(substations == 12);
    CHECK(load_physical_topology("ieee39").edge_count() == 46);
}

TEST_CASE("larger alive degree draws strictly larger share when theta > 0") {
    LayerParams params;
    params.theta = 2.0;
    CoupledNetwork net = tiny_net(params);
    auto loads = distribute_cyber_load(net, 10.0);
    CHECK(loads[1] > loads[0]);  // degree 2 vs 1
}

TEST_CASE("control role assignment picks the highest degrees") {
    LayerParams params;
    Graph cyber(5);
    cyber.add_edge(0, 1);
    cyber.add_edge(0, 2);
    cyber.add_edge(0, 3);
    cyber.add_edge(3, 4);
    Graph physical(2);
    physical.add_edge(0, 1);
    CoupledNetwork net = make_network(std::move(physical), std::move(cyber), params);
    assign_cyber_roles(net, 0.4);  // ceil(2) controls
    CHECK(net.cyber_nodes[0].role == CyberRole::Control);  // degree 3
    CHECK(net.cyber_nodes[3].role == CyberRole::Control);  // degree 2
    CHECK(net.cyber_nodes[1].role == CyberRole::Monitor);
}

}  // TEST_SUITE
