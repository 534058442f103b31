#include <doctest.h>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/graph.hpp"

using namespace cpsrisk;

TEST_SUITE("graph") {

TEST_CASE("edge list parsing") {
    SUBCASE("single edge") {
        Graph g = parse_edge_list("0 1");
        CHECK(g.node_count() == 2);
        CHECK(g.edge_count() == 1);
        CHECK(g.has_edge(0, 1));
    }
    SUBCASE("duplicate edges merge") {
        Graph g = parse_edge_list("0 1\n1 0\n0 1");
        CHECK(g.edge_count() == 1);
        CHECK(g.degree(0) == 1);
    }
    SUBCASE("comments and blanks") {
        Graph g = parse_edge_list("# header\n\n0 1  # inline\n  2 1\n");
        CHECK(g.node_count() == 3);
        CHECK(g.edge_count() == 2);
    }
    SUBCASE("malformed line reports its number") {
        try {
            parse_edge_list("0 1\nnope\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line_number == 2);
        }
    }
    SUBCASE("self loop rejected") {
        CHECK_THROWS_AS(parse_edge_list("3 3"), ParseError);
    }
}

TEST_CASE("connectivity") {
    Graph g(4);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    CHECK_FALSE(g.connected());
    g.add_edge(2, 3);
    CHECK(g.connected());
}

TEST_CASE("degree among alive subset") {
    Graph g(3);
    g.add_edge(0, 1);
    g.add_edge(0, 2);
    std::vector<std::uint8_t> alive{1, 0, 1};
    CHECK(g.degree(0) == 2);
    CHECK(g.degree_among(0, alive) == 1);
}

}  // TEST_SUITE
