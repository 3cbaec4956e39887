#include <doctest.h>

#include <fstream>
#include <set>

#include "fpcyl/graph.hpp"
#include "fpcyl/rng.hpp"

using namespace fpcyl;

TEST_CASE("box cylinder: 3x3 grid") {
    auto g = build_box_cylinder(2, 1, 2, 0);
    CHECK(g.vertex_count() == 9);
    CHECK(g.edge_count() == 12);
    std::size_t horizontal = 0, vertical = 0;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        (g.edge_is_horizontal(e) ? horizontal : vertical) += 1;
    CHECK(horizontal == 6);
    CHECK(vertical == 6);
}

TEST_CASE("box cylinder: degenerate base h=0 is a path") {
    auto g = build_box_cylinder(5, 0, 2, 0);
    CHECK(g.vertex_count() == 6);
    CHECK(g.edge_count() == 5);
    for (std::size_t e = 0; e < g.edge_count(); ++e) CHECK(g.edge_is_horizontal(e));
}

TEST_CASE("box cylinder: d=3 base is a 3x3 grid") {
    auto g = build_box_cylinder(1, 1, 3, 0);
    CHECK(g.base_vertex_count() == 9);
    CHECK(g.base_edge_count() == 12);
    CHECK(g.vertex_count() == 18);
    CHECK(g.edge_count() == 33);  // 1*9 horizontal + 2*12 vertical
}

TEST_CASE("product cylinder: single edge base") {
    auto base = GraphSpec::explicit_graph(2, {{0, 1}}, 0);
    auto g = build_product_cylinder(1, base);
    CHECK(g.vertex_count() == 4);
    CHECK(g.edge_count() == 4);
}

TEST_CASE("product cylinder: triangle base") {
    auto base = GraphSpec::explicit_graph(3, {{0, 1}, {1, 2}, {0, 2}}, 0);
    auto g = build_product_cylinder(3, base);
    CHECK(g.vertex_count() == 12);
    CHECK(g.edge_count() == 21);  // 3*3 horizontal + 4*3 vertical
}

TEST_CASE("product cylinder: disconnected base rejected with a representative") {
    auto base = GraphSpec::explicit_graph(2, {}, 0);
    CHECK_THROWS_WITH_AS(build_product_cylinder(2, base),
                         doctest::Contains("vertex 1"), std::invalid_argument);
}

TEST_CASE("graph_metrics examples") {
    auto m1 = graph_metrics(GraphSpec::box(2, 2));
    CHECK(m1.vertex_count == 5);
    CHECK(m1.edge_count == 4);
    CHECK(m1.diameter == 4);

    auto m2 = graph_metrics(GraphSpec::box(1, 3));
    CHECK(m2.vertex_count == 9);
    CHECK(m2.edge_count == 12);
    CHECK(m2.diameter == 4);

    auto m3 = graph_metrics(GraphSpec::box(0, 2));
    CHECK(m3.vertex_count == 1);
    CHECK(m3.edge_count == 0);
    CHECK(m3.diameter == 0);
}

TEST_CASE("box metrics scale with h and d") {
    for (int h = 0; h <= 4; ++h) {
        auto m = graph_metrics(GraphSpec::box(h, 2));
        CHECK(m.diameter == 2 * h);
        CHECK(m.vertex_count == static_cast<std::size_t>(2 * h + 1));
    }
    for (int d = 2; d <= 4; ++d) {
        auto m = graph_metrics(GraphSpec::box(2, d));
        std::size_t expect = 1;
        for (int i = 0; i < d - 1; ++i) expect *= 5;
        CHECK(m.vertex_count == expect);
    }
}

TEST_CASE("edge count formula on random cylinders") {
    RngStream rng = RngStream::derive(41, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 7);
        const int h = static_cast<int>(rng.next_u64() % 3);
        const int d = 2 + static_cast<int>(rng.next_u64() % 2);
        const int margin = static_cast<int>(rng.next_u64() % 3);
        auto g = build_box_cylinder(n, h, d, margin);
        const std::size_t cols = static_cast<std::size_t>(g.col_hi() - g.col_lo());
        CHECK(g.edge_count() == cols * g.base_vertex_count() + (cols + 1) * g.base_edge_count());
    }
}

TEST_CASE("vertex index map is a bijection") {
    auto g = build_box_cylinder(3, 1, 3, 1);
    std::set<std::uint32_t> seen;
    for (int c = g.col_lo(); c <= g.col_hi(); ++c) {
        for (std::uint32_t b = 0; b < g.base_vertex_count(); ++b) {
            const auto id = g.vertex_id(c, b);
            CHECK(id < g.vertex_count());
            CHECK(g.vertex_of(id) == std::make_pair(c, b));
            seen.insert(id);
        }
    }
    CHECK(seen.size() == g.vertex_count());
}

TEST_CASE("edge id arithmetic round-trips") {
    auto g = build_box_cylinder(3, 1, 2, 2);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const int col = g.edge_column(e);
        const bool horiz = g.edge_is_horizontal(e);
        const std::size_t slot = horiz ? g.edge_slot(e) - g.base_edge_count() : g.edge_slot(e);
        CHECK(g.edge_id(col, horiz, slot) == e);
        const auto& edge = g.edge(e);
        if (horiz) {
            CHECK(g.column_of_vertex(edge.u) == col);
            CHECK(g.column_of_vertex(edge.w) == col + 1);
        } else {
            CHECK(g.column_of_vertex(edge.u) == col);
            CHECK(g.column_of_vertex(edge.w) == col);
        }
    }
}

TEST_CASE("construction is deterministic") {
    auto a = build_box_cylinder(4, 2, 2, 1);
    auto b = build_box_cylinder(4, 2, 2, 1);
    CHECK(a.enumeration_hash() == b.enumeration_hash());
    REQUIRE(a.edge_count() == b.edge_count());
    for (std::size_t e = 0; e < a.edge_count(); ++e) {
        CHECK(a.edge(e).u == b.edge(e).u);
        CHECK(a.edge(e).w == b.edge(e).w);
    }

    auto c = build_box_cylinder(4, 2, 2, 2);
    CHECK(a.enumeration_hash() != c.enumeration_hash());
}

TEST_CASE("dimension and budget preconditions") {
    CHECK_THROWS_AS(GraphSpec::box(1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_box_cylinder(10, 10, 4, 0, 1000), budget_error);
    CHECK_THROWS_AS(build_box_cylinder(0, 1, 2, 0), std::invalid_argument);
}

TEST_CASE("explicit base loads from an edge-list file") {
    const std::string path = "/tmp/fpcyl_test_base.txt";
    {
        std::ofstream out(path);
        out << "3 3 1\n0 1\n1 2\n0 2\n";
    }
    auto spec = GraphSpec::from_edge_list_file(path);
    CHECK(spec.vertex_count == 3);
    CHECK(spec.edges.size() == 3);
    CHECK(spec.origin == 1);
    auto m = graph_metrics(spec);
    CHECK(m.diameter == 1);
}

TEST_CASE("origin of box base is the zero vector") {
    auto g = build_box_cylinder(1, 2, 3, 0);
    const auto& base = g.base();
    for (int x : base.coords[base.origin]) CHECK(x == 0);
}
