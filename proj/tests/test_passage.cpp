#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

#include "fpcyl/passage.hpp"
#include "fpcyl/rng.hpp"

using namespace fpcyl;

namespace {

// Exhaustive minimum over all simple paths: the independent oracle for every
// passage functional on tiny graphs. Accumulates edge weights in path order,
// matching the engine's fixed-order re-sum.
double brute_force_min(const CylinderGraph& g, const WeightConfig& w,
                       const std::vector<std::uint32_t>& sources,
                       const std::vector<std::uint32_t>& targets, int col_lo, int col_hi) {
    std::set<std::uint32_t> target_set(targets.begin(), targets.end());
    std::vector<char> visited(g.vertex_count(), 0);
    double best = std::numeric_limits<double>::infinity();

    std::function<void(std::uint32_t, double)> dfs = [&](std::uint32_t u, double acc) {
        if (target_set.count(u)) best = std::min(best, acc);
        visited[u] = 1;
        for (const auto* arc = g.arcs_begin(u); arc != g.arcs_end(u); ++arc) {
            const int c = g.column_of_vertex(arc->to);
            if (visited[arc->to] || c < col_lo || c > col_hi) continue;
            dfs(arc->to, acc + w.weights[arc->edge]);
        }
        visited[u] = 0;
    };
    for (auto s : sources) dfs(s, 0.0);
    return best;
}

std::vector<std::uint32_t> column_vertices(const CylinderGraph& g, int col) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t b = 0; b < g.base_vertex_count(); ++b) out.push_back(g.vertex_id(col, b));
    return out;
}

// The worked 2x2 square: base is a single edge {0-1}, one column step.
// Canonical edge order: e0 = left vertical, e1 = bottom horizontal,
// e2 = top horizontal, e3 = right vertical.
CylinderGraph square_graph() { return CylinderGraph(0, 1, GraphSpec::explicit_graph(2, {{0, 1}}, 0)); }

WeightConfig square_weights(const CylinderGraph& g, double c, double a, double b, double e) {
    WeightConfig w;
    w.weights = {c, a, b, e};
    w.enumeration_hash = g.enumeration_hash();
    return w;
}

}  // namespace

TEST_CASE("worked square: all three functionals and essential edges") {
    auto g = square_graph();
    auto w = square_weights(g, 5.0, 3.0, 1.0, 2.0);

    SUBCASE("point to point takes the bottom edge") {
        auto res = shortest_path(g, w, {g.vertex_id(0, 0)}, {g.vertex_id(1, 0)});
        CHECK(res.value == 3.0);
        CHECK(res.geodesic == std::vector<std::uint32_t>{1});
        CHECK(res.pi == 1);
    }
    SUBCASE("side to side takes the top edge") {
        auto res = side_to_side_time(g, w, 0, 1);
        CHECK(res.value == 1.0);
    }
    SUBCASE("cylinder point time") {
        auto res = cylinder_point_time(g, w);
        CHECK(res.value == 3.0);
        auto res2 = cylinder_point_time(g, w);
        CHECK(res2.value == res.value);
        CHECK(res2.geodesic == res.geodesic);
    }
    SUBCASE("the bottom edge is the unique essential edge") {
        auto rep = essential_edge_count(g, w, PassageVariant::cylinder_point);
        CHECK(rep.essential_count == 1);
        CHECK(rep.candidates_tested == 1);
        CHECK(rep.essential_edges == std::vector<std::uint32_t>{1});
    }
}

TEST_CASE("deterministic weights: straight geodesics") {
    auto g = build_box_cylinder(5, 2, 2, 0);
    auto w = sample_weights(g, WeightDistribution::deterministic(2.0), 0, 0);

    auto T = side_to_side_time(g, w, 0, 5);
    CHECK(T.value == 10.0);
    auto t = cylinder_point_time(g, w);
    CHECK(t.value == 10.0);
    CHECK(t.pi == 5);  // straight path
    for (auto e : t.geodesic) CHECK(g.edge_is_horizontal(e));
}

TEST_CASE("side-to-side value ignores boundary-column vertical weights") {
    auto g = build_box_cylinder(4, 1, 2, 0);
    auto dist = WeightDistribution::exponential(1.0);
    auto w = sample_weights(g, dist, 3, 0);
    const double before = side_to_side_time(g, w, 0, 4).value;

    // Re-randomize the vertical edges in columns 0 and 4 only.
    RngStream fresh = RngStream::derive(999, 999);
    WeightConfig w2 = w;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        if (!g.edge_is_horizontal(e) && (g.edge_column(e) == 0 || g.edge_column(e) == 4))
            w2.weights[e] = fresh.exponential(1.0);
    }
    CHECK(side_to_side_time(g, w2, 0, 4).value == before);
}

TEST_CASE("forbidden edge on the unique path disconnects") {
    auto g = build_box_cylinder(3, 0, 2, 0);
    auto w = sample_weights(g, WeightDistribution::deterministic(1.0), 0, 0);
    std::vector<std::uint32_t> forbidden{1};
    auto res = cylinder_point_time(g, w, nullptr, &forbidden);
    CHECK(res.disconnected);
}

TEST_CASE("geodesic weight re-sum equals reported value") {
    auto g = build_box_cylinder(8, 2, 2, 0);
    auto w = sample_weights(g, WeightDistribution::exponential(1.0), 17, 5);
    auto res = cylinder_point_time(g, w);
    double sum = 0.0;
    for (auto e : res.geodesic) sum += w.weights[e];
    CHECK(res.value == sum);

    // and the geodesic is a connected simple path with the right endpoints
    std::uint32_t at = g.origin_vertex(0);
    std::set<std::uint32_t> seen{at};
    for (auto e : res.geodesic) {
        const auto& edge = g.edge(e);
        REQUIRE((edge.u == at || edge.w == at));
        at = edge.u == at ? edge.w : edge.u;
        CHECK(seen.insert(at).second);
    }
    CHECK(at == g.origin_vertex(8));
}

TEST_CASE("exact agreement with the brute-force oracle") {
    struct Config {
        CylinderGraph graph;
        int n;
    };
    std::vector<Config> configs;
    configs.push_back({CylinderGraph(-1, 3, GraphSpec::explicit_graph(2, {{0, 1}}, 0)), 2});
    configs.push_back({CylinderGraph(-1, 2, GraphSpec::box(1, 2)), 1});
    configs.push_back({CylinderGraph(0, 2, GraphSpec::explicit_graph(3, {{0, 1}, {1, 2}, {0, 2}}, 0)), 2});
    configs.push_back({CylinderGraph(0, 2, GraphSpec::box(1, 2)), 2});

    auto expo = WeightDistribution::exponential(1.0);
    auto unif = WeightDistribution::uniform(0.0, 1.0);
    int draws = 0;
    for (const auto& cfg : configs) {
        const auto& g = cfg.graph;
        REQUIRE(g.vertex_count() <= 12);
        for (int rep = 0; rep < 50; ++rep) {
            const auto& dist = (rep % 2 == 0) ? expo : unif;
            auto w = sample_weights(g, dist, 100 + rep, static_cast<std::uint64_t>(draws));
            ++draws;

            const auto left = column_vertices(g, 0);
            const auto right = column_vertices(g, cfg.n);
            const double T_brute = brute_force_min(g, w, left, right, 0, cfg.n);
            CHECK(side_to_side_time(g, w, 0, cfg.n).value == T_brute);

            const double t_brute = brute_force_min(g, w, {g.origin_vertex(0)},
                                                   {g.origin_vertex(cfg.n)}, 0, cfg.n);
            CHECK(point_to_point_time(g, w, 0, cfg.n).value == t_brute);

            const double a_brute = brute_force_min(g, w, {g.origin_vertex(0)},
                                                   {g.origin_vertex(cfg.n)}, g.col_lo(),
                                                   g.col_hi());
            CHECK(window_point_time(g, w, cfg.n).value == a_brute);
        }
    }
}

TEST_CASE("sandwich on shared weights") {
    const int n = 6;
    auto dist = WeightDistribution::exponential(1.0);
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
        StripOptions opts;
        opts.initial_margin = 2;
        auto out = strip_point_time(n, GraphSpec::box(1, 2), dist, 55, rep, opts);
        const double a = out.result.value;
        const double T = side_to_side_time(out.graph, out.weights, 0, n).value;
        const double t = point_to_point_time(out.graph, out.weights, 0, n).value;
        CHECK(T <= a);
        CHECK(a <= t);
    }
}

TEST_CASE("strip time with deterministic weights keeps the initial window") {
    StripOptions opts;
    opts.initial_margin = 4;
    auto out = strip_point_time(6, GraphSpec::box(2, 2), WeightDistribution::deterministic(1.5),
                                3, 0, opts);
    CHECK(out.result.value == 9.0);
    CHECK(out.result.window_margin_used == 4);
    CHECK(out.result.pi == 6);
}

TEST_CASE("strip time with h=0 equals the straight-path sum") {
    auto dist = WeightDistribution::exponential(1.0);
    StripOptions opts;
    opts.initial_margin = 3;
    auto out = strip_point_time(7, GraphSpec::box(0, 2), dist, 4, 9, opts);
    CHECK(out.result.pi == 7);
    CHECK(out.result.window_margin_used == 3);
    double straight = 0.0;
    for (auto e : out.result.geodesic) straight += out.weights.weights[e];
    CHECK(out.result.value == straight);
}

TEST_CASE("strip window enlarges under zero-heavy weights and keeps old draws") {
    // Mostly-zero weights make far excursions free, forcing enlargement.
    auto dist = WeightDistribution::empirical({0.0, 1.0}, {0.85, 0.15});
    StripOptions opts;
    opts.initial_margin = 1;
    opts.cap_factor = 64;
    bool enlarged = false;
    for (std::uint64_t sid = 0; sid < 200 && !enlarged; ++sid) {
        auto out = strip_point_time(3, GraphSpec::box(1, 2), dist, 1234, sid, opts);
        if (out.result.window_margin_used > opts.initial_margin) {
            enlarged = true;
            // Old-window weights are intact: resample the initial window and
            // compare the overlap.
            CylinderGraph initial(-1, 4, GraphSpec::box(1, 2));
            auto w0 = sample_weights(initial, dist, 1234, sid);
            for (std::size_t e = 0; e < initial.edge_count(); ++e) {
                const int c = initial.edge_column(e);
                const bool horiz = initial.edge_is_horizontal(e);
                const std::size_t slot = horiz ? initial.edge_slot(e) - initial.base_edge_count()
                                               : initial.edge_slot(e);
                CHECK(out.weights.weights[out.graph.edge_id(c, horiz, slot)] == w0.weights[e]);
            }
            // The geodesic stays off the final window boundary.
            const int lo = out.graph.col_lo(), hi = out.graph.col_hi();
            std::uint32_t at = out.graph.origin_vertex(0);
            for (auto e : out.result.geodesic) {
                const auto& edge = out.graph.edge(e);
                at = edge.u == at ? edge.w : edge.u;
                const int c = out.graph.column_of_vertex(at);
                if (at != out.graph.origin_vertex(3)) {
                    CHECK(c > lo);
                    CHECK(c < hi);
                }
            }
        }
    }
    CHECK(enlarged);
}

TEST_CASE("margin cap produces an explicit failure") {
    auto dist = WeightDistribution::empirical({0.0, 1.0}, {0.9, 0.1});
    StripOptions opts;
    opts.initial_margin = 1;
    opts.cap_factor = 0;  // cap = 0 < any doubled margin
    bool hit = false;
    for (std::uint64_t sid = 0; sid < 300 && !hit; ++sid) {
        try {
            strip_point_time(3, GraphSpec::box(1, 2), dist, 77, sid, opts);
        } catch (const margin_error& e) {
            hit = true;
            CHECK(std::string(e.what()).find("cap") != std::string::npos);
        }
    }
    CHECK(hit);
}

TEST_CASE("strip time is non-increasing in h under coupled weights") {
    // box(h,2) embeds in box(h+1,2); base slot indices shift by one.
    const int n = 5, margin = 2;
    auto dist = WeightDistribution::exponential(1.0);
    for (int h = 0; h <= 2; ++h) {
        CylinderGraph small(-margin, n + margin, GraphSpec::box(h, 2));
        CylinderGraph big(-margin, n + margin, GraphSpec::box(h + 1, 2));
        for (std::uint64_t sid = 0; sid < 40; ++sid) {
            auto ws = sample_weights(small, dist, 500 + h, sid);
            WeightConfig wb;
            wb.enumeration_hash = big.enumeration_hash();
            wb.weights.resize(big.edge_count());
            RngStream fill = RngStream::derive_sub(500 + h, sid, 99);
            for (double& x : wb.weights) x = dist.sample(fill);
            for (std::size_t e = 0; e < small.edge_count(); ++e) {
                const int c = small.edge_column(e);
                const bool horiz = small.edge_is_horizontal(e);
                const std::size_t slot =
                    horiz ? small.edge_slot(e) - small.base_edge_count() : small.edge_slot(e);
                wb.weights[big.edge_id(c, horiz, slot + 1)] = ws.weights[e];
            }
            const double a_small = window_point_time(small, ws, n).value;
            const double a_big = window_point_time(big, wb, n).value;
            CHECK(a_big <= a_small);
        }
    }
}

TEST_CASE("essential edges: unique path means all edges essential") {
    auto g = build_box_cylinder(4, 0, 2, 0);
    auto w = sample_weights(g, WeightDistribution::exponential(1.0), 8, 0);
    auto rep = essential_edge_count(g, w, PassageVariant::cylinder_point);
    CHECK(rep.essential_count == 4);
}

TEST_CASE("essential edges: tie between disjoint routes means none essential") {
    auto g = square_graph();
    // bottom route weight 3 equals top route 1+1+1
    auto w = square_weights(g, 1.0, 3.0, 1.0, 1.0);
    auto rep = essential_edge_count(g, w, PassageVariant::cylinder_point);
    CHECK(rep.essential_count == 0);
    CHECK(rep.candidates_tested >= 1);
}

TEST_CASE("essential edge probes agree with deletion oracle") {
    auto g = build_box_cylinder(4, 1, 2, 0);
    auto w = sample_weights(g, WeightDistribution::exponential(1.0), 21, 2);
    auto base = cylinder_point_time(g, w);
    auto rep = essential_edge_count(g, w, PassageVariant::cylinder_point);
    std::set<std::uint32_t> essential(rep.essential_edges.begin(), rep.essential_edges.end());
    for (auto e : base.geodesic) {
        std::vector<std::uint32_t> forbidden{e};
        auto probe = cylinder_point_time(g, w, nullptr, &forbidden);
        const bool increased = probe.disconnected || probe.value > base.value;
        CHECK(essential.count(e) == (increased ? 1u : 0u));
        if (!increased) CHECK(probe.value == base.value);
    }
    for (auto e : rep.essential_edges)
        CHECK(std::find(base.geodesic.begin(), base.geodesic.end(), e) != base.geodesic.end());
}

TEST_CASE("search rejects mismatched weight configs") {
    auto g1 = build_box_cylinder(3, 1, 2, 0);
    auto g2 = build_box_cylinder(4, 1, 2, 0);
    auto w = sample_weights(g1, WeightDistribution::exponential(1.0), 0, 0);
    CHECK_THROWS_AS(cylinder_point_time(g2, w), std::invalid_argument);
}

TEST_CASE("span violations are rejected") {
    auto g = build_box_cylinder(3, 1, 2, 0);
    auto w = sample_weights(g, WeightDistribution::exponential(1.0), 0, 0);
    CHECK_THROWS_AS(side_to_side_time(g, w, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(side_to_side_time(g, w, 0, 5), std::invalid_argument);
}
