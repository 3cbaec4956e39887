#include "fpcyl/passage.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace fpcyl {

void PassageScratch::reset(std::size_t vertex_count) {
    dist.assign(vertex_count, std::numeric_limits<double>::infinity());
    pred.assign(vertex_count, -1);
    settled.assign(vertex_count, 0);
    heap.clear();
}

PassageResult shortest_path(const CylinderGraph& graph, const WeightConfig& weights,
                            const std::vector<std::uint32_t>& sources,
                            const std::vector<std::uint32_t>& targets,
                            const SearchOptions& opts, PassageScratch* scratch) {
    if (weights.enumeration_hash != graph.enumeration_hash())
        throw std::invalid_argument("weight config does not belong to this graph");
    if (sources.empty() || targets.empty())
        throw std::invalid_argument("shortest_path needs nonempty source and target sets");

    PassageScratch local;
    PassageScratch& s = scratch ? *scratch : local;
    s.reset(graph.vertex_count());

    const int lo = opts.col_lo.value_or(graph.col_lo());
    const int hi = opts.col_hi.value_or(graph.col_hi());
    const auto* forbidden = opts.forbidden;
    auto is_forbidden = [forbidden](std::uint32_t e) {
        return forbidden && std::binary_search(forbidden->begin(), forbidden->end(), e);
    };

    // Min-heap on (dist, vertex); equal distances pop the smaller vertex id
    // first, which keeps the whole search deterministic.
    auto& heap = s.heap;
    const auto heap_greater = std::greater<std::pair<double, std::uint32_t>>{};
    auto heap_push = [&](double d, std::uint32_t v) {
        heap.emplace_back(d, v);
        std::push_heap(heap.begin(), heap.end(), heap_greater);
    };

    for (auto src : sources) {
        const int c = graph.column_of_vertex(src);
        if (c < lo || c > hi) throw std::invalid_argument("source outside column restriction");
        s.dist[src] = 0.0;
        heap_push(0.0, src);
    }

    while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), heap_greater);
        const auto [du, u] = heap.back();
        heap.pop_back();
        if (s.settled[u]) continue;
        s.settled[u] = 1;
        for (const auto* arc = graph.arcs_begin(u); arc != graph.arcs_end(u); ++arc) {
            if (is_forbidden(arc->edge)) continue;
            const std::uint32_t v = arc->to;
            const int cv = graph.column_of_vertex(v);
            if (cv < lo || cv > hi) continue;
            const double nd = du + weights.weights[arc->edge];
            if (nd < s.dist[v]) {
                s.dist[v] = nd;
                s.pred[v] = arc->edge;
                heap_push(nd, v);
            } else if (nd == s.dist[v] && !s.settled[v] && s.pred[v] >= 0 &&
                       arc->edge < static_cast<std::uint32_t>(s.pred[v])) {
                s.pred[v] = arc->edge;
            }
        }
    }

    // Best target: smallest distance, then smallest vertex id.
    std::uint32_t best = targets[0];
    bool found = false;
    for (auto t : targets) {
        const int c = graph.column_of_vertex(t);
        if (c < lo || c > hi) throw std::invalid_argument("target outside column restriction");
        if (!std::isfinite(s.dist[t])) continue;
        if (!found || s.dist[t] < s.dist[best] || (s.dist[t] == s.dist[best] && t < best)) {
            best = t;
            found = true;
        }
    }

    PassageResult res;
    if (!found) {
        res.disconnected = true;
        return res;
    }

    std::uint32_t v = best;
    while (s.pred[v] >= 0) {
        const auto eid = static_cast<std::uint32_t>(s.pred[v]);
        res.geodesic.push_back(eid);
        const auto& e = graph.edge(eid);
        v = (e.u == v) ? e.w : e.u;
    }
    std::reverse(res.geodesic.begin(), res.geodesic.end());
    res.pi = res.geodesic.size();

    // Fixed-order re-sum; this is the reported value.
    double total = 0.0;
    for (auto eid : res.geodesic) total += weights.weights[eid];
    res.value = total;
    res.disconnected = false;
    return res;
}

PassageResult side_to_side_time(const CylinderGraph& graph, const WeightConfig& weights,
                                int col_a, int col_b, PassageScratch* scratch,
                                const std::vector<std::uint32_t>* forbidden) {
    if (col_a >= col_b || col_a < graph.col_lo() || col_b > graph.col_hi())
        throw std::invalid_argument("side_to_side needs col_lo <= a < b <= col_hi");
    const auto v = static_cast<std::uint32_t>(graph.base_vertex_count());
    std::vector<std::uint32_t> sources(v), targets(v);
    for (std::uint32_t i = 0; i < v; ++i) {
        sources[i] = graph.vertex_id(col_a, i);
        targets[i] = graph.vertex_id(col_b, i);
    }
    SearchOptions opts;
    opts.col_lo = col_a;
    opts.col_hi = col_b;
    opts.forbidden = forbidden;
    auto res = shortest_path(graph, weights, sources, targets, opts, scratch);
    res.variant = PassageVariant::side_to_side;
    return res;
}

PassageResult point_to_point_time(const CylinderGraph& graph, const WeightConfig& weights,
                                  int col_a, int col_b, PassageScratch* scratch,
                                  const std::vector<std::uint32_t>* forbidden) {
    if (col_a >= col_b || col_a < graph.col_lo() || col_b > graph.col_hi())
        throw std::invalid_argument("point_to_point needs col_lo <= a < b <= col_hi");
    SearchOptions opts;
    opts.col_lo = col_a;
    opts.col_hi = col_b;
    opts.forbidden = forbidden;
    auto res = shortest_path(graph, weights, {graph.origin_vertex(col_a)},
                             {graph.origin_vertex(col_b)}, opts, scratch);
    res.variant = PassageVariant::cylinder_point;
    return res;
}

PassageResult cylinder_point_time(const CylinderGraph& graph, const WeightConfig& weights,
                                  PassageScratch* scratch,
                                  const std::vector<std::uint32_t>* forbidden) {
    if (graph.col_lo() != 0)
        throw std::invalid_argument("cylinder_point_time expects a graph spanning [0,n]");
    return point_to_point_time(graph, weights, 0, graph.col_hi(), scratch, forbidden);
}

PassageResult window_point_time(const CylinderGraph& graph, const WeightConfig& weights, int n,
                                PassageScratch* scratch,
                                const std::vector<std::uint32_t>* forbidden) {
    if (n < 1 || graph.col_lo() > 0 || graph.col_hi() < n)
        throw std::invalid_argument("window must contain [0,n]");
    SearchOptions opts;
    opts.forbidden = forbidden;
    auto res = shortest_path(graph, weights, {graph.origin_vertex(0)}, {graph.origin_vertex(n)},
                             opts, scratch);
    res.variant = PassageVariant::strip_point;
    return res;
}

namespace {

// True when the geodesic visits a boundary column of the window at a
// non-endpoint vertex.
bool touches_window_boundary(const CylinderGraph& graph, const PassageResult& res, int n) {
    const std::uint32_t start = graph.origin_vertex(0);
    const std::uint32_t goal = graph.origin_vertex(n);
    std::uint32_t at = start;
    auto check = [&](std::uint32_t v) {
        if (v == start || v == goal) return false;
        const int c = graph.column_of_vertex(v);
        return c <= graph.col_lo() || c >= graph.col_hi();
    };
    if (check(start)) return true;
    for (auto eid : res.geodesic) {
        const auto& e = graph.edge(eid);
        at = (e.u == at) ? e.w : e.u;
        if (check(at)) return true;
    }
    return false;
}

}  // namespace

StripOutcome strip_point_time(int n, const GraphSpec& base, const WeightDistribution& dist,
                              std::uint64_t master_seed, std::uint64_t stream_id,
                              const StripOptions& opts, PassageScratch* scratch) {
    if (n < 1) throw std::invalid_argument("strip length n must be >= 1");
    int margin = std::max(0, opts.initial_margin);
    const long cap = static_cast<long>(opts.cap_factor) * n;

    CylinderGraph graph(-margin, n + margin, base, opts.vertex_budget);
    WeightConfig weights = sample_weights(graph, dist, master_seed, stream_id);

    for (std::uint64_t round = 1;; ++round) {
        PassageResult res = window_point_time(graph, weights, n, scratch);
        if (res.disconnected)
            throw std::logic_error("strip search disconnected on an intact window");
        if (!touches_window_boundary(graph, res, n)) {
            res.window_margin_used = margin;
            return StripOutcome{std::move(res), std::move(graph), std::move(weights)};
        }
        const int next = margin == 0 ? 1 : 2 * margin;
        if (next > cap)
            throw margin_error("strip window margin " + std::to_string(next) + " exceeds cap " +
                               std::to_string(cap) + " (n=" + std::to_string(n) +
                               ", stream=" + std::to_string(stream_id) + ")");
        CylinderGraph bigger(-next, n + next, base, opts.vertex_budget);
        WeightConfig extended = extend_weights(
            graph, weights, bigger, dist, RngStream::derive_sub(master_seed, stream_id, round));
        graph = std::move(bigger);
        weights = std::move(extended);
        margin = next;
    }
}

EssentialEdgeReport essential_edges_for_query(const CylinderGraph& graph,
                                              const WeightConfig& weights,
                                              const std::vector<std::uint32_t>& sources,
                                              const std::vector<std::uint32_t>& targets,
                                              const SearchOptions& opts,
                                              PassageScratch* scratch) {
    const PassageResult base = shortest_path(graph, weights, sources, targets, opts, scratch);
    if (base.disconnected)
        throw std::invalid_argument("essential_edge_count requires a finite passage value");

    EssentialEdgeReport report;
    report.candidates_tested = base.geodesic.size();
    const double guard = 1e-12 * std::max(1.0, std::abs(base.value));
    for (auto eid : base.geodesic) {
        std::vector<std::uint32_t> forbidden{eid};
        SearchOptions probe_opts = opts;
        probe_opts.forbidden = &forbidden;
        PassageResult probe = shortest_path(graph, weights, sources, targets, probe_opts, scratch);
        if (probe.disconnected || probe.value > base.value + guard) {
            report.essential_edges.push_back(eid);
        }
    }
    report.essential_count = report.essential_edges.size();
    return report;
}

EssentialEdgeReport essential_edge_count(const CylinderGraph& graph, const WeightConfig& weights,
                                         PassageVariant variant, PassageScratch* scratch) {
    const auto v = static_cast<std::uint32_t>(graph.base_vertex_count());
    SearchOptions opts;
    std::vector<std::uint32_t> sources, targets;
    switch (variant) {
        case PassageVariant::side_to_side:
            for (std::uint32_t i = 0; i < v; ++i) {
                sources.push_back(graph.vertex_id(graph.col_lo(), i));
                targets.push_back(graph.vertex_id(graph.col_hi(), i));
            }
            break;
        case PassageVariant::cylinder_point:
            if (graph.col_lo() != 0)
                throw std::invalid_argument("cylinder_point expects a graph spanning [0,n]");
            sources.push_back(graph.origin_vertex(0));
            targets.push_back(graph.origin_vertex(graph.col_hi()));
            break;
        case PassageVariant::strip_point:
            // Point-to-point with no column restriction; for windows wider
            // than [0,n] use essential_edges_for_query with explicit endpoints.
            if (graph.col_lo() != 0)
                throw std::invalid_argument("strip variant here expects a graph spanning [0,n]");
            sources.push_back(graph.origin_vertex(0));
            targets.push_back(graph.origin_vertex(graph.col_hi()));
            break;
    }
    return essential_edges_for_query(graph, weights, sources, targets, opts, scratch);
}

}  // namespace fpcyl
