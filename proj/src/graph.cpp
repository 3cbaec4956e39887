#include "fpcyl/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace fpcyl {

GraphSpec GraphSpec::box(int half_width, int dimension) {
    if (dimension < 2) throw std::invalid_argument("box base requires dimension >= 2");
    if (half_width < 0) throw std::invalid_argument("box half-width must be nonnegative");
    GraphSpec s;
    s.kind = Kind::box;
    s.half_width = half_width;
    s.dimension = dimension;
    return s;
}

GraphSpec GraphSpec::explicit_graph(std::size_t vertex_count,
                                    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                    std::uint32_t origin) {
    if (vertex_count == 0) throw std::invalid_argument("explicit base needs at least one vertex");
    if (origin >= vertex_count) throw std::invalid_argument("origin is not a valid vertex id");
    for (const auto& [u, w] : edges) {
        if (u >= vertex_count || w >= vertex_count)
            throw std::invalid_argument("edge endpoint out of range");
        if (u == w) throw std::invalid_argument("self-loops are not allowed");
    }
    GraphSpec s;
    s.kind = Kind::explicit_graph;
    s.vertex_count = vertex_count;
    s.edges = std::move(edges);
    s.origin = origin;
    return s;
}

GraphSpec GraphSpec::from_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open base graph file: " + path);
    std::size_t v = 0, k = 0;
    std::uint32_t origin = 0;
    if (!(in >> v >> k >> origin))
        throw std::runtime_error("malformed base graph header in " + path);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::uint32_t u = 0, w = 0;
        if (!(in >> u >> w))
            throw std::runtime_error("truncated edge list in " + path);
        edges.emplace_back(u, w);
    }
    return explicit_graph(v, std::move(edges), origin);
}

bool BaseGraph::is_connected(std::uint32_t* offending) const {
    if (vertex_count == 0) return false;
    std::vector<std::vector<std::uint32_t>> adj(vertex_count);
    for (const auto& [u, w] : edges) {
        adj[u].push_back(w);
        adj[w].push_back(u);
    }
    std::vector<char> seen(vertex_count, 0);
    std::deque<std::uint32_t> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (auto w : adj[u]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                queue.push_back(w);
            }
        }
    }
    if (reached == vertex_count) return true;
    if (offending) {
        for (std::uint32_t i = 0; i < vertex_count; ++i)
            if (!seen[i]) {
                *offending = i;
                break;
            }
    }
    return false;
}

namespace {

BaseGraph realize_box(int h, int d) {
    const int dims = d - 1;
    const int side = 2 * h + 1;
    std::size_t v = 1;
    for (int i = 0; i < dims; ++i) v *= static_cast<std::size_t>(side);

    BaseGraph g;
    g.vertex_count = v;
    g.coords.resize(v);

    // Row-major over coordinates in [-h, h]^{dims}; origin is the zero vector.
    std::vector<int> c(dims, -h);
    for (std::size_t id = 0; id < v; ++id) {
        g.coords[id] = c;
        bool all_zero = std::all_of(c.begin(), c.end(), [](int x) { return x == 0; });
        if (all_zero) g.origin = static_cast<std::uint32_t>(id);
        for (int i = dims - 1; i >= 0; --i) {
            if (++c[i] <= h) break;
            c[i] = -h;
        }
    }

    // Strides for coordinate -> id (last coordinate fastest).
    std::vector<std::size_t> stride(dims, 1);
    for (int i = dims - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(side);

    for (std::size_t id = 0; id < v; ++id) {
        for (int i = 0; i < dims; ++i) {
            if (g.coords[id][i] < h) {
                std::size_t nb = id + stride[i];
                g.edges.emplace_back(static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(nb));
            }
        }
    }
    return g;
}

}  // namespace

BaseGraph realize_base(const GraphSpec& spec) {
    if (spec.kind == GraphSpec::Kind::box) return realize_box(spec.half_width, spec.dimension);
    BaseGraph g;
    g.vertex_count = spec.vertex_count;
    g.edges = spec.edges;
    g.origin = spec.origin;
    std::uint32_t offending = 0;
    if (!g.is_connected(&offending))
        throw std::invalid_argument("base graph is disconnected (vertex " +
                                    std::to_string(offending) + " unreachable from 0)");
    return g;
}

GraphMetrics graph_metrics(const GraphSpec& spec) {
    BaseGraph g = realize_base(spec);
    GraphMetrics m;
    m.vertex_count = g.vertex_count;
    m.edge_count = g.edges.size();

    std::vector<std::vector<std::uint32_t>> adj(g.vertex_count);
    for (const auto& [u, w] : g.edges) {
        adj[u].push_back(w);
        adj[w].push_back(u);
    }
    // BFS from every vertex; base graphs stay small at desk scale.
    std::vector<int> dist(g.vertex_count);
    std::deque<std::uint32_t> queue;
    int diameter = 0;
    for (std::uint32_t s = 0; s < g.vertex_count; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        queue.assign(1, s);
        while (!queue.empty()) {
            auto u = queue.front();
            queue.pop_front();
            for (auto w : adj[u]) {
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    diameter = std::max(diameter, dist[w]);
                    queue.push_back(w);
                }
            }
        }
    }
    m.diameter = diameter;
    return m;
}

CylinderGraph::CylinderGraph(int col_lo, int col_hi, GraphSpec base_spec,
                             std::size_t vertex_budget)
    : col_lo_(col_lo), col_hi_(col_hi), base_spec_(std::move(base_spec)) {
    if (col_hi_ <= col_lo_) throw std::invalid_argument("cylinder needs at least two columns");
    base_ = realize_base(base_spec_);

    const std::size_t cols = static_cast<std::size_t>(col_hi_ - col_lo_ + 1);
    const std::size_t v = base_.vertex_count;
    if (v != 0 && cols > vertex_budget / v) {
        throw budget_error("cylinder vertex count " + std::to_string(cols) + "*" +
                           std::to_string(v) + " exceeds budget " +
                           std::to_string(vertex_budget));
    }
    vertex_count_ = cols * v;
    if (vertex_count_ >= UINT32_MAX)
        throw budget_error("cylinder vertex count " + std::to_string(vertex_count_) +
                           " overflows the dense 32-bit index");
    const std::size_t k = base_.edges.size();
    edges_.reserve((cols - 1) * v + cols * k);

    for (int c = col_lo_; c <= col_hi_; ++c) {
        for (const auto& [bu, bw] : base_.edges)
            edges_.push_back({vertex_id(c, bu), vertex_id(c, bw)});
        if (c < col_hi_) {
            for (std::uint32_t bv = 0; bv < v; ++bv)
                edges_.push_back({vertex_id(c, bv), vertex_id(c + 1, bv)});
        }
    }

    // CSR adjacency.
    std::vector<std::uint32_t> degree(vertex_count_, 0);
    for (const auto& e : edges_) {
        ++degree[e.u];
        ++degree[e.w];
    }
    arc_offsets_.assign(vertex_count_ + 1, 0);
    for (std::size_t i = 0; i < vertex_count_; ++i)
        arc_offsets_[i + 1] = arc_offsets_[i] + degree[i];
    arcs_.resize(arc_offsets_.back());
    std::vector<std::size_t> cursor(arc_offsets_.begin(), arc_offsets_.end() - 1);
    for (std::size_t eid = 0; eid < edges_.size(); ++eid) {
        const auto& e = edges_[eid];
        arcs_[cursor[e.u]++] = {e.w, static_cast<std::uint32_t>(eid)};
        arcs_[cursor[e.w]++] = {e.u, static_cast<std::uint32_t>(eid)};
    }

    // FNV-1a over the structural description.
    std::uint64_t hsh = 1469598103934665603ULL;
    auto mix = [&hsh](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            hsh ^= (x >> (8 * i)) & 0xff;
            hsh *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(col_lo_)));
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(col_hi_)));
    mix(v);
    for (const auto& e : edges_) mix((static_cast<std::uint64_t>(e.u) << 32) | e.w);
    enumeration_hash_ = hsh;
}

bool CylinderGraph::edge_is_horizontal(std::size_t eid) const {
    return edge_slot(eid) >= base_.edges.size();
}

int CylinderGraph::edge_column(std::size_t eid) const {
    const std::size_t block = base_.edges.size() + base_.vertex_count;
    return col_lo_ + static_cast<int>(block == 0 ? 0 : eid / block);
}

std::size_t CylinderGraph::edge_slot(std::size_t eid) const {
    const std::size_t block = base_.edges.size() + base_.vertex_count;
    return block == 0 ? 0 : eid % block;
}

std::size_t CylinderGraph::edge_id(int column, bool horizontal, std::size_t slot) const {
    const std::size_t block = base_.edges.size() + base_.vertex_count;
    const std::size_t base_off = static_cast<std::size_t>(column - col_lo_) * block;
    return base_off + (horizontal ? base_.edges.size() + slot : slot);
}

CylinderGraph build_box_cylinder(int n, int h, int d, int margin, std::size_t vertex_budget) {
    if (n < 1) throw std::invalid_argument("column count n must be >= 1");
    if (margin < 0) throw std::invalid_argument("margin must be >= 0");
    return CylinderGraph(-margin, n + margin, GraphSpec::box(h, d), vertex_budget);
}

CylinderGraph build_product_cylinder(int n, const GraphSpec& base, std::size_t vertex_budget) {
    if (n < 1) throw std::invalid_argument("column count n must be >= 1");
    return CylinderGraph(0, n, base, vertex_budget);
}

}  // namespace fpcyl
