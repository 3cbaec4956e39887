// graph.hpp — base graphs G and cylinder product graphs [a,b] x G.
//
// A cylinder is the product of an integer column range with a finite
// connected base graph. Vertices are densely indexed, edges follow one
// canonical enumeration (columns ascending; per column: vertical edges in
// base-edge order, then horizontal edges to the next column in base-vertex
// order). All passage-time code and all weight sampling rely on that order
// being stable.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fpcyl {

class budget_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GraphSpec {
    enum class Kind { box, explicit_graph };

    Kind kind = Kind::box;

    // box: [-h,h]^{d-1} with nearest-neighbor edges, origin at zero.
    int half_width = 0;
    int dimension = 2;

    // explicit graph
    std::size_t vertex_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::uint32_t origin = 0;

    static GraphSpec box(int half_width, int dimension);
    static GraphSpec explicit_graph(std::size_t vertex_count,
                                    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges,
                                    std::uint32_t origin);
    // Plain text: first line "v k origin", then k lines "u w" (0-based ids).
    static GraphSpec from_edge_list_file(const std::string& path);
};

struct GraphMetrics {
    std::size_t vertex_count = 0;
    std::size_t edge_count = 0;
    int diameter = 0;
};

// Realized base graph: explicit vertex/edge lists regardless of spec kind.
struct BaseGraph {
    std::size_t vertex_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::uint32_t origin = 0;

    // box only: lattice coordinates per vertex, row-major over [-h,h]^{d-1}
    std::vector<std::vector<int>> coords;

    bool is_connected(std::uint32_t* offending = nullptr) const;
};

BaseGraph realize_base(const GraphSpec& spec);
GraphMetrics graph_metrics(const GraphSpec& base);

class CylinderGraph {
public:
    struct Edge {
        std::uint32_t u, w;
    };

    // Adjacency entry: neighboring vertex plus the id of the connecting edge.
    struct Arc {
        std::uint32_t to;
        std::uint32_t edge;
    };

    CylinderGraph(int col_lo, int col_hi, GraphSpec base_spec,
                  std::size_t vertex_budget = kDefaultVertexBudget);

    static constexpr std::size_t kDefaultVertexBudget = 10'000'000;

    int col_lo() const { return col_lo_; }
    int col_hi() const { return col_hi_; }
    int column_count() const { return col_hi_ - col_lo_ + 1; }

    const GraphSpec& base_spec() const { return base_spec_; }
    const BaseGraph& base() const { return base_; }
    std::size_t base_vertex_count() const { return base_.vertex_count; }
    std::size_t base_edge_count() const { return base_.edges.size(); }

    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }

    std::uint32_t vertex_id(int column, std::uint32_t base_vertex) const {
        return static_cast<std::uint32_t>(column - col_lo_) *
                   static_cast<std::uint32_t>(base_.vertex_count) +
               base_vertex;
    }
    std::pair<int, std::uint32_t> vertex_of(std::uint32_t id) const {
        const auto v = static_cast<std::uint32_t>(base_.vertex_count);
        return {col_lo_ + static_cast<int>(id / v), id % v};
    }
    std::uint32_t origin_vertex(int column) const { return vertex_id(column, base_.origin); }
    int column_of_vertex(std::uint32_t id) const { return vertex_of(id).first; }

    const Edge& edge(std::size_t eid) const { return edges_[eid]; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool edge_is_horizontal(std::size_t eid) const;
    // Column an edge belongs to in the canonical enumeration (left endpoint
    // column for horizontal edges).
    int edge_column(std::size_t eid) const;
    // Index of the edge within its column block: vertical edges come first
    // (base-edge order), then horizontal edges (base-vertex order).
    std::size_t edge_slot(std::size_t eid) const;
    std::size_t edge_id(int column, bool horizontal, std::size_t slot) const;

    // CSR neighborhood
    const Arc* arcs_begin(std::uint32_t vertex) const { return arcs_.data() + arc_offsets_[vertex]; }
    const Arc* arcs_end(std::uint32_t vertex) const { return arcs_.data() + arc_offsets_[vertex + 1]; }

    // Stable hash of the edge enumeration; recorded in sampled weight
    // configurations so a config cannot silently be applied to another graph.
    std::uint64_t enumeration_hash() const { return enumeration_hash_; }

private:
    int col_lo_, col_hi_;
    GraphSpec base_spec_;
    BaseGraph base_;
    std::size_t vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> arc_offsets_;
    std::vector<Arc> arcs_;
    std::uint64_t enumeration_hash_ = 0;
};

// Cylinder over [-margin, n+margin] with base box(h, d).
CylinderGraph build_box_cylinder(int n, int h, int d, int margin,
                                 std::size_t vertex_budget = CylinderGraph::kDefaultVertexBudget);

// Cylinder over [0, n] with an arbitrary connected base.
CylinderGraph build_product_cylinder(int n, const GraphSpec& base,
                                     std::size_t vertex_budget = CylinderGraph::kDefaultVertexBudget);

}  // namespace fpcyl
