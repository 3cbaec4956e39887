// passage.hpp — exact passage-time functionals on weighted cylinders.
//
// Everything is a single-source/multi-source Dijkstra run with nonnegative
// weights, an optional column restriction, and an optional forbidden edge
// set. Three public functionals:
//   side_to_side_time  T_{a,b}: left column set to right column set,
//                      restricted to columns [a,b];
//   cylinder_point_time  t_n: (0,o) to (n,o), restricted to [0,n];
//   strip_point_time  a_n: (0,o) to (n,o) on a window [-m, n+m], enlarging
//                      the window until the geodesic stays off its boundary.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fpcyl/graph.hpp"
#include "fpcyl/weights.hpp"

namespace fpcyl {

enum class PassageVariant { side_to_side, cylinder_point, strip_point };

struct PassageResult {
    PassageVariant variant = PassageVariant::cylinder_point;
    double value = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> geodesic;  // edge ids, source to target order
    std::size_t pi = 0;                   // geodesic edge count
    int window_margin_used = 0;           // strip variant only
    bool disconnected = false;
};

// Reusable search buffers; one per worker thread.
class PassageScratch {
public:
    void reset(std::size_t vertex_count);

    std::vector<double> dist;
    std::vector<std::int64_t> pred;  // predecessor edge id, -1 for roots
    std::vector<std::uint8_t> settled;
    std::vector<std::pair<double, std::uint32_t>> heap;
};

struct SearchOptions {
    // Inclusive column restriction; vertices outside are not expanded.
    std::optional<int> col_lo;
    std::optional<int> col_hi;
    // Sorted list of forbidden edge ids.
    const std::vector<std::uint32_t>* forbidden = nullptr;
};

// Exact minimum over paths from any source to any target. The reported value
// is the re-sum of the extracted geodesic's weights in path order. Ties are
// broken toward the lexicographically smallest predecessor edge id and then
// the smallest attaining target id.
PassageResult shortest_path(const CylinderGraph& graph, const WeightConfig& weights,
                            const std::vector<std::uint32_t>& sources,
                            const std::vector<std::uint32_t>& targets,
                            const SearchOptions& opts = {}, PassageScratch* scratch = nullptr);

PassageResult side_to_side_time(const CylinderGraph& graph, const WeightConfig& weights,
                                int col_a, int col_b, PassageScratch* scratch = nullptr,
                                const std::vector<std::uint32_t>* forbidden = nullptr);

// t over the graph's own span, which must start at column 0.
PassageResult cylinder_point_time(const CylinderGraph& graph, const WeightConfig& weights,
                                  PassageScratch* scratch = nullptr,
                                  const std::vector<std::uint32_t>* forbidden = nullptr);

// (a,o) -> (b,o) restricted to columns [a,b]; t_n on any sub-span.
PassageResult point_to_point_time(const CylinderGraph& graph, const WeightConfig& weights,
                                  int col_a, int col_b, PassageScratch* scratch = nullptr,
                                  const std::vector<std::uint32_t>* forbidden = nullptr);

// (0,o) -> (n,o) with no column restriction (the strip functional evaluated
// on a fixed window graph).
PassageResult window_point_time(const CylinderGraph& graph, const WeightConfig& weights, int n,
                                PassageScratch* scratch = nullptr,
                                const std::vector<std::uint32_t>* forbidden = nullptr);

class margin_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StripOptions {
    int initial_margin = 4;
    // Enlargement stops (with margin_error) once margin would exceed cap_factor * n.
    int cap_factor = 8;
    std::size_t vertex_budget = CylinderGraph::kDefaultVertexBudget;
};

// Strip computation result: the passage result plus the realized window and
// its weights, so callers can evaluate T and t on the same configuration.
struct StripOutcome {
    PassageResult result;
    CylinderGraph graph;
    WeightConfig weights;
};

StripOutcome strip_point_time(int n, const GraphSpec& base, const WeightDistribution& dist,
                              std::uint64_t master_seed, std::uint64_t stream_id,
                              const StripOptions& opts = {}, PassageScratch* scratch = nullptr);

struct EssentialEdgeReport {
    std::size_t essential_count = 0;
    std::size_t candidates_tested = 0;
    std::vector<std::uint32_t> essential_edges;
};

// An edge is essential when every minimizing path uses it; equivalently,
// deleting it strictly raises the passage value. Candidates are the edges of
// one geodesic (essential edges lie on every geodesic).
EssentialEdgeReport essential_edge_count(const CylinderGraph& graph, const WeightConfig& weights,
                                         PassageVariant variant,
                                         PassageScratch* scratch = nullptr);

// Same deletion probe for an arbitrary source/target/restriction query.
EssentialEdgeReport essential_edges_for_query(const CylinderGraph& graph,
                                              const WeightConfig& weights,
                                              const std::vector<std::uint32_t>& sources,
                                              const std::vector<std::uint32_t>& targets,
                                              const SearchOptions& opts,
                                              PassageScratch* scratch = nullptr);

}  // namespace fpcyl
