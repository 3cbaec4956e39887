// montecarlo.hpp — reproducible replication harness.
//
// Replicate i draws from stream (master_seed, namespace + i), so results are
// independent of execution order and worker count. Summaries are accumulated
// in replicate order after all workers finish, which makes manifests
// bit-identical across worker counts.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpcyl/decomposition.hpp"
#include "fpcyl/graph.hpp"
#include "fpcyl/passage.hpp"
#include "fpcyl/weights.hpp"

namespace fpcyl {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestSchemaVersion = 1;

// Streaming central-moment accumulator, orders 2..8, with pairwise merge.
class MomentAccumulator {
public:
    static constexpr int kMaxOrder = 8;

    void add(double x);
    static MomentAccumulator merged(const MomentAccumulator& a, const MomentAccumulator& b);
    // Reconstruction from serialized state.
    static MomentAccumulator from_parts(std::uint64_t count, double mean,
                                        const std::array<double, kMaxOrder - 1>& power_sums,
                                        double min, double max);

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double min() const { return min_; }
    double max() const { return max_; }
    // Raw centered power sum M_p = sum (x - mean)^p, p in 2..8.
    double power_sum(int p) const { return sums_[p - 2]; }
    // Central moment E[(X-mean)^p] (population, plug-in).
    double central_moment(int p) const;
    double variance_population() const;
    double variance_sample() const;  // divisor count-1
    double std_error_of_mean() const;

    bool operator==(const MomentAccumulator& o) const;

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    std::array<double, kMaxOrder - 1> sums_{};  // M2..M8
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
};

enum class Functional { T, t, a, pi, L, blocks };

std::string functional_name(Functional f);
Functional functional_from_name(const std::string& name);

struct ExperimentPlan {
    int n = 1;
    GraphSpec base = GraphSpec::box(0, 2);
    WeightDistribution dist = WeightDistribution::exponential(1.0);
    std::vector<Functional> functionals{Functional::T};
    int block_length = 0;  // required when blocks is requested
    std::uint64_t replicates = 1;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_namespace = 0;
    bool retain_samples = true;
    int margin_initial = 4;
    int margin_cap_factor = 8;
    std::size_t vertex_budget = CylinderGraph::kDefaultVertexBudget;

    void validate() const;
    bool wants(Functional f) const;
};

struct RunManifest {
    int schema_version = kManifestSchemaVersion;
    std::string tool_version = kToolVersion;
    ExperimentPlan plan;
    double wall_seconds = 0.0;
    std::string timestamp;  // isolated so determinism tests can mask it
    std::vector<std::pair<std::string, MomentAccumulator>> summaries;
    std::string samples_file;  // empty when raw samples were not retained
};

struct RunResult {
    RunManifest manifest;
    std::vector<std::string> sample_names;           // functional column names
    std::vector<std::vector<double>> sample_columns;  // [name][replicate]

    const std::vector<double>& column(const std::string& name) const;
    const MomentAccumulator& summary(const std::string& name) const;
};

RunResult run_experiment(const ExperimentPlan& plan, int workers = 1);

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class schema_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes manifest.json plus samples.csv (17 significant digits) into dir.
void persist_results(const RunResult& result, const std::string& dir);
RunResult load_results(const std::string& dir);

// JSON round-trip helpers for manifests (used by persist/load and the CLI).
std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

// Recompute summaries from raw columns and compare with stored ones.
bool summaries_consistent(const RunResult& result, double rel_tol = 1e-9);

struct SweepPoint {
    int n = 1;
    std::optional<int> h;        // box bases
    std::optional<double> alpha;  // h = floor(n^alpha)
};

struct SweepFailure {
    std::size_t point_index = 0;
    std::string message;
};

struct SweepOutcome {
    std::vector<RunResult> results;
    std::vector<SweepFailure> failures;
};

// One run per grid point; shared master seed, disjoint stream namespaces.
// Per-point failures are collected, not fatal to siblings.
SweepOutcome sweep(const ExperimentPlan& base_plan, const std::vector<SweepPoint>& grid,
                   int workers = 1);

int sweep_height(int n, double alpha);

// Joint samples of t_{m} at m = n*t_j over one weight configuration per
// replicate; the raw material of the Brownian-limit check.
struct DonskerPaths {
    int n = 0;
    std::vector<double> grid;                      // 0 < t_1 < ... <= 1
    std::vector<std::vector<double>> t_values;     // [replicate][grid index]
};

DonskerPaths sample_donsker_paths(const GraphSpec& base, int n, std::vector<double> grid,
                                  const WeightDistribution& dist, std::uint64_t master_seed,
                                  std::uint64_t stream_namespace, std::uint64_t replicates,
                                  int workers = 1);

// Independent draws of a sum of `terms` i.i.d. weights; the comparison law
// S_{mD} of the decomposition-error domination check.
std::vector<double> simulate_sum_samples(const WeightDistribution& dist, int terms,
                                         std::size_t count, std::uint64_t master_seed);

}  // namespace fpcyl
