#include "fpcyl/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fpcyl {

using nlohmann::json;

void MomentAccumulator::add(double x) {
    MomentAccumulator single;
    single.count_ = 1;
    single.mean_ = x;
    single.min_ = x;
    single.max_ = x;
    *this = merged(*this, single);
}

MomentAccumulator MomentAccumulator::merged(const MomentAccumulator& a,
                                            const MomentAccumulator& b) {
    if (a.count_ == 0) return b;
    if (b.count_ == 0) return a;

    MomentAccumulator out;
    const double na = static_cast<double>(a.count_);
    const double nb = static_cast<double>(b.count_);
    const double n = na + nb;
    const double delta = b.mean_ - a.mean_;

    out.count_ = a.count_ + b.count_;
    out.mean_ = a.mean_ + delta * nb / n;
    out.min_ = std::min(a.min_, b.min_);
    out.max_ = std::max(a.max_, b.max_);

    // Pairwise central-moment combination; higher orders consume the inputs'
    // lower orders, so everything is written into a fresh array.
    auto get = [](const MomentAccumulator& acc, int p) -> double {
        return p < 2 ? 0.0 : acc.sums_[p - 2];
    };
    static const double binom[kMaxOrder + 1][kMaxOrder + 1] = {
        {1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}, {1, 5, 10, 10, 5, 1},
        {1, 6, 15, 20, 15, 6, 1}, {1, 7, 21, 35, 35, 21, 7, 1},
        {1, 8, 28, 56, 70, 56, 28, 8, 1}};

    for (int p = 2; p <= kMaxOrder; ++p) {
        double m = get(a, p) + get(b, p);
        for (int k = 1; k <= p - 2; ++k) {
            m += binom[p][k] * (get(a, p - k) * std::pow(-delta * nb / n, k) +
                                get(b, p - k) * std::pow(delta * na / n, k));
        }
        m += std::pow(delta * na * nb / n, p) *
             (1.0 / std::pow(nb, p - 1) - std::pow(-1.0 / na, p - 1));
        out.sums_[p - 2] = m;
    }
    return out;
}

MomentAccumulator MomentAccumulator::from_parts(
    std::uint64_t count, double mean, const std::array<double, kMaxOrder - 1>& power_sums,
    double min, double max) {
    MomentAccumulator acc;
    acc.count_ = count;
    acc.mean_ = mean;
    acc.sums_ = power_sums;
    acc.min_ = min;
    acc.max_ = max;
    return acc;
}

double MomentAccumulator::central_moment(int p) const {
    if (p < 2 || p > kMaxOrder) throw std::invalid_argument("central moment order out of range");
    return count_ == 0 ? 0.0 : sums_[p - 2] / static_cast<double>(count_);
}

double MomentAccumulator::variance_population() const { return central_moment(2); }

double MomentAccumulator::variance_sample() const {
    if (count_ < 2) return 0.0;
    return sums_[0] / static_cast<double>(count_ - 1);
}

double MomentAccumulator::std_error_of_mean() const {
    if (count_ < 2) return 0.0;
    return std::sqrt(variance_sample() / static_cast<double>(count_));
}

bool MomentAccumulator::operator==(const MomentAccumulator& o) const {
    return count_ == o.count_ && mean_ == o.mean_ && sums_ == o.sums_ && min_ == o.min_ &&
           max_ == o.max_;
}

std::string functional_name(Functional f) {
    switch (f) {
        case Functional::T: return "T";
        case Functional::t: return "t";
        case Functional::a: return "a";
        case Functional::pi: return "pi";
        case Functional::L: return "L";
        case Functional::blocks: return "blocks";
    }
    return "?";
}

Functional functional_from_name(const std::string& name) {
    if (name == "T") return Functional::T;
    if (name == "t") return Functional::t;
    if (name == "a") return Functional::a;
    if (name == "pi") return Functional::pi;
    if (name == "L") return Functional::L;
    if (name == "blocks" || name == "Y") return Functional::blocks;
    throw std::invalid_argument("unknown functional: " + name);
}

void ExperimentPlan::validate() const {
    if (n < 1) throw std::invalid_argument("plan: n must be >= 1");
    if (replicates < 1) throw std::invalid_argument("plan: replicates must be >= 1");
    if (functionals.empty()) throw std::invalid_argument("plan: functional set is empty");
    if (wants(Functional::blocks) && (block_length < 1 || block_length > n))
        throw std::invalid_argument("plan: blocks functional needs 1 <= block_length <= n");
    if (margin_initial < 0) throw std::invalid_argument("plan: margin must be >= 0");
}

bool ExperimentPlan::wants(Functional f) const {
    return std::find(functionals.begin(), functionals.end(), f) != functionals.end();
}

namespace {

template <typename Fn>
void parallel_replicates(std::uint64_t total, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1) {
        PassageScratch scratch;
        for (std::uint64_t i = 0; i < total; ++i) fn(i, scratch);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::mutex err_mutex;
    std::string first_error;
    bool failed = false;
    auto body = [&]() {
        PassageScratch scratch;
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= total) return;
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (failed) return;
            }
            try {
                fn(i, scratch);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!failed) {
                    failed = true;
                    first_error = e.what();
                }
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failed) throw std::runtime_error(first_error);
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

const std::vector<double>& RunResult::column(const std::string& name) const {
    for (std::size_t i = 0; i < sample_names.size(); ++i)
        if (sample_names[i] == name) return sample_columns[i];
    throw std::out_of_range("no sample column named " + name);
}

const MomentAccumulator& RunResult::summary(const std::string& name) const {
    for (const auto& [nm, acc] : manifest.summaries)
        if (nm == name) return acc;
    throw std::out_of_range("no summary named " + name);
}

RunResult run_experiment(const ExperimentPlan& plan, int workers) {
    plan.validate();
    const auto start = std::chrono::steady_clock::now();

    const bool needs_a = plan.wants(Functional::a);
    const bool needs_t_search =
        plan.wants(Functional::t) || plan.wants(Functional::pi);
    const bool needs_T = plan.wants(Functional::T);
    const bool needs_L = plan.wants(Functional::L);
    const bool needs_blocks = plan.wants(Functional::blocks);

    RunResult result;
    for (Functional f : {Functional::T, Functional::t, Functional::a, Functional::pi,
                         Functional::L, Functional::blocks}) {
        if (!plan.wants(f)) continue;
        result.sample_names.push_back(f == Functional::blocks ? "Y" : functional_name(f));
        result.sample_columns.emplace_back(plan.replicates);
    }
    auto column_of = [&](const std::string& name) -> std::vector<double>& {
        for (std::size_t i = 0; i < result.sample_names.size(); ++i)
            if (result.sample_names[i] == name) return result.sample_columns[i];
        throw std::logic_error("missing column " + name);
    };

    // The [0,n] cylinder is shared by all replicates when the strip
    // functional is absent; strip runs own their windows.
    std::optional<CylinderGraph> shared;
    if (!needs_a) shared.emplace(0, plan.n, plan.base, plan.vertex_budget);

    parallel_replicates(plan.replicates, workers, [&](std::uint64_t i, PassageScratch& scratch) {
        const std::uint64_t sid = plan.stream_namespace + i;
        try {
            const CylinderGraph* graph = nullptr;
            WeightConfig weights;
            double a_value = 0.0;
            int a_margin = 0;
            std::optional<StripOutcome> strip;
            if (needs_a) {
                StripOptions sopts;
                sopts.initial_margin = plan.margin_initial;
                sopts.cap_factor = plan.margin_cap_factor;
                sopts.vertex_budget = plan.vertex_budget;
                strip = strip_point_time(plan.n, plan.base, plan.dist, plan.master_seed, sid,
                                         sopts, &scratch);
                graph = &strip->graph;
                weights = std::move(strip->weights);
                a_value = strip->result.value;
                a_margin = strip->result.window_margin_used;
                (void)a_margin;
            } else {
                graph = &*shared;
                weights = sample_weights(*shared, plan.dist, plan.master_seed, sid);
            }

            if (needs_a) column_of("a")[i] = a_value;
            if (needs_T)
                column_of("T")[i] = side_to_side_time(*graph, weights, 0, plan.n, &scratch).value;
            if (needs_t_search) {
                auto t_res = point_to_point_time(*graph, weights, 0, plan.n, &scratch);
                if (plan.wants(Functional::t)) column_of("t")[i] = t_res.value;
                if (plan.wants(Functional::pi))
                    column_of("pi")[i] = static_cast<double>(t_res.pi);
            }
            if (needs_L) {
                SearchOptions opts;
                opts.col_lo = 0;
                opts.col_hi = plan.n;
                auto rep = essential_edges_for_query(*graph, weights,
                                                     {graph->origin_vertex(0)},
                                                     {graph->origin_vertex(plan.n)}, opts,
                                                     &scratch);
                column_of("L")[i] = static_cast<double>(rep.essential_count);
            }
            if (needs_blocks) {
                auto dec = block_times(*graph, weights, plan.block_length, &scratch, plan.n);
                column_of("Y")[i] = dec.error;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("replicate " + std::to_string(i) + " (stream " +
                                     std::to_string(sid) + "): " + e.what());
        }
    });

    // Summaries in replicate order: independent of worker count.
    for (std::size_t c = 0; c < result.sample_names.size(); ++c) {
        MomentAccumulator acc;
        for (double x : result.sample_columns[c]) acc.add(x);
        result.manifest.summaries.emplace_back(result.sample_names[c], acc);
    }

    result.manifest.plan = plan;
    result.manifest.timestamp = now_iso8601();
    result.manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Raw samples are persisted up to 10^6 replicates; beyond that only the
    // summaries go to disk.
    result.manifest.samples_file =
        (plan.retain_samples && plan.replicates <= 1'000'000) ? "samples.csv" : "";
    return result;
}

namespace {

json base_to_json(const GraphSpec& base) {
    json j;
    if (base.kind == GraphSpec::Kind::box) {
        j["kind"] = "box";
        j["h"] = base.half_width;
        j["d"] = base.dimension;
    } else {
        j["kind"] = "explicit";
        j["v"] = base.vertex_count;
        j["origin"] = base.origin;
        json edges = json::array();
        for (const auto& [u, w] : base.edges) edges.push_back({u, w});
        j["edges"] = edges;
    }
    return j;
}

GraphSpec base_from_json(const json& j) {
    const std::string kind = j.at("kind");
    if (kind == "box") return GraphSpec::box(j.at("h"), j.at("d"));
    if (kind == "explicit") {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
        for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0), e.at(1));
        return GraphSpec::explicit_graph(j.at("v"), std::move(edges), j.at("origin"));
    }
    throw schema_error("unknown base graph kind: " + kind);
}

json dist_to_json(const WeightDistribution& dist) {
    json j;
    switch (dist.family()) {
        case WeightDistribution::Family::deterministic: j["family"] = "deterministic"; break;
        case WeightDistribution::Family::exponential: j["family"] = "exponential"; break;
        case WeightDistribution::Family::uniform: j["family"] = "uniform"; break;
        case WeightDistribution::Family::shifted_bernoulli:
            j["family"] = "shifted_bernoulli";
            break;
        case WeightDistribution::Family::empirical:
            j["family"] = "empirical";
            j["values"] = dist.empirical_values();
            j["probs"] = dist.empirical_probs();
            return j;
    }
    j["params"] = dist.params();
    return j;
}

WeightDistribution dist_from_json(const json& j) {
    const std::string fam = j.at("family");
    if (fam == "empirical")
        return WeightDistribution::empirical(j.at("values"), j.at("probs"));
    const std::vector<double> p = j.at("params");
    if (fam == "deterministic") return WeightDistribution::deterministic(p.at(0));
    if (fam == "exponential") return WeightDistribution::exponential(p.at(0));
    if (fam == "uniform") return WeightDistribution::uniform(p.at(0), p.at(1));
    if (fam == "shifted_bernoulli")
        return WeightDistribution::shifted_bernoulli(p.at(0), p.at(1), p.at(2));
    throw schema_error("unknown distribution family: " + fam);
}

json acc_to_json(const MomentAccumulator& acc) {
    json j;
    j["count"] = acc.count();
    j["mean"] = acc.mean();
    json sums = json::array();
    for (int p = 2; p <= MomentAccumulator::kMaxOrder; ++p) sums.push_back(acc.power_sum(p));
    j["power_sums"] = sums;
    j["min"] = acc.count() ? acc.min() : 0.0;
    j["max"] = acc.count() ? acc.max() : 0.0;
    return j;
}

MomentAccumulator acc_from_json(const json& j) {
    const std::uint64_t count = j.at("count");
    if (count == 0) return {};
    std::array<double, MomentAccumulator::kMaxOrder - 1> sums{};
    const auto& arr = j.at("power_sums");
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] = arr.at(i).get<double>();
    return MomentAccumulator::from_parts(count, j.at("mean"), sums, j.at("min"), j.at("max"));
}

}  // namespace

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["tool_version"] = m.tool_version;
    json plan;
    plan["n"] = m.plan.n;
    plan["base"] = base_to_json(m.plan.base);
    plan["dist"] = dist_to_json(m.plan.dist);
    json fns = json::array();
    for (auto f : m.plan.functionals) fns.push_back(functional_name(f));
    plan["functionals"] = fns;
    plan["block_length"] = m.plan.block_length;
    plan["replicates"] = m.plan.replicates;
    plan["master_seed"] = m.plan.master_seed;
    plan["stream_namespace"] = m.plan.stream_namespace;
    plan["retain_samples"] = m.plan.retain_samples;
    plan["margin_initial"] = m.plan.margin_initial;
    plan["margin_cap_factor"] = m.plan.margin_cap_factor;
    plan["vertex_budget"] = m.plan.vertex_budget;
    j["plan"] = plan;
    j["wall_seconds"] = m.wall_seconds;
    j["timestamp"] = m.timestamp;
    json summaries = json::array();
    for (const auto& [name, acc] : m.summaries) {
        json entry = acc_to_json(acc);
        entry["functional"] = name;
        summaries.push_back(entry);
    }
    j["summaries"] = summaries;
    j["samples_file"] = m.samples_file;
    return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kManifestSchemaVersion)
        throw schema_error("manifest schema version mismatch (expected " +
                           std::to_string(kManifestSchemaVersion) + ")");

    RunManifest m;
    m.schema_version = j.at("schema_version");
    m.tool_version = j.at("tool_version");
    const json& plan = j.at("plan");
    m.plan.n = plan.at("n");
    m.plan.base = base_from_json(plan.at("base"));
    m.plan.dist = dist_from_json(plan.at("dist"));
    m.plan.functionals.clear();
    for (const auto& f : plan.at("functionals"))
        m.plan.functionals.push_back(functional_from_name(f.get<std::string>()));
    m.plan.block_length = plan.at("block_length");
    m.plan.replicates = plan.at("replicates");
    m.plan.master_seed = plan.at("master_seed");
    m.plan.stream_namespace = plan.at("stream_namespace");
    m.plan.retain_samples = plan.at("retain_samples");
    m.plan.margin_initial = plan.at("margin_initial");
    m.plan.margin_cap_factor = plan.at("margin_cap_factor");
    m.plan.vertex_budget = plan.at("vertex_budget");
    m.wall_seconds = j.at("wall_seconds");
    m.timestamp = j.at("timestamp");
    m.samples_file = j.at("samples_file");
    for (const auto& entry : j.at("summaries")) {
        MomentAccumulator acc = acc_from_json(entry);
        m.summaries.emplace_back(entry.at("functional").get<std::string>(), acc);
    }
    return m;
}

void persist_results(const RunResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());

    {
        std::ofstream out(fs::path(dir) / "manifest.json");
        if (!out) throw io_error("cannot write manifest in " + dir);
        out << manifest_to_json(result.manifest) << "\n";
    }
    if (!result.manifest.samples_file.empty()) {
        std::ofstream out(fs::path(dir) / result.manifest.samples_file);
        if (!out) throw io_error("cannot write samples in " + dir);
        out << "replicate,functional,value\n";
        char buf[64];
        const std::size_t reps = result.sample_columns.empty() ? 0 : result.sample_columns[0].size();
        for (std::size_t i = 0; i < reps; ++i) {
            for (std::size_t c = 0; c < result.sample_names.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", result.sample_columns[c][i]);
                out << i << ',' << result.sample_names[c] << ',' << buf << '\n';
            }
        }
    }
}

RunResult load_results(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw io_error("cannot open manifest in " + dir);
    std::stringstream buffer;
    buffer << in.rdbuf();

    RunResult result;
    result.manifest = manifest_from_json(buffer.str());

    if (!result.manifest.samples_file.empty()) {
        std::ifstream samples(fs::path(dir) / result.manifest.samples_file);
        if (!samples) throw io_error("cannot open samples file in " + dir);
        std::string line;
        std::getline(samples, line);
        if (line != "replicate,functional,value")
            throw schema_error("unexpected samples header: " + line);
        while (std::getline(samples, line)) {
            if (line.empty()) continue;
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw io_error("malformed samples row: " + line);
            const std::size_t rep = std::stoull(line.substr(0, c1));
            const std::string name = line.substr(c1 + 1, c2 - c1 - 1);
            const double value = std::stod(line.substr(c2 + 1));
            auto it = std::find(result.sample_names.begin(), result.sample_names.end(), name);
            std::size_t idx;
            if (it == result.sample_names.end()) {
                result.sample_names.push_back(name);
                result.sample_columns.emplace_back();
                idx = result.sample_names.size() - 1;
            } else {
                idx = static_cast<std::size_t>(it - result.sample_names.begin());
            }
            if (result.sample_columns[idx].size() != rep)
                throw io_error("samples rows out of order at replicate " + std::to_string(rep));
            result.sample_columns[idx].push_back(value);
        }
    }
    return result;
}

bool summaries_consistent(const RunResult& result, double rel_tol) {
    for (const auto& [name, stored] : result.manifest.summaries) {
        MomentAccumulator fresh;
        for (double x : result.column(name)) fresh.add(x);
        if (fresh.count() != stored.count()) return false;
        auto close = [rel_tol](double x, double y) {
            return std::abs(x - y) <= rel_tol * std::max({1.0, std::abs(x), std::abs(y)});
        };
        if (!close(fresh.mean(), stored.mean())) return false;
        if (!close(fresh.min(), stored.min()) || !close(fresh.max(), stored.max())) return false;
        for (int p = 2; p <= MomentAccumulator::kMaxOrder; ++p)
            if (!close(fresh.power_sum(p), stored.power_sum(p))) return false;
    }
    return true;
}

int sweep_height(int n, double alpha) {
    return static_cast<int>(std::floor(std::pow(static_cast<double>(n), alpha)));
}

SweepOutcome sweep(const ExperimentPlan& base_plan, const std::vector<SweepPoint>& grid,
                   int workers) {
    if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
    SweepOutcome outcome;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const auto& pt = grid[idx];
        try {
            ExperimentPlan plan = base_plan;
            plan.n = pt.n;
            int h = -1;
            if (pt.alpha) h = sweep_height(pt.n, *pt.alpha);
            if (pt.h) h = *pt.h;
            if (h >= 0) {
                if (plan.base.kind != GraphSpec::Kind::box)
                    throw std::invalid_argument("height grid requires a box base");
                plan.base = GraphSpec::box(h, plan.base.dimension);
            }
            plan.stream_namespace =
                base_plan.stream_namespace + ((static_cast<std::uint64_t>(idx) + 1) << 32);
            outcome.results.push_back(run_experiment(plan, workers));
        } catch (const std::exception& e) {
            outcome.failures.push_back({idx, e.what()});
        }
    }
    return outcome;
}

std::vector<double> simulate_sum_samples(const WeightDistribution& dist, int terms,
                                         std::size_t count, std::uint64_t master_seed) {
    std::vector<double> out(count);
    RngStream stream = RngStream::derive_sub(master_seed, 0x5d0, 0x5d0);
    for (auto& v : out) {
        double s = 0.0;
        for (int j = 0; j < terms; ++j) s += dist.sample(stream);
        v = s;
    }
    return out;
}

DonskerPaths sample_donsker_paths(const GraphSpec& base, int n, std::vector<double> grid,
                                  const WeightDistribution& dist, std::uint64_t master_seed,
                                  std::uint64_t stream_namespace, std::uint64_t replicates,
                                  int workers) {
    if (grid.empty()) throw std::invalid_argument("donsker grid is empty");
    double prev = 0.0;
    for (double t : grid) {
        if (t <= prev || t > 1.0)
            throw std::invalid_argument("donsker grid must satisfy 0 < t_1 < ... <= 1");
        prev = t;
    }

    DonskerPaths paths;
    paths.n = n;
    paths.grid = grid;
    paths.t_values.assign(replicates, std::vector<double>(grid.size(), 0.0));

    const CylinderGraph graph(0, n, base);
    parallel_replicates(replicates, workers, [&](std::uint64_t i, PassageScratch& scratch) {
        WeightConfig weights = sample_weights(graph, dist, master_seed, stream_namespace + i);
        for (std::size_t jdx = 0; jdx < grid.size(); ++jdx) {
            const int m = static_cast<int>(std::lround(grid[jdx] * n));
            paths.t_values[i][jdx] = point_to_point_time(graph, weights, 0, m, &scratch).value;
        }
    });
    return paths;
}

}  // namespace fpcyl
