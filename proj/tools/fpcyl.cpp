// fpcyl — command-line front end: simulate, sweep, schedule, verify, analyze.
//
// Exit codes: 0 success, 1 verification/check failure, 2 configuration
// error, 3 runtime failure. Human-readable text goes to stderr; data
// artifacts go to files (schedule CSV goes to stdout, it is the data).
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fpcyl/decomposition.hpp"
#include "fpcyl/montecarlo.hpp"
#include "fpcyl/stats.hpp"

namespace {

using namespace fpcyl;

struct CommonOpts {
    int n = 100;
    int h = 0;
    int d = 2;
    std::string base_file;
    std::string dist_text = "exponential:1";
    std::uint64_t reps = 100;
    std::uint64_t seed = 0;
    std::uint64_t ns = 0;
    std::string functionals_text = "T,t,a";
    int block_l = 0;
    int margin = 4;
    int margin_cap = 8;
    std::size_t budget = CylinderGraph::kDefaultVertexBudget;
    bool no_retain = false;
    int workers = 1;
    std::string out_dir = "fpcyl_out";
};

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ',')) out.push_back(piece);
    return out;
}

ExperimentPlan plan_from(const CommonOpts& o) {
    ExperimentPlan plan;
    plan.n = o.n;
    plan.base = o.base_file.empty() ? GraphSpec::box(o.h, o.d)
                                    : GraphSpec::from_edge_list_file(o.base_file);
    plan.dist = WeightDistribution::parse(o.dist_text);
    plan.functionals.clear();
    for (const auto& name : split_csv(o.functionals_text))
        plan.functionals.push_back(functional_from_name(name));
    plan.block_length = o.block_l;
    plan.replicates = o.reps;
    plan.master_seed = o.seed;
    plan.stream_namespace = o.ns;
    plan.retain_samples = !o.no_retain;
    plan.margin_initial = o.margin;
    plan.margin_cap_factor = o.margin_cap;
    plan.vertex_budget = o.budget;
    plan.validate();
    return plan;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    // --h is a real option here, so the help flag is long-form only.
    cmd->set_help_flag("--help", "print help");
    cmd->configurable(true);
    cmd->add_option("--n", o.n, "cylinder length");
    cmd->add_option("--h", o.h, "box base half-width");
    cmd->add_option("--d", o.d, "lattice dimension (base lives in Z^{d-1})");
    cmd->add_option("--base-file", o.base_file, "explicit base graph edge-list file");
    cmd->add_option("--dist", o.dist_text, "weight law, family:params");
    cmd->add_option("--reps", o.reps, "replicate count");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--namespace", o.ns, "stream namespace offset");
    cmd->add_option("--functionals", o.functionals_text, "comma list from T,t,a,pi,L,blocks");
    cmd->add_option("--block-l", o.block_l, "block length for the blocks functional");
    cmd->add_option("--margin", o.margin, "initial strip window margin");
    cmd->add_option("--margin-cap", o.margin_cap, "margin cap as a multiple of n");
    cmd->add_option("--budget", o.budget, "cylinder vertex budget");
    cmd->add_flag("--no-retain", o.no_retain, "do not persist raw samples");
    cmd->add_option("--workers", o.workers, "worker thread count");
    cmd->add_option("--out", o.out_dir, "output directory")->envname("FPCYL_OUT");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    out << text;
}

// Donsker path matrix persistence: replicate,t,value rows.
void write_paths_csv(const std::filesystem::path& path, const DonskerPaths& paths) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path.string());
    out << "replicate,t,value\n";
    char buf[64];
    for (std::size_t i = 0; i < paths.t_values.size(); ++i) {
        for (std::size_t j = 0; j < paths.grid.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", paths.t_values[i][j]);
            out << i << ',' << paths.grid[j] << ',' << buf << '\n';
        }
    }
}

DonskerPaths load_paths_csv(const std::filesystem::path& path, int n) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "replicate,t,value") throw schema_error("unexpected paths header: " + line);
    DonskerPaths paths;
    paths.n = n;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const std::size_t rep = std::stoull(line.substr(0, c1));
        const double t = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        const double value = std::stod(line.substr(c2 + 1));
        if (rep == 0) paths.grid.push_back(t);
        if (paths.t_values.size() <= rep) paths.t_values.resize(rep + 1);
        paths.t_values[rep].push_back(value);
    }
    return paths;
}

int cmd_simulate(const CommonOpts& o, const std::string& donsker_grid_text) {
    namespace fs = std::filesystem;
    if (!donsker_grid_text.empty()) {
        std::vector<double> grid;
        for (const auto& p : split_csv(donsker_grid_text)) grid.push_back(std::stod(p));
        const GraphSpec base = o.base_file.empty()
                                   ? GraphSpec::box(o.h, o.d)
                                   : GraphSpec::from_edge_list_file(o.base_file);
        auto paths = sample_donsker_paths(base, o.n, grid,
                                          WeightDistribution::parse(o.dist_text), o.seed, o.ns,
                                          o.reps, o.workers);
        fs::create_directories(o.out_dir);
        write_paths_csv(fs::path(o.out_dir) / "paths.csv", paths);
        // A plan echo so verify can recover n/dist later.
        CommonOpts echo = o;
        echo.functionals_text = "t";
        RunResult skeleton;
        skeleton.manifest.plan = plan_from(echo);
        skeleton.manifest.samples_file = "";
        write_text(fs::path(o.out_dir) / "manifest.json",
                   manifest_to_json(skeleton.manifest) + "\n");
        std::cerr << "wrote " << paths.t_values.size() << " donsker paths to " << o.out_dir
                  << "\n";
        return 0;
    }

    ExperimentPlan plan = plan_from(o);
    RunResult result = run_experiment(plan, o.workers);
    persist_results(result, o.out_dir);
    std::cerr << "simulate: " << plan.replicates << " replicates -> " << o.out_dir << "\n";
    for (const auto& [name, acc] : result.manifest.summaries)
        std::cerr << "  " << name << ": mean=" << acc.mean()
                  << " var=" << acc.variance_sample() << " min=" << acc.min()
                  << " max=" << acc.max() << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& n_list, const std::string& h_list,
              double alpha) {
    namespace fs = std::filesystem;
    std::vector<SweepPoint> grid;
    std::vector<int> hs;
    for (const auto& p : split_csv(h_list))
        if (!p.empty()) hs.push_back(std::stoi(p));
    for (const auto& p : split_csv(n_list)) {
        if (p.empty()) continue;
        const int n = std::stoi(p);
        if (alpha > 0.0) {
            SweepPoint pt;
            pt.n = n;
            pt.alpha = alpha;
            grid.push_back(pt);
        } else if (!hs.empty()) {
            for (int h : hs) {
                SweepPoint pt;
                pt.n = n;
                pt.h = h;
                grid.push_back(pt);
            }
        } else {
            SweepPoint pt;
            pt.n = n;
            grid.push_back(pt);
        }
    }
    ExperimentPlan base_plan = plan_from(o);
    SweepOutcome outcome = sweep(base_plan, grid, o.workers);
    fs::create_directories(o.out_dir);
    for (const auto& result : outcome.results) {
        const auto& plan = result.manifest.plan;
        std::string sub = "n" + std::to_string(plan.n);
        if (plan.base.kind == GraphSpec::Kind::box)
            sub += "_h" + std::to_string(plan.base.half_width);
        persist_results(result, (fs::path(o.out_dir) / sub).string());
    }
    for (const auto& f : outcome.failures)
        std::cerr << "sweep point " << f.point_index << " failed: " << f.message << "\n";
    std::cerr << "sweep: " << outcome.results.size() << " runs, " << outcome.failures.size()
              << " failures -> " << o.out_dir << "\n";
    return outcome.failures.empty() ? 0 : 3;
}

int cmd_schedule(int q, double theta, int t, double p, int d, const std::string& out_file) {
    Schedule s = beta_schedule(q, theta, t);
    std::ostringstream csv;
    csv << "i,beta\n";
    for (int i = 1; i <= s.depth; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12f", s.betas[i - 1]);
        csv << i << "," << buf << "\n";
    }
    char a1[64], a2[64];
    std::snprintf(a1, sizeof a1, "%.12f", s.alpha_star);
    std::snprintf(a2, sizeof a2, "%.12f", s.alpha_star_limit);
    csv << "alpha_star," << a1 << "\n";
    csv << "alpha_star_limit," << a2 << "\n";
    if (p > 2.0) {
        auto thr = alpha_threshold(p, theta, d >= 2 ? std::optional<int>(d) : std::nullopt);
        char g[64];
        std::snprintf(g, sizeof g, "%.12f", thr.general_form);
        csv << "alpha_threshold_general," << g << "\n";
        if (thr.box_form) {
            char b[64];
            std::snprintf(b, sizeof b, "%.12f", *thr.box_form);
            csv << "alpha_threshold_box," << b << "\n";
        }
    }
    std::cout << csv.str();
    if (!out_file.empty()) write_text(out_file, csv.str());

    auto report = verify_schedule(s, s.alpha_star);
    std::cerr << "schedule q=" << q << " theta=" << theta << " t=" << t
              << (report.satisfied ? " (self-consistent)" : " (CONDITIONS VIOLATED)") << "\n";
    return report.satisfied ? 0 : 1;
}

std::vector<double> smd_samples(const WeightDistribution& dist, std::size_t count, int terms,
                                std::uint64_t seed) {
    std::vector<double> out(count);
    RngStream stream = RngStream::derive_sub(seed, 0x5d0, 0x5d0);
    for (auto& v : out) {
        double s = 0.0;
        for (int j = 0; j < terms; ++j) s += dist.sample(stream);
        v = s;
    }
    return out;
}

int emit_report(const std::string& name, const std::vector<CheckItem>& checks, bool pass,
                const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / (name + "_report.json"), checks_to_json(name, checks, pass));
    std::cerr << checks_to_table(name, checks);
    std::cerr << (pass ? "PASS" : "FAIL") << ": " << name << "\n";
    return pass ? 0 : 1;
}

int cmd_verify(const std::string& check, const std::vector<std::string>& in_dirs,
               const std::string& functional, double p, double p_min, const std::string& out_dir) {
    if (in_dirs.empty()) throw std::invalid_argument("verify needs at least one --in directory");

    if (check == "normality") {
        RunResult run = load_results(in_dirs[0]);
        auto rep = normality_diagnostics(run.column(functional));
        std::vector<CheckItem> checks;
        CheckItem c;
        c.name = "ks_pvalue>" + std::to_string(p_min);
        c.lhs = rep.ks_pvalue;
        c.rhs = p_min;
        c.pass = rep.ks_pvalue > p_min;
        checks.push_back(c);
        CheckItem sk;
        sk.name = "skewness";
        sk.lhs = rep.skewness;
        sk.rhs = 0.0;
        sk.pass = true;
        sk.detail = "informational";
        checks.push_back(sk);
        return emit_report("normality", checks, checks[0].pass, out_dir);
    }

    if (check == "sandwich") {
        RunResult run = load_results(in_dirs[0]);
        const auto& plan = run.manifest.plan;
        GraphMetrics metrics = graph_metrics(plan.base);
        SandwichParams params;
        params.moment_p = p;
        params.base_diameter = metrics.diameter;
        params.omega_moment_p = plan.dist.moment(p);
        params.block_count = plan.block_length > 0 ? plan.n / plan.block_length : 0;
        params.dist_mean = plan.dist.mean();
        std::vector<double> empty;
        const bool has_y = std::find(run.sample_names.begin(), run.sample_names.end(), "Y") !=
                           run.sample_names.end();
        std::vector<double> smd;
        if (has_y && params.block_count > 0)
            smd = smd_samples(plan.dist, run.column("Y").size(),
                              params.block_count * metrics.diameter, plan.master_seed);
        auto rep = sandwich_and_domination_check(
            run.column("T"), run.column("a"), run.column("t"),
            has_y ? run.column("Y") : empty, smd, params);
        return emit_report("sandwich", rep.checks, rep.all_pass, out_dir);
    }

    if (check == "mean" || check == "variance") {
        std::vector<SampleSet> sets;
        std::optional<GraphMetrics> metrics;
        double mu = 0.0;
        std::string dist_echo, base_echo;
        for (const auto& dir : in_dirs) {
            RunResult run = load_results(dir);
            const auto& plan = run.manifest.plan;
            if (!metrics) {
                metrics = graph_metrics(plan.base);
                mu = plan.dist.mean();
                dist_echo = plan.dist.describe();
                base_echo = manifest_to_json(run.manifest);
            } else if (plan.dist.describe() != dist_echo) {
                throw std::invalid_argument("inconsistent plans: distributions differ");
            }
            SampleSet set;
            set.n = plan.n;
            set.values = run.column(functional);
            sets.push_back(std::move(set));
        }
        ScalingReport rep = check == "mean"
                                ? mean_convergence_check(sets, mu, metrics->diameter, true)
                                : variance_scaling_check(sets, true);
        return emit_report(check, rep.checks, rep.all_pass, out_dir);
    }

    if (check == "donsker") {
        namespace fs = std::filesystem;
        RunResult skel = load_results(in_dirs[0]);
        auto paths = load_paths_csv(fs::path(in_dirs[0]) / "paths.csv", skel.manifest.plan.n);
        auto rep = donsker_covariance_check(paths);
        // Covariance matrix as CSV for external plotting.
        std::ostringstream cov;
        cov << "s,t,cov,kernel\n";
        for (std::size_t i = 0; i < rep.grid.size(); ++i)
            for (std::size_t j = 0; j < rep.grid.size(); ++j)
                cov << rep.grid[i] << ',' << rep.grid[j] << ',' << rep.covariance[i][j] << ','
                    << std::min(rep.grid[i], rep.grid[j]) << "\n";
        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / "covariance.csv", cov.str());
        CheckItem dev;
        dev.name = "max_abs_cov_deviation";
        dev.lhs = rep.max_abs_deviation;
        dev.rhs = 0.1;
        dev.pass = rep.max_abs_deviation < 0.1;
        auto checks = rep.checks;
        checks.insert(checks.begin(), dev);
        return emit_report("donsker", checks, rep.all_pass && dev.pass, out_dir);
    }

    if (check == "tails") {
        std::vector<SampleSet> sets;
        for (const auto& dir : in_dirs) {
            RunResult run = load_results(dir);
            SampleSet set;
            set.n = run.manifest.plan.n;
            set.values = run.column("pi");
            sets.push_back(std::move(set));
        }
        auto rep = tail_geodesic_check(sets, p);
        return emit_report("tails", rep.checks, rep.all_pass, out_dir);
    }

    throw std::invalid_argument("unknown check: " + check);
}

int cmd_analyze(const std::string& in_dir, const std::string& functional,
                const std::string& out_dir) {
    namespace fs = std::filesystem;
    RunResult run = load_results(in_dir);
    const bool consistent = summaries_consistent(run);

    fs::create_directories(out_dir);
    std::vector<CheckItem> checks;
    CheckItem c;
    c.name = "summaries_match_samples";
    c.lhs = consistent ? 1.0 : 0.0;
    c.rhs = 1.0;
    c.pass = consistent;
    checks.push_back(c);

    if (!functional.empty()) {
        auto values = run.column(functional);
        std::sort(values.begin(), values.end());
        const double n = static_cast<double>(values.size());
        double mean = 0.0;
        for (double x : values) mean += x;
        mean /= n;
        double m2 = 0.0;
        for (double x : values) m2 += (x - mean) * (x - mean);
        const double sd = std::sqrt(m2 / n);
        std::ostringstream qq;
        qq << "theoretical,observed\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double u = (static_cast<double>(i) + 0.5) / n;
            qq << normal_quantile(u) << ',' << (values[i] - mean) / sd << "\n";
        }
        write_text(fs::path(out_dir) / ("qq_" + functional + ".csv"), qq.str());
    }
    return emit_report("analyze", checks, consistent, out_dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-passage percolation across thin cylinders: simulation and verification"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");
    // Config file keys live in a [subcommand] section; flags override file
    // values, unknown keys are rejected.
    app.set_config("--config", "", "configuration file ([subcommand] section, key=value lines)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.fallthrough(true);

    CommonOpts sim_opts;
    std::string donsker_grid;
    auto* sim = app.add_subcommand("simulate", "run replicated passage-time experiments");
    add_common(sim, sim_opts);
    sim->add_option("--donsker-grid", donsker_grid,
                    "comma list of grid times; switches output to path samples");

    CommonOpts sweep_opts;
    std::string n_list, h_list;
    double alpha = 0.0;
    auto* swp = app.add_subcommand("sweep", "grid of simulate runs over n and h (or alpha)");
    add_common(swp, sweep_opts);
    swp->add_option("--n-list", n_list, "comma list of cylinder lengths")->required();
    swp->add_option("--h-list", h_list, "comma list of half-widths");
    swp->add_option("--alpha", alpha, "width exponent: h = floor(n^alpha)");

    int q = 2, t_depth = 1, sched_d = 0;
    double theta = 1.0, sched_p = 0.0;
    std::string sched_out;
    auto* sch = app.add_subcommand("schedule", "print the beta schedule and thresholds as CSV");
    sch->configurable(true);
    sch->add_option("--q", q, "moment parameter q = floor(p/2)")->required();
    sch->add_option("--theta", theta, "edge-growth exponent theta")->required();
    sch->add_option("--t", t_depth, "recursion depth")->required();
    sch->add_option("--p", sched_p, "moment order for the alpha threshold");
    sch->add_option("--d", sched_d, "dimension for the box-form threshold");
    sch->add_option("--out", sched_out, "also write the CSV to this file");

    std::string check, ver_functional = "T", ver_out = "fpcyl_out";
    std::vector<std::string> in_dirs;
    double ver_p = 2.0, ver_pmin = 0.01;
    auto* ver = app.add_subcommand("verify", "run a statistical check over persisted runs");
    ver->configurable(true);
    ver->add_option("--check", check, "sandwich|normality|mean|variance|donsker|tails")
        ->required();
    ver->add_option("--in", in_dirs, "run directories")->required();
    ver->add_option("--functional", ver_functional, "sample column to check");
    ver->add_option("--p", ver_p, "moment order used by the check");
    ver->add_option("--p-min", ver_pmin, "KS p-value floor for normality");
    ver->add_option("--out", ver_out, "report directory")->envname("FPCYL_OUT");

    std::string ana_in, ana_functional, ana_out = "fpcyl_out";
    auto* ana = app.add_subcommand("analyze", "recompute summaries and export QQ data");
    ana->configurable(true);
    ana->add_option("--in", ana_in, "run directory")->required();
    ana->add_option("--functional", ana_functional, "functional for QQ export");
    ana->add_option("--out", ana_out, "report directory")->envname("FPCYL_OUT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_opts, donsker_grid);
        if (swp->parsed()) return cmd_sweep(sweep_opts, n_list, h_list, alpha);
        if (sch->parsed()) return cmd_schedule(q, theta, t_depth, sched_p, sched_d, sched_out);
        if (ver->parsed()) return cmd_verify(check, in_dirs, ver_functional, ver_p, ver_pmin, ver_out);
        if (ana->parsed()) return cmd_analyze(ana_in, ana_functional, ana_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const schema_error& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
