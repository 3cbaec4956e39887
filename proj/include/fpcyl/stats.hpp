// stats.hpp — statistical verification of the simulated passage-time data:
// normality diagnostics, mean/variance scaling, sandwich and stochastic
// domination checks, Brownian covariance structure, geodesic-length tails.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpcyl/montecarlo.hpp"

namespace fpcyl {

// --- elementary numerics ---------------------------------------------------

double normal_cdf(double x);
double normal_quantile(double p);
// Complementary Kolmogorov CDF Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

// One-sample KS statistic of `samples` against N(mean, sd^2).
double ks_statistic_normal(std::span<const double> samples, double mean, double sd);
// Largest pointwise excess of ecdf(b) over ecdf(a): sup_x (F_b(x) - F_a(x)).
double one_sided_ks_two_sample(std::span<const double> a, std::span<const double> b);

struct CheckItem {
    std::string name;
    bool pass = false;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string detail;
};

// --- reports ----------------------------------------------------------------

struct NormalityReport {
    std::size_t sample_size = 0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks_statistic = 0.0;
    double ks_pvalue = 0.0;
};

// Standardizes with the plug-in sample mean/variance. Requires >= 50 samples
// and nonzero variance.
NormalityReport normality_diagnostics(std::span<const double> samples);

// A functional's raw samples at one cylinder length.
struct SampleSet {
    int n = 0;
    std::vector<double> values;
};

struct ScalingEntry {
    int n = 0;
    double mean_per_n = 0.0;
    double mean_se = 0.0;        // SE of the mean estimate (not divided by n)
    double var_per_n = 0.0;
    double var_se = 0.0;         // jackknife SE of the variance estimate
};

struct ScalingReport {
    std::vector<ScalingEntry> entries;
    double nu_hat = 0.0;  // time-constant estimate from the largest n
    std::vector<CheckItem> checks;
    bool all_pass = false;
};

// Mean growth: nu_hat * n <= mean_n <= mu * n, pairwise subadditivity for
// grid points with n_i + n_j in the grid, and for fixed G the two-sided
// |mean_n - n nu_hat| <= mu * D band. All comparisons get 3-SE slack.
ScalingReport mean_convergence_check(const std::vector<SampleSet>& sets, double dist_mean,
                                     int base_diameter, bool fixed_base);

// Variance growth: positive variance, bounded var/n ratio across the grid,
// and stabilization |var_{2n}/(2n) - var_n/n| <= 3 combined SE for fixed G.
ScalingReport variance_scaling_check(const std::vector<SampleSet>& sets, bool fixed_base);

struct SandwichParams {
    double moment_p = 2.0;   // exponent in the |t-T|^p bound
    int base_diameter = 0;   // d_n
    double omega_moment_p = 0.0;  // E[w^p]
    // Decomposition context for the domination check
    int block_count = 0;  // m
    double dist_mean = 0.0;
    double ks_level = 0.001;
};

struct SandwichReport {
    std::vector<CheckItem> checks;
    std::vector<std::size_t> ordering_violations;  // replicate ids
    bool all_pass = false;
};

// Per-replicate ordering T <= a <= t (exact), the moment gap bound
// E|t-T|^p <= (2 d_n)^p E[w^p] + 3 SE, E[Y] <= m D mu + 3 SE, and the
// one-sided two-sample Kolmogorov domination band between Y and S_{mD}.
SandwichReport sandwich_and_domination_check(std::span<const double> T_vals,
                                             std::span<const double> a_vals,
                                             std::span<const double> t_vals,
                                             std::span<const double> y_vals,
                                             std::span<const double> s_md_vals,
                                             const SandwichParams& params);

struct DonskerReport {
    std::vector<double> grid;
    std::vector<std::vector<double>> covariance;  // scaled, grid x grid
    double max_abs_deviation = 0.0;               // from min(s,t)
    double nu_hat = 0.0;
    double sigma2_hat = 0.0;  // variance rate
    std::vector<CheckItem> checks;
    bool all_pass = false;
};

// Scales X(n t) = t_{nt} - nt*nu_hat by (n sigma2_hat)^{-1/2} and compares
// the empirical covariance with the Brownian kernel min(s,t); increments
// over disjoint intervals must be uncorrelated within 3 SE and have variance
// t_i - t_{i-1} within 3 SE.
DonskerReport donsker_covariance_check(const DonskerPaths& paths);

struct TailReport {
    std::vector<ScalingEntry> entries;              // reuses n slot
    std::vector<double> p999_ratio;                 // pi/n 99.9th percentile per n
    std::vector<double> moment_ratio;               // E[(pi/n)^{p/2}] per n
    std::vector<CheckItem> checks;
    bool all_pass = false;
};

// Stability of the 99.9th percentile of pi_n/n across the grid (consecutive
// ratio within a factor 1.25) plus the bounded-moment trend report.
TailReport tail_geodesic_check(const std::vector<SampleSet>& pi_sets, double p,
                               double ratio_factor = 1.25);

// --- report rendering -------------------------------------------------------

std::string checks_to_json(const std::string& title, const std::vector<CheckItem>& checks,
                           bool all_pass);
std::string checks_to_table(const std::string& title, const std::vector<CheckItem>& checks);

}  // namespace fpcyl
