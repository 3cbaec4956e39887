#include "fpcyl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fpcyl {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// Acklam's rational approximation, refined with one Halley step.
double normal_quantile(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("quantile needs p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Q = 1 - K via the theta-function form, accurate for small lambda.
        const double y = 3.14159265358979323846 * 3.14159265358979323846 / (8.0 * lambda * lambda);
        const double k = std::sqrt(2.0 * 3.14159265358979323846) / lambda *
                         (std::exp(-y) + std::exp(-9.0 * y) + std::exp(-25.0 * y) +
                          std::exp(-49.0 * y));
        return std::max(0.0, std::min(1.0, 1.0 - k));
    }
    double q = 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        q += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::max(0.0, std::min(1.0, q));
}

double ks_statistic_normal(std::span<const double> samples, double mean, double sd) {
    std::vector<double> z(samples.begin(), samples.end());
    std::sort(z.begin(), z.end());
    const auto n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = normal_cdf((z[i] - mean) / sd);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
        d = std::max(d, f - static_cast<double>(i) / n);
    }
    return d;
}

double one_sided_ks_two_sample(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    double best = 0.0;
    std::size_t ia = 0, ib = 0;
    // Sweep merged sample points; after consuming all values <= x the step
    // heights are the two ecdfs evaluated at x.
    while (ia < sa.size() || ib < sb.size()) {
        double x;
        if (ia < sa.size() && (ib >= sb.size() || sa[ia] <= sb[ib]))
            x = sa[ia];
        else
            x = sb[ib];
        while (ia < sa.size() && sa[ia] <= x) ++ia;
        while (ib < sb.size() && sb[ib] <= x) ++ib;
        best = std::max(best, static_cast<double>(ib) / nb - static_cast<double>(ia) / na);
    }
    return best;
}

NormalityReport normality_diagnostics(std::span<const double> samples) {
    if (samples.size() < 50)
        throw std::invalid_argument("normality diagnostics need at least 50 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 <= 0.0) throw degenerate_error("normality diagnostics on a constant sample");

    NormalityReport rep;
    rep.sample_size = samples.size();
    rep.skewness = m3 / std::pow(m2, 1.5);
    rep.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    rep.ks_statistic = ks_statistic_normal(samples, mean, std::sqrt(m2));
    rep.ks_pvalue = kolmogorov_q(std::sqrt(n) * rep.ks_statistic);
    return rep;
}

namespace {

struct Basic {
    double mean = 0.0;
    double var_sample = 0.0;
    double se_mean = 0.0;
};

Basic basic_stats(std::span<const double> v) {
    Basic b;
    const double n = static_cast<double>(v.size());
    for (double x : v) b.mean += x;
    b.mean /= n;
    double m2 = 0.0;
    for (double x : v) m2 += (x - b.mean) * (x - b.mean);
    b.var_sample = v.size() > 1 ? m2 / (n - 1.0) : 0.0;
    b.se_mean = std::sqrt(b.var_sample / n);
    return b;
}

// Delete-one jackknife standard error of the sample variance.
double jackknife_var_se(std::span<const double> v) {
    const std::size_t r = v.size();
    if (r < 3) return 0.0;
    const double n = static_cast<double>(r);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0.0, sc = 0.0;
    std::vector<double> c(r);
    for (std::size_t i = 0; i < r; ++i) {
        c[i] = v[i] - mean;
        m2 += c[i] * c[i];
        sc += c[i];
    }
    std::vector<double> theta(r);
    double theta_bar = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        theta[i] = (m2 - c[i] * c[i] - (sc - c[i]) * (sc - c[i]) / (n - 1.0)) / (n - 2.0);
        theta_bar += theta[i];
    }
    theta_bar /= n;
    double ss = 0.0;
    for (double th : theta) ss += (th - theta_bar) * (th - theta_bar);
    return std::sqrt((n - 1.0) / n * ss);
}

void push_check(std::vector<CheckItem>& checks, std::string name, double lhs, double rhs,
                bool pass, std::string detail = "") {
    CheckItem c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.pass = pass;
    c.detail = std::move(detail);
    checks.push_back(std::move(c));
}

bool finish(std::vector<CheckItem>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const CheckItem& c) { return c.pass; });
}

}  // namespace

ScalingReport mean_convergence_check(const std::vector<SampleSet>& sets, double dist_mean,
                                     int base_diameter, bool fixed_base) {
    if (sets.size() < 2)
        throw std::invalid_argument("mean convergence needs at least two values of n");
    std::vector<SampleSet> sorted = sets;
    std::sort(sorted.begin(), sorted.end(),
              [](const SampleSet& a, const SampleSet& b) { return a.n < b.n; });

    ScalingReport rep;
    std::vector<Basic> stats;
    for (const auto& s : sorted) {
        Basic b = basic_stats(s.values);
        stats.push_back(b);
        ScalingEntry e;
        e.n = s.n;
        e.mean_per_n = b.mean / s.n;
        e.mean_se = b.se_mean;
        rep.entries.push_back(e);
    }

    const auto& big = sorted.back();
    const Basic& big_stats = stats.back();
    rep.nu_hat = big_stats.mean / big.n;
    const double nu_se = big_stats.se_mean / big.n;

    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double n = sorted[i].n;
        const double slack = 3.0 * std::hypot(stats[i].se_mean, n * nu_se);
        push_check(rep.checks, "nu_lower_n" + std::to_string(sorted[i].n),
                   rep.nu_hat * n, stats[i].mean + slack,
                   rep.nu_hat * n <= stats[i].mean + slack);
        push_check(rep.checks, "mu_upper_n" + std::to_string(sorted[i].n), stats[i].mean,
                   dist_mean * n + 3.0 * stats[i].se_mean,
                   stats[i].mean <= dist_mean * n + 3.0 * stats[i].se_mean);
    }

    for (std::size_t i = 0; i < sorted.size(); ++i) {
        for (std::size_t j = i; j < sorted.size(); ++j) {
            const int target = sorted[i].n + sorted[j].n;
            for (std::size_t k = 0; k < sorted.size(); ++k) {
                if (sorted[k].n != target) continue;
                const double slack = 3.0 * std::sqrt(stats[i].se_mean * stats[i].se_mean +
                                                     stats[j].se_mean * stats[j].se_mean +
                                                     stats[k].se_mean * stats[k].se_mean);
                push_check(rep.checks,
                           "subadd_" + std::to_string(sorted[i].n) + "+" +
                               std::to_string(sorted[j].n),
                           stats[k].mean, stats[i].mean + stats[j].mean + slack,
                           stats[k].mean <= stats[i].mean + stats[j].mean + slack);
            }
        }
    }

    if (fixed_base) {
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double n = sorted[i].n;
            const double gap = std::abs(stats[i].mean - n * rep.nu_hat);
            const double bound = dist_mean * base_diameter +
                                 3.0 * std::hypot(stats[i].se_mean, n * nu_se);
            push_check(rep.checks, "fixedG_band_n" + std::to_string(sorted[i].n), gap, bound,
                       gap <= bound);
        }
    }

    rep.all_pass = finish(rep.checks);
    return rep;
}

ScalingReport variance_scaling_check(const std::vector<SampleSet>& sets, bool fixed_base) {
    if (sets.size() < 2)
        throw std::invalid_argument("variance scaling needs at least two values of n");
    std::vector<SampleSet> sorted = sets;
    std::sort(sorted.begin(), sorted.end(),
              [](const SampleSet& a, const SampleSet& b) { return a.n < b.n; });

    ScalingReport rep;
    std::vector<double> var(sorted.size()), var_se(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        Basic b = basic_stats(sorted[i].values);
        var[i] = b.var_sample;
        var_se[i] = jackknife_var_se(sorted[i].values);
        ScalingEntry e;
        e.n = sorted[i].n;
        e.mean_per_n = b.mean / sorted[i].n;
        e.mean_se = b.se_mean;
        e.var_per_n = var[i] / sorted[i].n;
        e.var_se = var_se[i];
        rep.entries.push_back(e);
        push_check(rep.checks, "var_positive_n" + std::to_string(sorted[i].n), var[i], 0.0,
                   var[i] > 0.0);
    }
    if (!sorted.empty()) {
        const auto& big = sorted.back();
        rep.nu_hat = basic_stats(big.values).mean / big.n;
    }

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        lo = std::min(lo, var[i] / sorted[i].n);
        hi = std::max(hi, var[i] / sorted[i].n);
    }
    push_check(rep.checks, "var_per_n_spread", hi, lo, lo > 0.0,
               "max/min ratio " + std::to_string(lo > 0.0 ? hi / lo : 0.0));

    if (fixed_base) {
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            for (std::size_t k = 0; k < sorted.size(); ++k) {
                if (sorted[k].n != 2 * sorted[i].n) continue;
                const double ri = var[i] / sorted[i].n;
                const double rk = var[k] / sorted[k].n;
                const double se = 3.0 * std::hypot(var_se[i] / sorted[i].n,
                                                   var_se[k] / sorted[k].n);
                push_check(rep.checks,
                           "stabilize_" + std::to_string(sorted[i].n) + "to" +
                               std::to_string(sorted[k].n),
                           std::abs(rk - ri), se, std::abs(rk - ri) <= se);
            }
        }
    }

    rep.all_pass = finish(rep.checks);
    return rep;
}

SandwichReport sandwich_and_domination_check(std::span<const double> T_vals,
                                             std::span<const double> a_vals,
                                             std::span<const double> t_vals,
                                             std::span<const double> y_vals,
                                             std::span<const double> s_md_vals,
                                             const SandwichParams& params) {
    if (T_vals.size() != a_vals.size() || a_vals.size() != t_vals.size())
        throw std::invalid_argument("mismatched replicate counts for T/a/t");

    SandwichReport rep;
    // T/a/t may be absent (all empty) when only the decomposition error is
    // under test.
    if (!T_vals.empty()) {
        for (std::size_t i = 0; i < T_vals.size(); ++i) {
            if (!(T_vals[i] <= a_vals[i] && a_vals[i] <= t_vals[i]))
                rep.ordering_violations.push_back(i);
        }
        push_check(rep.checks, "ordering_T<=a<=t",
                   static_cast<double>(rep.ordering_violations.size()), 0.0,
                   rep.ordering_violations.empty(),
                   rep.ordering_violations.empty()
                       ? ""
                       : "first violation at replicate " +
                             std::to_string(rep.ordering_violations.front()));

        std::vector<double> gap_p(T_vals.size());
        for (std::size_t i = 0; i < T_vals.size(); ++i)
            gap_p[i] = std::pow(std::abs(t_vals[i] - T_vals[i]), params.moment_p);
        Basic b = basic_stats(gap_p);
        const double bound = std::pow(2.0 * params.base_diameter, params.moment_p) *
                                 params.omega_moment_p +
                             3.0 * b.se_mean;
        push_check(rep.checks, "gap_moment", b.mean, bound, b.mean <= bound);
    }

    if (!y_vals.empty()) {
        std::size_t nonneg_violations = 0;
        for (double y : y_vals)
            if (y < 0.0) ++nonneg_violations;
        push_check(rep.checks, "Y_nonnegative", static_cast<double>(nonneg_violations), 0.0,
                   nonneg_violations == 0);

        Basic by = basic_stats(y_vals);
        const double mean_bound =
            params.block_count * params.base_diameter * params.dist_mean + 3.0 * by.se_mean;
        push_check(rep.checks, "Y_mean_bound", by.mean, mean_bound, by.mean <= mean_bound);

        if (!s_md_vals.empty()) {
            const double excess = one_sided_ks_two_sample(y_vals, s_md_vals);
            const double n1 = static_cast<double>(y_vals.size());
            const double n2 = static_cast<double>(s_md_vals.size());
            const double band = std::sqrt(-0.5 * std::log(params.ks_level)) *
                                std::sqrt((n1 + n2) / (n1 * n2));
            push_check(rep.checks, "Y_dominated_by_SmD", excess, band, excess <= band);
        }
    }

    rep.all_pass = finish(rep.checks);
    return rep;
}

DonskerReport donsker_covariance_check(const DonskerPaths& paths) {
    const std::size_t g = paths.grid.size();
    const std::size_t r = paths.t_values.size();
    if (r < 500) throw std::invalid_argument("donsker check needs at least 500 paths");

    DonskerReport rep;
    rep.grid = paths.grid;

    // Plug-in rate estimates from the largest grid time.
    const double t_last = paths.grid.back();
    std::vector<double> last(r);
    for (std::size_t i = 0; i < r; ++i) last[i] = paths.t_values[i][g - 1];
    Basic bl = basic_stats(last);
    const double span = paths.n * t_last;
    rep.nu_hat = bl.mean / span;
    rep.sigma2_hat = bl.var_sample / span;
    if (rep.sigma2_hat <= 0.0) throw degenerate_error("degenerate variance rate in donsker check");

    const double scale = 1.0 / std::sqrt(paths.n * rep.sigma2_hat);
    std::vector<std::vector<double>> w(r, std::vector<double>(g));
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            const double m = paths.grid[j] * paths.n;
            w[i][j] = scale * (paths.t_values[i][j] - m * rep.nu_hat);
        }
    }

    std::vector<double> wbar(g, 0.0);
    for (const auto& row : w)
        for (std::size_t j = 0; j < g; ++j) wbar[j] += row[j];
    for (auto& x : wbar) x /= static_cast<double>(r);

    rep.covariance.assign(g, std::vector<double>(g, 0.0));
    for (const auto& row : w)
        for (std::size_t j = 0; j < g; ++j)
            for (std::size_t k = 0; k < g; ++k)
                rep.covariance[j][k] += (row[j] - wbar[j]) * (row[k] - wbar[k]);
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t k = 0; k < g; ++k) rep.covariance[j][k] /= static_cast<double>(r);

    rep.max_abs_deviation = 0.0;
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t k = 0; k < g; ++k)
            rep.max_abs_deviation =
                std::max(rep.max_abs_deviation,
                         std::abs(rep.covariance[j][k] - std::min(paths.grid[j], paths.grid[k])));

    // Increment structure: variances match interval lengths, disjoint
    // increments uncorrelated.
    std::vector<std::vector<double>> inc(g, std::vector<double>(r));
    for (std::size_t i = 0; i < r; ++i) {
        double prev = 0.0;
        for (std::size_t j = 0; j < g; ++j) {
            inc[j][i] = w[i][j] - prev;
            prev = w[i][j];
        }
    }
    for (std::size_t j = 0; j < g; ++j) {
        const double tau = paths.grid[j] - (j == 0 ? 0.0 : paths.grid[j - 1]);
        Basic b = basic_stats(inc[j]);
        const double se = tau * std::sqrt(2.0 / static_cast<double>(r));
        push_check(rep.checks, "inc_var_" + std::to_string(j), std::abs(b.var_sample - tau),
                   3.0 * se, std::abs(b.var_sample - tau) <= 3.0 * se);
    }
    const double corr_se = 1.0 / std::sqrt(static_cast<double>(r));
    for (std::size_t j = 0; j < g; ++j) {
        Basic bj = basic_stats(inc[j]);
        for (std::size_t k = j + 1; k < g; ++k) {
            Basic bk = basic_stats(inc[k]);
            double cov = 0.0;
            for (std::size_t i = 0; i < r; ++i)
                cov += (inc[j][i] - bj.mean) * (inc[k][i] - bk.mean);
            cov /= static_cast<double>(r);
            const double rho = cov / std::sqrt(bj.var_sample * bk.var_sample);
            push_check(rep.checks, "inc_corr_" + std::to_string(j) + "_" + std::to_string(k),
                       std::abs(rho), 3.0 * corr_se, std::abs(rho) <= 3.0 * corr_se);
        }
    }

    rep.all_pass = finish(rep.checks);
    return rep;
}

TailReport tail_geodesic_check(const std::vector<SampleSet>& pi_sets, double p,
                               double ratio_factor) {
    if (pi_sets.empty()) throw std::invalid_argument("tail check needs at least one sample set");
    std::vector<SampleSet> sorted = pi_sets;
    std::sort(sorted.begin(), sorted.end(),
              [](const SampleSet& a, const SampleSet& b) { return a.n < b.n; });

    TailReport rep;
    for (const auto& s : sorted) {
        std::vector<double> ratio(s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i) ratio[i] = s.values[i] / s.n;
        std::sort(ratio.begin(), ratio.end());
        const std::size_t idx =
            std::min(ratio.size() - 1,
                     static_cast<std::size_t>(std::floor(0.999 * static_cast<double>(ratio.size()))));
        rep.p999_ratio.push_back(ratio[idx]);
        double mom = 0.0;
        for (double x : ratio) mom += std::pow(x, p / 2.0);
        rep.moment_ratio.push_back(mom / static_cast<double>(ratio.size()));
        ScalingEntry e;
        e.n = s.n;
        rep.entries.push_back(e);
    }

    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const double r0 = rep.p999_ratio[i], r1 = rep.p999_ratio[i + 1];
        const double ratio = std::max(r0 / r1, r1 / r0);
        push_check(rep.checks,
                   "p999_stable_" + std::to_string(sorted[i].n) + "to" +
                       std::to_string(sorted[i + 1].n),
                   ratio, ratio_factor, ratio <= ratio_factor);
        const double m0 = rep.moment_ratio[i], m1 = rep.moment_ratio[i + 1];
        const double mratio = std::max(m0 / m1, m1 / m0);
        push_check(rep.checks,
                   "moment_bounded_" + std::to_string(sorted[i].n) + "to" +
                       std::to_string(sorted[i + 1].n),
                   mratio, ratio_factor, mratio <= ratio_factor);
    }

    rep.all_pass = finish(rep.checks);
    return rep;
}

std::string checks_to_json(const std::string& title, const std::vector<CheckItem>& checks,
                           bool all_pass) {
    std::ostringstream out;
    out << "{\n  \"check\": \"" << title << "\",\n  \"pass\": " << (all_pass ? "true" : "false")
        << ",\n  \"items\": [\n";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        out << "    {\"name\": \"" << c.name << "\", \"pass\": " << (c.pass ? "true" : "false")
            << ", \"lhs\": " << c.lhs << ", \"rhs\": " << c.rhs;
        if (!c.detail.empty()) out << ", \"detail\": \"" << c.detail << "\"";
        out << "}" << (i + 1 < checks.size() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    return out.str();
}

std::string checks_to_table(const std::string& title, const std::vector<CheckItem>& checks) {
    std::ostringstream out;
    out << title << "\n";
    for (const auto& c : checks) {
        out << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << "  lhs=" << c.lhs
            << " rhs=" << c.rhs;
        if (!c.detail.empty()) out << "  (" << c.detail << ")";
        out << "\n";
    }
    return out.str();
}

}  // namespace fpcyl
