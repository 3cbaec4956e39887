#include "fpcyl/decomposition.hpp"

#include <algorithm>
#include <cmath>

namespace fpcyl {

Decomposition block_times(const CylinderGraph& graph, const WeightConfig& weights, int l,
                          PassageScratch* scratch, std::optional<int> n_override) {
    if (!n_override && graph.col_lo() != 0)
        throw std::invalid_argument("block decomposition expects a graph spanning [0,n]");
    const int n = n_override.value_or(graph.col_hi());
    if (graph.col_lo() > 0 || graph.col_hi() < n)
        throw std::invalid_argument("graph does not contain the block span [0,n]");
    if (l < 1 || l > n) throw std::invalid_argument("block length must satisfy 1 <= l <= n");

    Decomposition d;
    d.block_length = l;
    d.block_count = n / l;
    d.remainder = n - d.block_count * l;

    double sum = 0.0;
    for (int i = 1; i <= d.block_count; ++i) {
        auto x = side_to_side_time(graph, weights, (i - 1) * l, i * l, scratch);
        d.block_times.push_back(x.value);
        sum += x.value;
    }
    if (d.remainder > 0) {
        auto x = side_to_side_time(graph, weights, d.block_count * l, n, scratch);
        d.block_times.push_back(x.value);
        sum += x.value;
    } else {
        d.block_times.push_back(0.0);
    }

    d.total = side_to_side_time(graph, weights, 0, n, scratch).value;
    d.error = d.total - sum;
    // The connector cost is nonnegative; when it is exactly zero the
    // subtraction of independently re-summed path weights leaves noise at
    // the 1e-9 resolution of the value contract. Snap that to zero.
    if (d.error < 0.0 && d.error >= -1e-9 * (1.0 + std::abs(d.total))) d.error = 0.0;
    return d;
}

Schedule beta_schedule(int q, double theta, int t) {
    if (q < 2) throw std::invalid_argument("schedule requires q >= 2");
    if (theta < 1.0) throw std::invalid_argument("schedule requires theta >= 1");
    if (t < 1) throw std::invalid_argument("schedule requires depth t >= 1");

    Schedule s;
    s.q = q;
    s.theta = theta;
    s.depth = t;
    s.ratio = 1.0 - 1.0 / (2.0 * q);

    const double rt = std::pow(s.ratio, t);
    const double denom = theta + (q - 1.0) * (2.0 + theta) * (1.0 - rt);
    s.betas.resize(t);
    for (int i = 1; i <= t; ++i) {
        const double ri = std::pow(s.ratio, i);
        s.betas[i - 1] = 1.0 - q * theta * (1.0 - ri) / denom;
    }
    s.alpha_star = (q - 1.0) * (1.0 - rt) / denom;
    s.alpha_star_limit = (q - 1.0) / (theta + (q - 1.0) * (2.0 + theta));
    return s;
}

ScheduleReport verify_schedule(const Schedule& s, double alpha) {
    ScheduleReport report;
    auto add = [&report](std::string name, double slack, bool strict) {
        ScheduleCondition c;
        c.name = std::move(name);
        c.slack = slack;
        c.strict = strict;
        // Non-strict conditions hold with exact equality for the closed-form
        // schedule; tolerate rounding at the 1e-12 scale.
        c.satisfied = strict ? slack > 0.0 : slack >= -1e-12;
        report.conditions.push_back(std::move(c));
    };

    const int t = s.depth;
    add("chain:2a<beta_" + std::to_string(t), s.betas[t - 1] - 2.0 * alpha, true);
    for (int i = t - 1; i >= 1; --i)
        add("chain:beta_" + std::to_string(i + 1) + "<beta_" + std::to_string(i),
            s.betas[i - 1] - s.betas[i], true);
    add("chain:beta_1<1", 1.0 - s.betas[0], true);

    for (int i = 0; i <= t - 1; ++i) {
        const double bi = (i == 0) ? 1.0 : s.betas[i - 1];
        const double bnext = s.betas[i];
        const double rhs = (1.0 - 2.0 * (bi - bnext) - (1.0 - bi) / s.q) / (2.0 + s.theta);
        add("level_" + std::to_string(i), rhs - alpha, false);
    }
    const double closing = (s.q - 1.0) / s.q * (1.0 - s.betas[t - 1]) / s.theta;
    add("closing", closing - alpha, false);

    report.satisfied = std::all_of(report.conditions.begin(), report.conditions.end(),
                                   [](const ScheduleCondition& c) { return c.satisfied; });
    return report;
}

AlphaThreshold alpha_threshold(double p, double theta, std::optional<int> dimension) {
    if (p <= 2.0) throw std::invalid_argument("threshold requires p > 2");
    if (theta < 1.0) throw std::invalid_argument("threshold requires theta >= 1");

    const double q = std::floor(p / 2.0);
    double term = 2.0 * p / (p - 2.0);
    if (q >= 2.0) term = std::min(term, 1.0 / (q - 1.0));

    AlphaThreshold out;
    out.general_form = 1.0 / (2.0 + theta + theta * term);
    if (dimension) {
        const int d = *dimension;
        if (d < 2) throw std::invalid_argument("dimension must be >= 2");
        if (p < 4.0)
            out.box_form = 1.0 / (d + 1.0 + 2.0 * p * (d - 1.0) / (p - 2.0));
        else
            out.box_form = 1.0 / (d + 1.0 + (d - 1.0) / (q - 1.0));
    }
    return out;
}

double lyapounov_ratio(std::span<const double> block_samples, double m, double p) {
    if (block_samples.size() < 2)
        throw std::invalid_argument("lyapounov_ratio needs at least 2 samples");
    if (p <= 2.0) throw std::invalid_argument("lyapounov_ratio requires p > 2");

    const double count = static_cast<double>(block_samples.size());
    double mean = 0.0;
    for (double x : block_samples) mean += x;
    mean /= count;

    double var = 0.0, cm = 0.0;
    for (double x : block_samples) {
        const double d = x - mean;
        var += d * d;
        cm += std::pow(std::abs(d), p);
    }
    var /= count;
    cm /= count;
    if (var <= 0.0) throw degenerate_error("all block samples identical: zero variance");
    return m * cm / std::pow(m * var, p / 2.0);
}

InequalityProbe power_mean_gap_bound(double x, double y, double p) {
    InequalityProbe probe;
    auto g = [p](double v) { return v * std::pow(std::abs(v), p - 2.0); };
    probe.lhs = std::abs(g(x) - g(y));
    probe.rhs = std::max(1.0, (p - 1.0) / 2.0) * std::abs(x - y) *
                (std::pow(std::abs(x), p - 2.0) + std::pow(std::abs(y), p - 2.0));
    // The bound is tight as x -> y (for p > 3), where the left side loses
    // precision to cancellation; the guard scales with the cancelled
    // magnitude, far below any true violation (which is of the order of rhs).
    const double guard = 1e-13 * (std::pow(std::abs(x), p - 1.0) + std::pow(std::abs(y), p - 1.0)) +
                         1e-12 * (probe.lhs + probe.rhs);
    probe.holds = probe.lhs <= probe.rhs + guard;
    return probe;
}

RootBoundProbe root_dominance_bound(double a, double b, double beta) {
    if (a < 0.0 || b < 0.0) throw std::invalid_argument("root bound requires a, b >= 0");
    if (beta <= 1.0) throw std::invalid_argument("root bound requires beta > 1");

    auto g = [&](double y) { return std::pow(y, beta) - b * y - a; };

    // Bracket from the bound itself, grown until g is positive.
    double hi = 2.0 + std::pow(b, 1.0 / (beta - 1.0)) + std::pow(a, 1.0 / beta);
    while (g(hi) <= 0.0) hi *= 2.0;

    // y_star is the largest root of g: below it g can dip negative, above it
    // g stays positive. Bisect on the sign of g from the right.
    double lo = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * (1.0 + hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }

    RootBoundProbe probe;
    probe.y_star = lo;
    probe.bound = std::pow(a, (beta - 1.0) / beta) + b;
    const double lhs = std::pow(probe.y_star, beta - 1.0);
    probe.holds = lhs <= probe.bound + 1e-9 * (1.0 + probe.bound);
    return probe;
}

namespace {

// Sum over exponent patterns (a_2..a_{2q}) with sum i*a_i = 2q of
// multinomial weights, split by |a| into the m^q and m coefficients.
void enumerate_patterns(int remaining, int next_exponent, int parts, int two_q, double& a_sum,
                        double& b_sum, int q, std::vector<int>& counts) {
    if (remaining == 0) {
        double denom = 1.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const int exponent = static_cast<int>(i) + 2;
            for (int rep = 0; rep < counts[i]; ++rep) denom *= std::tgamma(exponent + 1.0);
            denom *= std::tgamma(counts[i] + 1.0);
        }
        const double weight = std::tgamma(two_q + 1.0) / denom;
        a_sum += weight * (parts - 1.0) / (q - 1.0);
        b_sum += weight * (q - parts) / (q - 1.0);
        return;
    }
    if (next_exponent > remaining) return;
    for (int exponent = next_exponent; exponent <= remaining; ++exponent) {
        const int max_count = remaining / exponent;
        for (int c = 1; c <= max_count; ++c) {
            counts[exponent - 2] = c;
            enumerate_patterns(remaining - c * exponent, exponent + 1, parts + c, two_q, a_sum,
                               b_sum, q, counts);
            counts[exponent - 2] = 0;
        }
    }
}

}  // namespace

std::pair<double, double> iid_sum_moment_constants(int q) {
    if (q < 2 || q > 5)
        throw std::invalid_argument("moment constants computed exactly only for 2 <= q <= 5");
    const int two_q = 2 * q;
    double a_sum = 0.0, b_sum = 0.0;
    std::vector<int> counts(two_q - 1, 0);
    enumerate_patterns(two_q, 2, 0, two_q, a_sum, b_sum, q, counts);
    return {a_sum, b_sum};
}

}  // namespace fpcyl
