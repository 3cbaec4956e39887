// decomposition.hpp — block decomposition of side-to-side times, the
// closed-form block-length exponent schedule, CLT threshold exponents, and
// the two technical inequalities as checkable predicates.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpcyl/passage.hpp"

namespace fpcyl {

struct Decomposition {
    int block_length = 0;
    int block_count = 0;  // full blocks m
    int remainder = 0;
    std::vector<double> block_times;  // X_1..X_{m+1}; X_{m+1} = 0 when remainder = 0
    double total = 0.0;               // T_n on the same weights
    double error = 0.0;               // Y = total - sum(block_times), >= 0
};

// X_i = side-to-side time of [(i-1)l, il] x G; the remainder block covers
// [ml, n]. Y = T_n - sum X_i is the connector cost. By default the graph
// must span exactly [0,n]; a window graph works when n is passed explicitly.
Decomposition block_times(const CylinderGraph& graph, const WeightConfig& weights, int l,
                          PassageScratch* scratch = nullptr, std::optional<int> n_override = {});

struct Schedule {
    int q = 2;
    double theta = 1.0;
    int depth = 1;  // t
    double ratio = 0.0;  // r = 1 - 1/(2q)
    std::vector<double> betas;  // beta_1 > ... > beta_t
    double alpha_star = 0.0;        // finite-depth threshold
    double alpha_star_limit = 0.0;  // depth -> infinity limit
};

// Closed-form solution of the equal-slack linear system:
//   beta_i = 1 - q theta (1 - r^i) / (theta + (q-1)(2+theta)(1 - r^t)).
Schedule beta_schedule(int q, double theta, int t);

struct ScheduleCondition {
    std::string name;
    double slack = 0.0;  // >= 0 when satisfied; chain conditions need > 0
    bool strict = false;
    bool satisfied = false;
};

struct ScheduleReport {
    bool satisfied = false;
    std::vector<ScheduleCondition> conditions;
};

// Evaluates, with beta_0 = 1:
//   strict chain   2 alpha < beta_t < ... < beta_1 < 1
//   per level i    alpha <= (1 - 2(beta_i - beta_{i+1}) - (1-beta_i)/q)/(2+theta)
//   closing bound  alpha <= ((q-1)/q) (1-beta_t)/theta
ScheduleReport verify_schedule(const Schedule& s, double alpha);

struct AlphaThreshold {
    std::optional<double> box_form;  // requires the dimension
    double general_form = 0.0;
};

// Width-growth exponent thresholds. general_form uses
//   1 / (2 + theta + theta*min{2p/(p-2), 1/(floor(p/2)-1)}),
// the min's second entry only when floor(p/2) >= 2; box_form specializes
// theta = d-1 for box bases.
AlphaThreshold alpha_threshold(double p, double theta, std::optional<int> dimension = {});

class degenerate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Plug-in Lyapounov diagnostic: m * E|X - mean|^p / (m * Var)^{p/2}.
double lyapounov_ratio(std::span<const double> block_samples, double m, double p);

struct InequalityProbe {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// | x|x|^{p-2} - y|y|^{p-2} | <= max{1,(p-1)/2} |x-y| (|x|^{p-2} + |y|^{p-2})
InequalityProbe power_mean_gap_bound(double x, double y, double p);

struct RootBoundProbe {
    double y_star = 0.0;
    double bound = 0.0;
    bool holds = false;
};

// y_star = sup{y >= 0 : y^beta <= a + b y}, then y_star^{beta-1} <= a^{(beta-1)/beta} + b.
RootBoundProbe root_dominance_bound(double a, double b, double beta);

// Exact combinatorial constants (A_q, B_q) of the i.i.d. 2q-th moment bound
//   E[S_m^{2q}] <= A_q m^q E[Y^2]^q + B_q m E[Y^{2q}],
// computed by enumerating exponent patterns with no first-moment factor.
std::pair<double, double> iid_sum_moment_constants(int q);

}  // namespace fpcyl
