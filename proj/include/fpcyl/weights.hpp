// weights.hpp — edge-weight laws, admissibility, the h-transform, and
// sampling onto cylinder edges.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpcyl/graph.hpp"
#include "fpcyl/rng.hpp"

namespace fpcyl {

enum class Admissibility { admissible, inadmissible, degenerate };

class WeightDistribution {
public:
    enum class Family { deterministic, exponential, uniform, shifted_bernoulli, empirical };

    static WeightDistribution deterministic(double c);
    static WeightDistribution exponential(double rate);
    static WeightDistribution uniform(double a, double b);
    // lambda with probability p_atom, lambda + delta otherwise.
    static WeightDistribution shifted_bernoulli(double lambda, double delta, double p_atom);
    static WeightDistribution empirical(std::vector<double> values, std::vector<double> probs);
    // Two-column text file: value probability, one atom per line.
    static WeightDistribution empirical_from_file(const std::string& path);
    // "exponential:1", "uniform:0,1", "deterministic:2",
    // "shifted_bernoulli:0,1,0.5", "empirical:path.txt"
    static WeightDistribution parse(const std::string& text);

    Family family() const { return family_; }
    const std::vector<double>& params() const { return params_; }

    double mean() const { return mean_; }
    double variance() const { return variance_; }
    // Smallest point of the support.
    double support_min() const { return support_min_; }
    // F(lambda): probability mass sitting exactly at the support minimum.
    double atom_mass_at_min() const { return atom_mass_; }
    bool degenerate() const { return variance_ <= 0.0; }

    double sample(RngStream& stream) const;

    // E[w^p], closed form per family. Requires p >= 1.
    double moment(double p) const;

    // Quantile of the law (exact for the supported families); used to pick
    // quadrature windows.
    double quantile(double u) const;

    // CDF F(x).
    double cdf(double x) const;

    // empirical family only: sorted atoms and their masses.
    const std::vector<double>& empirical_values() const { return emp_values_; }
    const std::vector<double>& empirical_probs() const { return emp_probs_; }

    std::string describe() const;

private:
    Family family_;
    std::vector<double> params_;
    double mean_ = 0, variance_ = 0, support_min_ = 0, atom_mass_ = 0;

    // empirical support (sorted) and per-atom probabilities + cumulative
    std::vector<double> emp_values_, emp_probs_, emp_cum_;
};

// Default bond-percolation thresholds p_c(d). The d=2 value is exact;
// d >= 3 are numerical point estimates from the simulation literature.
double default_pc(int dimension);

Admissibility admissibility_check(const WeightDistribution& dist, int dimension, double p_c);

// h(x) = E[(x - eta)_+] with eta ~ dist, together with the support summary of
// the transformed weight law h(omega).
struct HTransform {
    std::function<double(double)> h;
    double transformed_support_min = 0.0;
    double transformed_atom_mass = 0.0;  // P(h(omega) = 0) = P(omega = lambda)
};

HTransform h_transform(const WeightDistribution& dist);

// A sampled weight vector in canonical edge order plus its provenance.
struct WeightConfig {
    std::vector<double> weights;
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t enumeration_hash = 0;

    double operator[](std::size_t eid) const { return weights[eid]; }
    std::size_t size() const { return weights.size(); }
};

WeightConfig sample_weights(const CylinderGraph& graph, const WeightDistribution& dist,
                            std::uint64_t master_seed, std::uint64_t stream_id);

// Extend a configuration sampled on `old_graph` to the wider window
// `new_graph` (same base, containing column span). Edges present in the old
// window keep their draws; new edges are filled from the given substream in
// canonical order.
WeightConfig extend_weights(const CylinderGraph& old_graph, const WeightConfig& old_config,
                            const CylinderGraph& new_graph, const WeightDistribution& dist,
                            RngStream fresh);

// Adaptive Simpson integral, used as the independent quadrature oracle for
// moments and the h-transform.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10);

}  // namespace fpcyl
