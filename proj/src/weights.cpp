#include "fpcyl/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fpcyl {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

WeightDistribution WeightDistribution::deterministic(double c) {
    require(c >= 0.0, "deterministic weight must be nonnegative");
    WeightDistribution d;
    d.family_ = Family::deterministic;
    d.params_ = {c};
    d.mean_ = c;
    d.variance_ = 0.0;
    d.support_min_ = c;
    d.atom_mass_ = 1.0;
    return d;
}

WeightDistribution WeightDistribution::exponential(double rate) {
    require(rate > 0.0, "exponential rate must be positive");
    WeightDistribution d;
    d.family_ = Family::exponential;
    d.params_ = {rate};
    d.mean_ = 1.0 / rate;
    d.variance_ = 1.0 / (rate * rate);
    d.support_min_ = 0.0;
    d.atom_mass_ = 0.0;
    return d;
}

WeightDistribution WeightDistribution::uniform(double a, double b) {
    require(a >= 0.0, "uniform support must lie in [0,inf)");
    require(b > a, "uniform needs a < b");
    WeightDistribution d;
    d.family_ = Family::uniform;
    d.params_ = {a, b};
    d.mean_ = 0.5 * (a + b);
    d.variance_ = (b - a) * (b - a) / 12.0;
    d.support_min_ = a;
    d.atom_mass_ = 0.0;
    return d;
}

WeightDistribution WeightDistribution::shifted_bernoulli(double lambda, double delta,
                                                         double p_atom) {
    require(lambda >= 0.0, "support minimum must be nonnegative");
    require(delta > 0.0, "shifted_bernoulli needs delta > 0");
    require(p_atom > 0.0 && p_atom < 1.0, "shifted_bernoulli needs p_atom in (0,1)");
    WeightDistribution d;
    d.family_ = Family::shifted_bernoulli;
    d.params_ = {lambda, delta, p_atom};
    d.mean_ = lambda + (1.0 - p_atom) * delta;
    d.variance_ = delta * delta * p_atom * (1.0 - p_atom);
    d.support_min_ = lambda;
    d.atom_mass_ = p_atom;
    return d;
}

WeightDistribution WeightDistribution::empirical(std::vector<double> values,
                                                 std::vector<double> probs) {
    require(!values.empty() && values.size() == probs.size(),
            "empirical law needs matching nonempty value/probability lists");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });

    WeightDistribution d;
    d.family_ = Family::empirical;
    double total = 0.0;
    for (std::size_t idx : order) {
        require(values[idx] >= 0.0, "empirical support must lie in [0,inf)");
        require(probs[idx] > 0.0, "empirical probabilities must be positive");
        if (!d.emp_values_.empty() && values[idx] == d.emp_values_.back()) {
            d.emp_probs_.back() += probs[idx];
        } else {
            d.emp_values_.push_back(values[idx]);
            d.emp_probs_.push_back(probs[idx]);
        }
        total += probs[idx];
    }
    require(std::abs(total - 1.0) <= 1e-12, "empirical probabilities must sum to 1");

    d.emp_cum_.resize(d.emp_probs_.size());
    double run = 0.0;
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < d.emp_probs_.size(); ++i) {
        run += d.emp_probs_[i];
        d.emp_cum_[i] = run;
        mean += d.emp_probs_[i] * d.emp_values_[i];
        sq += d.emp_probs_[i] * d.emp_values_[i] * d.emp_values_[i];
    }
    d.emp_cum_.back() = 1.0;
    d.mean_ = mean;
    d.variance_ = std::max(0.0, sq - mean * mean);
    d.support_min_ = d.emp_values_.front();
    d.atom_mass_ = d.emp_probs_.front();
    return d;
}

WeightDistribution WeightDistribution::empirical_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open empirical law file: " + path);
    std::vector<double> values, probs;
    double v = 0, p = 0;
    while (in >> v >> p) {
        values.push_back(v);
        probs.push_back(p);
    }
    return empirical(std::move(values), std::move(probs));
}

WeightDistribution WeightDistribution::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    std::vector<double> args;
    std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (name == "empirical") {
        if (tail.empty()) throw std::invalid_argument("empirical law needs a file path");
        return empirical_from_file(tail);
    }
    std::stringstream ss(tail);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        std::size_t used = 0;
        double x = std::stod(piece, &used);
        if (used != piece.size())
            throw std::invalid_argument("bad numeric parameter in distribution: " + piece);
        args.push_back(x);
    }
    auto want = [&](std::size_t k) {
        if (args.size() != k)
            throw std::invalid_argument("distribution " + name + " expects " + std::to_string(k) +
                                        " parameters, got " + std::to_string(args.size()));
    };
    if (name == "deterministic") {
        want(1);
        return deterministic(args[0]);
    }
    if (name == "exponential") {
        want(1);
        return exponential(args[0]);
    }
    if (name == "uniform") {
        want(2);
        return uniform(args[0], args[1]);
    }
    if (name == "shifted_bernoulli") {
        want(3);
        return shifted_bernoulli(args[0], args[1], args[2]);
    }
    throw std::invalid_argument("unknown distribution family: " + name);
}

double WeightDistribution::sample(RngStream& stream) const {
    switch (family_) {
        case Family::deterministic:
            return params_[0];
        case Family::exponential:
            return stream.exponential(params_[0]);
        case Family::uniform:
            return stream.uniform(params_[0], params_[1]);
        case Family::shifted_bernoulli:
            return stream.uniform01() < params_[2] ? params_[0] : params_[0] + params_[1];
        case Family::empirical: {
            double u = stream.uniform01();
            auto it = std::upper_bound(emp_cum_.begin(), emp_cum_.end(), u);
            std::size_t i = std::min<std::size_t>(it - emp_cum_.begin(), emp_values_.size() - 1);
            return emp_values_[i];
        }
    }
    return 0.0;
}

double WeightDistribution::moment(double p) const {
    require(p >= 1.0, "moment order must be >= 1");
    switch (family_) {
        case Family::deterministic:
            return std::pow(params_[0], p);
        case Family::exponential:
            return std::tgamma(p + 1.0) / std::pow(params_[0], p);
        case Family::uniform: {
            double a = params_[0], b = params_[1];
            return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / ((p + 1.0) * (b - a));
        }
        case Family::shifted_bernoulli: {
            double lam = params_[0], del = params_[1], pa = params_[2];
            return pa * std::pow(lam, p) + (1.0 - pa) * std::pow(lam + del, p);
        }
        case Family::empirical: {
            double s = 0.0;
            for (std::size_t i = 0; i < emp_values_.size(); ++i)
                s += emp_probs_[i] * std::pow(emp_values_[i], p);
            return s;
        }
    }
    return 0.0;
}

double WeightDistribution::quantile(double u) const {
    u = std::min(std::max(u, 0.0), 1.0);
    switch (family_) {
        case Family::deterministic:
            return params_[0];
        case Family::exponential:
            return u >= 1.0 ? std::numeric_limits<double>::infinity()
                            : -std::log1p(-u) / params_[0];
        case Family::uniform:
            return params_[0] + u * (params_[1] - params_[0]);
        case Family::shifted_bernoulli:
            return u <= params_[2] ? params_[0] : params_[0] + params_[1];
        case Family::empirical: {
            auto it = std::lower_bound(emp_cum_.begin(), emp_cum_.end(), u);
            std::size_t i = std::min<std::size_t>(it - emp_cum_.begin(), emp_values_.size() - 1);
            return emp_values_[i];
        }
    }
    return 0.0;
}

double WeightDistribution::cdf(double x) const {
    switch (family_) {
        case Family::deterministic:
            return x >= params_[0] ? 1.0 : 0.0;
        case Family::exponential:
            return x <= 0.0 ? 0.0 : -std::expm1(-params_[0] * x);
        case Family::uniform: {
            double a = params_[0], b = params_[1];
            if (x <= a) return 0.0;
            if (x >= b) return 1.0;
            return (x - a) / (b - a);
        }
        case Family::shifted_bernoulli: {
            if (x < params_[0]) return 0.0;
            if (x < params_[0] + params_[1]) return params_[2];
            return 1.0;
        }
        case Family::empirical: {
            auto it = std::upper_bound(emp_values_.begin(), emp_values_.end(), x);
            if (it == emp_values_.begin()) return 0.0;
            return emp_cum_[static_cast<std::size_t>(it - emp_values_.begin()) - 1];
        }
    }
    return 0.0;
}

std::string WeightDistribution::describe() const {
    std::ostringstream out;
    switch (family_) {
        case Family::deterministic:
            out << "deterministic:" << params_[0];
            break;
        case Family::exponential:
            out << "exponential:" << params_[0];
            break;
        case Family::uniform:
            out << "uniform:" << params_[0] << "," << params_[1];
            break;
        case Family::shifted_bernoulli:
            out << "shifted_bernoulli:" << params_[0] << "," << params_[1] << "," << params_[2];
            break;
        case Family::empirical:
            out << "empirical[" << emp_values_.size() << " atoms]";
            break;
    }
    return out.str();
}

double default_pc(int dimension) {
    // d=2 is the exact self-dual value; the rest are numerical estimates for
    // bond percolation on Z^d (not constants from any theorem here).
    switch (dimension) {
        case 2:
            return 0.5;
        case 3:
            return 0.2488126;
        case 4:
            return 0.1601314;
        case 5:
            return 0.1181718;
        case 6:
            return 0.0942019;
        default:
            require(dimension >= 2, "dimension must be >= 2");
            return 1.0 / (2.0 * dimension - 1.0);  // Bethe-lattice approximation
    }
}

Admissibility admissibility_check(const WeightDistribution& dist, int /*dimension*/,
                                  double p_c) {
    require(p_c > 0.0 && p_c < 1.0, "p_c must lie in (0,1)");
    if (dist.degenerate()) return Admissibility::degenerate;
    return dist.atom_mass_at_min() < p_c ? Admissibility::admissible
                                         : Admissibility::inadmissible;
}

HTransform h_transform(const WeightDistribution& dist) {
    require(!dist.degenerate(), "h-transform requires a nondegenerate law");
    HTransform out;
    out.transformed_support_min = 0.0;
    out.transformed_atom_mass = dist.atom_mass_at_min();

    switch (dist.family()) {
        case WeightDistribution::Family::exponential: {
            double rate = dist.params()[0];
            out.h = [rate](double x) {
                if (x <= 0.0) return 0.0;
                return x + std::expm1(-rate * x) / rate;
            };
            break;
        }
        case WeightDistribution::Family::uniform: {
            double a = dist.params()[0], b = dist.params()[1];
            out.h = [a, b](double x) {
                if (x <= a) return 0.0;
                if (x >= b) return x - 0.5 * (a + b);
                return (x - a) * (x - a) / (2.0 * (b - a));
            };
            break;
        }
        case WeightDistribution::Family::shifted_bernoulli: {
            double lam = dist.params()[0], del = dist.params()[1], pa = dist.params()[2];
            out.h = [lam, del, pa](double x) {
                if (x <= lam) return 0.0;
                if (x <= lam + del) return pa * (x - lam);
                return pa * del + (x - lam - del);
            };
            break;
        }
        case WeightDistribution::Family::empirical: {
            auto values = dist.empirical_values();
            auto probs = dist.empirical_probs();
            out.h = [values, probs](double x) {
                double s = 0.0;
                for (std::size_t i = 0; i < values.size(); ++i)
                    s += probs[i] * std::max(0.0, x - values[i]);
                return s;
            };
            break;
        }
        case WeightDistribution::Family::deterministic:
            throw std::invalid_argument("h-transform requires a nondegenerate law");
    }
    return out;
}

WeightConfig sample_weights(const CylinderGraph& graph, const WeightDistribution& dist,
                            std::uint64_t master_seed, std::uint64_t stream_id) {
    WeightConfig cfg;
    cfg.master_seed = master_seed;
    cfg.stream_id = stream_id;
    cfg.enumeration_hash = graph.enumeration_hash();
    cfg.weights.resize(graph.edge_count());
    RngStream stream = RngStream::derive(master_seed, stream_id);
    for (auto& w : cfg.weights) w = dist.sample(stream);
    return cfg;
}

WeightConfig extend_weights(const CylinderGraph& old_graph, const WeightConfig& old_config,
                            const CylinderGraph& new_graph, const WeightDistribution& dist,
                            RngStream fresh) {
    if (old_config.enumeration_hash != old_graph.enumeration_hash())
        throw std::invalid_argument("weight config does not belong to the old window graph");
    if (new_graph.col_lo() > old_graph.col_lo() || new_graph.col_hi() < old_graph.col_hi())
        throw std::invalid_argument("new window must contain the old one");

    WeightConfig cfg;
    cfg.master_seed = old_config.master_seed;
    cfg.stream_id = old_config.stream_id;
    cfg.enumeration_hash = new_graph.enumeration_hash();
    cfg.weights.resize(new_graph.edge_count());

    for (std::size_t eid = 0; eid < cfg.weights.size(); ++eid) {
        const int c = new_graph.edge_column(eid);
        const bool horiz = new_graph.edge_is_horizontal(eid);
        const std::size_t slot =
            horiz ? new_graph.edge_slot(eid) - new_graph.base_edge_count() : new_graph.edge_slot(eid);
        const bool in_old = horiz ? (c >= old_graph.col_lo() && c < old_graph.col_hi())
                                  : (c >= old_graph.col_lo() && c <= old_graph.col_hi());
        if (in_old) {
            cfg.weights[eid] = old_config.weights[old_graph.edge_id(c, horiz, slot)];
        } else {
            cfg.weights[eid] = dist.sample(fresh);
        }
    }
    return cfg;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    return adaptive(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

}  // namespace fpcyl
