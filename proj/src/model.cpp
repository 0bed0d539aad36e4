#include "belieflab/model.hpp"

#include <cmath>
#include <string>

#include "belieflab/divergences.hpp"

namespace belieflab {

Eigen::VectorXd HypothesisSpace::log_weights() const {
    if (kind == Kind::Grid) return weights.array().log();
    return Eigen::VectorXd::Zero(size);
}

Eigen::VectorXd HypothesisSpace::log_uniform_mass() const {
    if (kind == Kind::Grid)
        return (weights / weights.sum()).array().log();
    return Eigen::VectorXd::Constant(size, -std::log(static_cast<double>(size)));
}

HypothesisSpace finite_space(long size) {
    if (size < 1) throw std::invalid_argument("finite_space: size < 1");
    HypothesisSpace sp;
    sp.kind = HypothesisSpace::Kind::Finite;
    sp.size = size;
    sp.weights = Eigen::VectorXd::Ones(size);
    return sp;
}

HypothesisSpace countable_space(long size, long truncation_level) {
    if (size < 1) throw std::invalid_argument("countable_space: size < 1");
    if (truncation_level < size)
        throw std::invalid_argument("countable_space: truncation below size");
    HypothesisSpace sp;
    sp.kind = HypothesisSpace::Kind::CountableTruncated;
    sp.size = size;
    sp.truncation_level = truncation_level;
    sp.weights = Eigen::VectorXd::Ones(size);
    return sp;
}

HypothesisSpace grid_space(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const std::vector<int>& points_per_axis) {
    const int d = static_cast<int>(points_per_axis.size());
    if (d < 1) throw std::invalid_argument("grid_space: no axes");
    if (lo.size() != d || hi.size() != d)
        throw std::invalid_argument("grid_space: bounds/axis count mismatch");

    long total = 1;
    Eigen::VectorXd width(d);
    for (int a = 0; a < d; ++a) {
        if (points_per_axis[a] < 1)
            throw std::invalid_argument("grid_space: axis with no points");
        if (!(hi[a] > lo[a]))
            throw std::invalid_argument("grid_space: empty box on axis " +
                                        std::to_string(a));
        total *= points_per_axis[a];
        width[a] = (hi[a] - lo[a]) / points_per_axis[a];
    }

    HypothesisSpace sp;
    sp.kind = HypothesisSpace::Kind::Grid;
    sp.size = total;
    sp.dim = d;
    sp.lo = lo;
    sp.hi = hi;
    sp.points_per_axis = points_per_axis;
    sp.points.resize(total, d);
    sp.weights = Eigen::VectorXd::Constant(total, width.prod());

    // Row-major enumeration: the last axis varies fastest.
    std::vector<int> idx(d, 0);
    for (long p = 0; p < total; ++p) {
        for (int a = 0; a < d; ++a)
            sp.points(p, a) = lo[a] + (idx[a] + 0.5) * width[a];
        for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < points_per_axis[a]) break;
            idx[a] = 0;
        }
    }
    return sp;
}

void validate_model(const LikelihoodModel& model, double tol) {
    if (model.n < 1) throw std::invalid_argument("model: n < 1");
    if (static_cast<int>(model.tables.size()) != model.n ||
        static_cast<int>(model.alphabets.size()) != model.n)
        throw std::invalid_argument("model: tables/alphabets count != n");
    const long ntheta = model.num_hypotheses();
    if (ntheta < 1) throw std::invalid_argument("model: no hypotheses");
    for (int i = 0; i < model.n; ++i) {
        const auto& t = model.tables[i];
        if (t.rows() != ntheta)
            throw std::invalid_argument("model: agent " + std::to_string(i) +
                                        " table has wrong hypothesis count");
        if (t.cols() != model.alphabets[i])
            throw std::invalid_argument("model: agent " + std::to_string(i) +
                                        " table does not match alphabet size");
        for (long th = 0; th < ntheta; ++th) {
            try {
                validate_distribution(t.row(th).transpose(), tol);
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument(
                    "model: agent " + std::to_string(i) + ", hypothesis " +
                    std::to_string(th) + ": " + e.what());
            }
        }
    }
    if (model.theta_star < 0 || model.theta_star >= ntheta)
        throw std::invalid_argument("model: theta_star out of range");
}

double likelihood_floor(const LikelihoodModel& model) {
    double alpha = 1.0;
    for (int i = 0; i < model.n; ++i) {
        const Eigen::VectorXd truth = model.truth_row(i);
        const auto& t = model.tables[i];
        for (long th = 0; th < t.rows(); ++th)
            for (int s = 0; s < t.cols(); ++s) {
                if (truth[s] <= 0.0) continue;
                const double v = t(th, s);
                if (v <= 0.0)
                    throw assumption_error(
                        "likelihood_floor: zero likelihood at agent " +
                        std::to_string(i) + ", hypothesis " + std::to_string(th) +
                        ", symbol " + std::to_string(s) +
                        " where the truth has mass");
                if (v < alpha) alpha = v;
            }
    }
    return alpha;
}

double kl_rate(const LikelihoodModel& model, long theta) {
    double acc = 0.0;
    for (int i = 0; i < model.n; ++i)
        acc += kl_divergence(model.truth_row(i), model.row(i, theta));
    return acc / model.n;
}

double joint_hellinger(const LikelihoodModel& model, long theta_a,
                       long theta_b) {
    double prod = 1.0;  // running product of Bhattacharyya coefficients
    for (int i = 0; i < model.n; ++i) {
        const double h = hellinger_distance(model.row(i, theta_a),
                                            model.row(i, theta_b));
        prod *= 1.0 - h * h;
    }
    double h2 = 1.0 - prod;
    if (h2 < 0.0) h2 = 0.0;
    return std::sqrt(h2 / model.n);
}

}  // namespace belieflab
