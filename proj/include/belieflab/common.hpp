#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace belieflab {

// Log-beliefs at or below this value are treated as exactly annihilated
// hypotheses.  Clamping here keeps 0 * (-inf) out of the mixing product while
// exp() of the clamped value is still exactly zero.
inline constexpr double kLogZeroFloor = -1e9;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A distribution whose support escapes the reference distribution's support.
struct absolute_continuity_error : std::domain_error {
    explicit absolute_continuity_error(const std::string& what)
        : std::domain_error(what) {}
};

// A model, weight matrix, or prior violating a standing assumption.
struct assumption_error : std::domain_error {
    explicit assumption_error(const std::string& what)
        : std::domain_error(what) {}
};

// An update that cannot be normalized (likelihood vanished everywhere).
struct degenerate_likelihood_error : std::runtime_error {
    explicit degenerate_likelihood_error(const std::string& what)
        : std::runtime_error(what) {}
};

// Iterative solver used for cross-checking failed to converge.  This signals
// broken test infrastructure, not a user mistake.
struct oracle_failure : std::runtime_error {
    explicit oracle_failure(const std::string& what)
        : std::runtime_error(what) {}
};

// log(sum_i exp(v_i)) computed against the running maximum.  Returns -inf for
// empty or all -inf input; NaN propagates.
inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) return kNegInf;
    const double m = v.maxCoeff();
    if (std::isnan(m)) return m;
    if (m == kNegInf) return kNegInf;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v[i] - m);
    return m + std::log(acc);
}

// log(sum_i w_i exp(v_i)) with weights supplied in log scale.
inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v,
                          const Eigen::Ref<const Eigen::VectorXd>& log_w) {
    if (v.size() != log_w.size())
        throw std::invalid_argument("log_sum_exp: size mismatch");
    return log_sum_exp(Eigen::VectorXd(v + log_w));
}

}  // namespace belieflab
