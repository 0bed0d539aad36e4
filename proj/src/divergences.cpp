#include "belieflab/divergences.hpp"

#include <cmath>
#include <string>

namespace belieflab {

void validate_distribution(const Eigen::Ref<const Eigen::VectorXd>& v,
                           double tol) {
    if (v.size() == 0)
        throw std::invalid_argument("distribution: empty vector");
    for (Eigen::Index s = 0; s < v.size(); ++s) {
        if (!(v[s] >= 0.0))
            throw std::invalid_argument("distribution: negative mass at symbol " +
                                        std::to_string(s));
    }
    if (std::abs(v.sum() - 1.0) > tol)
        throw std::invalid_argument("distribution: mass sums to " +
                                    std::to_string(v.sum()));
}

double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p,
                     const Eigen::Ref<const Eigen::VectorXd>& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("kl_divergence: size mismatch");
    double acc = 0.0;
    for (Eigen::Index s = 0; s < p.size(); ++s) {
        if (p[s] == 0.0) continue;
        if (q[s] == 0.0)
            throw absolute_continuity_error(
                "kl_divergence: p has mass at symbol " + std::to_string(s) +
                " where q vanishes");
        acc += p[s] * std::log(p[s] / q[s]);
    }
    // Round-off can leave a tiny negative residue when p == q.
    return acc < 0.0 && acc > -1e-15 ? 0.0 : acc;
}

double hellinger_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                          const Eigen::Ref<const Eigen::VectorXd>& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("hellinger_distance: size mismatch");
    double h2 = 0.0;
    for (Eigen::Index s = 0; s < p.size(); ++s) {
        const double d = std::sqrt(p[s]) - std::sqrt(q[s]);
        h2 += 0.5 * d * d;
    }
    if (h2 < 0.0) h2 = 0.0;
    if (h2 > 1.0) h2 = 1.0;
    return std::sqrt(h2);
}

double tv_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                   const Eigen::Ref<const Eigen::VectorXd>& q) {
    if (p.size() != q.size())
        throw std::invalid_argument("tv_distance: size mismatch");
    return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace belieflab
