#pragma once

#include <Eigen/Dense>

#include "belieflab/common.hpp"

namespace belieflab {

// Checks that v is a probability vector: entries >= 0, sum within `tol` of 1.
// Throws std::invalid_argument when it is not.
void validate_distribution(const Eigen::Ref<const Eigen::VectorXd>& v,
                           double tol = 1e-12);

// Kullback-Leibler divergence D(p || q) = sum_s p(s) log(p(s)/q(s)) in nats.
// Terms with p(s) = 0 contribute zero.  p(s) > 0 with q(s) = 0 raises
// absolute_continuity_error naming the offending symbol.
double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p,
                     const Eigen::Ref<const Eigen::VectorXd>& q);

// Hellinger distance with the convention
//   h^2(p, q) = (1/2) sum_s (sqrt(p(s)) - sqrt(q(s)))^2 = 1 - sum_s sqrt(p q),
// so h lies in [0, 1] and equals 1 exactly for disjoint supports.
double hellinger_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                          const Eigen::Ref<const Eigen::VectorXd>& q);

// Total variation distance (1/2) sum_s |p(s) - q(s)|.
double tv_distance(const Eigen::Ref<const Eigen::VectorXd>& p,
                   const Eigen::Ref<const Eigen::VectorXd>& q);

}  // namespace belieflab
