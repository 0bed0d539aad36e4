#pragma once

#include <Eigen/Dense>
#include <vector>

#include "belieflab/common.hpp"

namespace belieflab {

// Hypothesis set the agents reason over.  Finite sets and truncated countable
// sets are plain index ranges; grids additionally carry coordinates and
// quadrature weights so integrals become weighted sums.
struct HypothesisSpace {
    enum class Kind { Finite, CountableTruncated, Grid };

    Kind kind = Kind::Finite;
    long size = 0;

    // CountableTruncated: how many elements of the countable family are kept.
    long truncation_level = 0;

    // Grid only.
    int dim = 0;
    Eigen::VectorXd lo, hi;           // box bounds per axis
    std::vector<int> points_per_axis;
    Eigen::MatrixXd points;           // size x dim, cell centers
    Eigen::VectorXd weights;          // quadrature weight per point (cell volume)

    // Log quadrature weights; zeros for non-grid spaces.
    Eigen::VectorXd log_weights() const;

    // Log prior mass per hypothesis under the uniform prior.
    Eigen::VectorXd log_uniform_mass() const;
};

HypothesisSpace finite_space(long size);
HypothesisSpace countable_space(long size, long truncation_level);

// Uniform cell-centered grid over an axis-aligned box.  Weights are the cell
// volumes and sum to the box volume.
HypothesisSpace grid_space(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const std::vector<int>& points_per_axis);

// Private signal structure of the network: one finite-alphabet likelihood
// table per agent, rows indexed by hypothesis.  Row theta_star of agent i is
// that agent's true signal distribution.
struct LikelihoodModel {
    int n = 0;                          // number of agents
    std::vector<int> alphabets;         // symbols per agent
    long theta_star = 0;
    std::vector<Eigen::MatrixXd> tables;  // tables[i]: |Theta| x alphabets[i]

    long num_hypotheses() const {
        return tables.empty() ? 0 : tables.front().rows();
    }
    Eigen::VectorXd row(int agent, long theta) const {
        return tables.at(agent).row(theta).transpose();
    }
    Eigen::VectorXd truth_row(int agent) const { return row(agent, theta_star); }
};

// Structural checks: shapes agree, every table row is a distribution,
// theta_star indexes a hypothesis.  Throws std::invalid_argument or
// assumption_error on violation.
void validate_model(const LikelihoodModel& model, double tol = 1e-12);

// Smallest likelihood the model assigns anywhere the truth has mass:
//   min over agents i, hypotheses theta, symbols s with f^i(s) > 0
// of tables[i](theta, s).  Zero is an assumption_error naming the offending
// (agent, hypothesis, symbol) triple.
double likelihood_floor(const LikelihoodModel& model);

// Average per-agent KL divergence from the truth,
//   (1/n) sum_i D(f^i || l^i(.|theta)).
// This is the geometric rate at which the network rejects theta.
double kl_rate(const LikelihoodModel& model, long theta);

// Scaled joint Hellinger distance between two hypotheses:
//   (1/sqrt(n)) * h_joint,  h_joint^2 = 1 - prod_i (1 - h_i^2),
// where h_i is the per-agent Hellinger distance.  The product identity makes
// h_joint the Hellinger distance between the product distributions over the
// joint signal alphabet.
double joint_hellinger(const LikelihoodModel& model, long theta_a, long theta_b);

}  // namespace belieflab
