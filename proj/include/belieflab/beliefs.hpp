#pragma once

#include <Eigen/Dense>
#include <vector>

#include "belieflab/model.hpp"
#include "belieflab/network.hpp"

namespace belieflab {

// Joint belief of the network: row i holds agent i's log belief over the
// hypothesis set.  On grids the rows are log densities with respect to the
// quadrature measure, so a normalized row satisfies
//   log_sum_exp(row + log_weights) == 0.
struct BeliefState {
    Eigen::MatrixXd log_beliefs;  // n x |Theta|
    long step_index = 0;

    int n() const { return static_cast<int>(log_beliefs.rows()); }
    long num_hypotheses() const { return log_beliefs.cols(); }
};

// All agents start from the uniform belief.
BeliefState uniform_beliefs(int n, const HypothesisSpace& space);

// n x |Theta| matrix of log l^i(obs[i] | theta).
Eigen::MatrixXd log_likelihood_matrix(const LikelihoodModel& model,
                                      const std::vector<int>& obs);

// One social-learning round applied to raw log-likelihood columns: mix
// neighbors' log beliefs with the weight matrix, add the local log
// likelihood, renormalize each row.  `log_weights` may be null for counting
// measure.  Throws degenerate_likelihood_error when a row cannot be
// normalized.
void belief_step_core(Eigen::MatrixXd& log_beliefs, const WeightMatrix& w,
                      const Eigen::MatrixXd& log_lik,
                      const Eigen::VectorXd* log_weights);

// One round driven by the model and an observation profile (one symbol per
// agent).
BeliefState belief_step(const BeliefState& state, const WeightMatrix& w,
                        const LikelihoodModel& model,
                        const std::vector<int>& obs,
                        const Eigen::VectorXd* log_weights = nullptr);

// Agent i's log belief after k rounds written in closed form: weight the
// initial log beliefs by row i of A^k and the per-step log likelihoods by
// rows of A^{k-t}, then normalize.  `history` holds one observation profile
// per row.
Eigen::VectorXd belief_from_history(const BeliefState& initial,
                                    const WeightMatrix& w,
                                    const LikelihoodModel& model,
                                    const Eigen::MatrixXi& history, long k,
                                    int agent,
                                    const Eigen::VectorXd* log_weights = nullptr);

// Independent route to the same update: minimize
//   G(pi) = E_pi[-log l^i(s|.)] + sum_j a_ij KL(pi || mu_j)
// over the simplex by exponentiated gradient steps.  Finite hypothesis sets
// only.  Returns the minimizer in linear scale.  Throws oracle_failure if the
// iteration cap is hit before the objective stalls.
struct MirrorDescentOptions {
    double step_size = 0.5;
    int max_iterations = 50000;
    double objective_tol = 1e-12;
};

Eigen::VectorXd mirror_descent_minimizer(
    const BeliefState& state, const WeightMatrix& w,
    const LikelihoodModel& model, const std::vector<int>& obs, int agent,
    const MirrorDescentOptions& options = {});

// Belief mass agent `agent` assigns to a hypothesis subset (quadrature
// weighted on grids).
double belief_mass(const BeliefState& state, int agent,
                   const std::vector<long>& subset,
                   const Eigen::VectorXd* log_weights = nullptr);

// Largest pairwise total-variation distance between agents' beliefs.
double consensus_gap(const BeliefState& state,
                     const Eigen::VectorXd* log_weights = nullptr);

// Worst-case |log_sum_exp(row + log_weights)| across agents; diagnostic for
// normalization drift.
double normalization_drift(const BeliefState& state,
                           const Eigen::VectorXd* log_weights = nullptr);

}  // namespace belieflab
