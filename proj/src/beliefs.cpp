#include "belieflab/beliefs.hpp"

#include <cmath>
#include <string>

namespace belieflab {

namespace {

Eigen::VectorXd zero_weights_if_null(const Eigen::VectorXd* log_weights,
                                     long size) {
    if (log_weights == nullptr) return Eigen::VectorXd::Zero(size);
    if (log_weights->size() != size)
        throw std::invalid_argument("log_weights size does not match hypothesis count");
    return *log_weights;
}

void check_obs(const LikelihoodModel& model, const std::vector<int>& obs) {
    if (static_cast<int>(obs.size()) != model.n)
        throw std::invalid_argument("observation profile: need one symbol per agent");
    for (int i = 0; i < model.n; ++i)
        if (obs[i] < 0 || obs[i] >= model.alphabets[i])
            throw std::invalid_argument("observation profile: symbol " +
                                        std::to_string(obs[i]) +
                                        " out of range for agent " +
                                        std::to_string(i));
}

}  // namespace

BeliefState uniform_beliefs(int n, const HypothesisSpace& space) {
    if (n < 1) throw std::invalid_argument("uniform_beliefs: n < 1");
    BeliefState state;
    // Uniform density 1/total mass; for unit weights this is 1/|Theta|.
    state.log_beliefs = Eigen::MatrixXd::Constant(
        n, space.size, -std::log(space.weights.sum()));
    return state;
}

Eigen::MatrixXd log_likelihood_matrix(const LikelihoodModel& model,
                                      const std::vector<int>& obs) {
    check_obs(model, obs);
    const long ntheta = model.num_hypotheses();
    Eigen::MatrixXd log_lik(model.n, ntheta);
    for (int i = 0; i < model.n; ++i)
        log_lik.row(i) =
            model.tables[i].col(obs[i]).array().log().transpose();
    return log_lik;
}

void belief_step_core(Eigen::MatrixXd& log_beliefs, const WeightMatrix& w,
                      const Eigen::MatrixXd& log_lik,
                      const Eigen::VectorXd* log_weights) {
    if (log_beliefs.rows() != w.entries.rows())
        throw std::invalid_argument("belief_step: state/weights agent mismatch");
    if (log_lik.rows() != log_beliefs.rows() ||
        log_lik.cols() != log_beliefs.cols())
        throw std::invalid_argument("belief_step: likelihood shape mismatch");
    const Eigen::VectorXd log_w =
        zero_weights_if_null(log_weights, log_beliefs.cols());

    // Clamp so annihilated hypotheses stay finite; 0 * -inf would poison the
    // mixing product.
    log_beliefs = log_beliefs.cwiseMax(kLogZeroFloor);
    log_beliefs = (w.entries * log_beliefs + log_lik).eval();
    for (int i = 0; i < log_beliefs.rows(); ++i) {
        const double z =
            log_sum_exp(Eigen::VectorXd(log_beliefs.row(i).transpose() + log_w));
        if (!std::isfinite(z))
            throw degenerate_likelihood_error(
                "belief_step: agent " + std::to_string(i) +
                " cannot normalize (likelihood vanished everywhere)");
        log_beliefs.row(i).array() -= z;
    }
    log_beliefs = log_beliefs.cwiseMax(kLogZeroFloor);
}

BeliefState belief_step(const BeliefState& state, const WeightMatrix& w,
                        const LikelihoodModel& model,
                        const std::vector<int>& obs,
                        const Eigen::VectorXd* log_weights) {
    if (state.num_hypotheses() != model.num_hypotheses())
        throw std::invalid_argument("belief_step: state/model hypothesis mismatch");
    BeliefState next = state;
    next.log_beliefs = state.log_beliefs;
    belief_step_core(next.log_beliefs, w, log_likelihood_matrix(model, obs),
                     log_weights);
    next.step_index = state.step_index + 1;
    return next;
}

Eigen::VectorXd belief_from_history(const BeliefState& initial,
                                    const WeightMatrix& w,
                                    const LikelihoodModel& model,
                                    const Eigen::MatrixXi& history, long k,
                                    int agent,
                                    const Eigen::VectorXd* log_weights) {
    const long ntheta = model.num_hypotheses();
    if (agent < 0 || agent >= model.n)
        throw std::invalid_argument("belief_from_history: bad agent index");
    if (k < 0 || history.rows() < k)
        throw std::invalid_argument("belief_from_history: history shorter than k");
    if (history.cols() != model.n)
        throw std::invalid_argument("belief_from_history: history agent count mismatch");
    const Eigen::VectorXd log_w = zero_weights_if_null(log_weights, ntheta);

    const std::vector<Eigen::MatrixXd> powers =
        matrix_powers(w.entries, static_cast<int>(k));

    // Initial-belief term: sum_j [A^k]_ij log mu_0^j.
    Eigen::VectorXd acc =
        (powers[k].row(agent) * initial.log_beliefs.cwiseMax(kLogZeroFloor))
            .transpose();

    // Observation terms: sum_t sum_j [A^{k-t}]_ij log l^j(s_t^j | .).
    for (long t = 1; t <= k; ++t) {
        std::vector<int> obs(model.n);
        for (int j = 0; j < model.n; ++j) obs[j] = history(t - 1, j);
        const Eigen::MatrixXd log_lik = log_likelihood_matrix(model, obs);
        acc += (powers[k - t].row(agent) * log_lik).transpose();
    }

    const double z = log_sum_exp(Eigen::VectorXd(acc + log_w));
    if (!std::isfinite(z))
        throw degenerate_likelihood_error(
            "belief_from_history: cannot normalize");
    acc.array() -= z;
    return acc.cwiseMax(kLogZeroFloor);
}

Eigen::VectorXd mirror_descent_minimizer(
    const BeliefState& state, const WeightMatrix& w,
    const LikelihoodModel& model, const std::vector<int>& obs, int agent,
    const MirrorDescentOptions& options) {
    if (agent < 0 || agent >= model.n)
        throw std::invalid_argument("mirror_descent: bad agent index");
    check_obs(model, obs);
    const long ntheta = model.num_hypotheses();

    // Unnormalized target: log t = sum_j a_ij log mu_j + log l^i(s | .).
    Eigen::VectorXd log_target =
        (w.entries.row(agent) * state.log_beliefs.cwiseMax(kLogZeroFloor))
            .transpose();
    log_target += model.tables[agent].col(obs[agent]).array().log().matrix();
    if (log_sum_exp(log_target) == kNegInf)
        throw degenerate_likelihood_error("mirror_descent: target vanishes everywhere");

    // G(pi) = sum_theta pi (log pi - log t); entries with pi == 0 contribute 0.
    const auto objective = [&](const Eigen::VectorXd& log_pi) {
        double acc = 0.0;
        for (long th = 0; th < ntheta; ++th) {
            if (log_pi[th] <= kLogZeroFloor) continue;
            acc += std::exp(log_pi[th]) * (log_pi[th] - log_target[th]);
        }
        return acc;
    };

    Eigen::VectorXd log_pi = Eigen::VectorXd::Constant(
        ntheta, -std::log(static_cast<double>(ntheta)));
    double prev = objective(log_pi);
    const double s = options.step_size;
    for (int it = 0; it < options.max_iterations; ++it) {
        Eigen::VectorXd stepped = (1.0 - s) * log_pi + s * log_target;
        stepped = stepped.cwiseMax(kLogZeroFloor);
        stepped.array() -= log_sum_exp(stepped);
        log_pi = stepped.cwiseMax(kLogZeroFloor);
        const double cur = objective(log_pi);
        if (prev - cur < options.objective_tol) return log_pi.array().exp();
        prev = cur;
    }
    throw oracle_failure("mirror_descent: objective still falling after " +
                         std::to_string(options.max_iterations) + " iterations");
}

double belief_mass(const BeliefState& state, int agent,
                   const std::vector<long>& subset,
                   const Eigen::VectorXd* log_weights) {
    if (agent < 0 || agent >= state.n())
        throw std::invalid_argument("belief_mass: bad agent index");
    const Eigen::VectorXd log_w =
        zero_weights_if_null(log_weights, state.num_hypotheses());
    Eigen::VectorXd terms(subset.size());
    for (size_t m = 0; m < subset.size(); ++m) {
        const long th = subset[m];
        if (th < 0 || th >= state.num_hypotheses())
            throw std::invalid_argument("belief_mass: hypothesis index out of range");
        terms[m] = state.log_beliefs(agent, th) + log_w[th];
    }
    const double v = std::exp(log_sum_exp(terms));
    return v > 1.0 ? 1.0 : v;
}

double consensus_gap(const BeliefState& state,
                     const Eigen::VectorXd* log_weights) {
    const Eigen::VectorXd log_w =
        zero_weights_if_null(log_weights, state.num_hypotheses());
    const Eigen::ArrayXd w = log_w.array().exp();
    double gap = 0.0;
    for (int i = 0; i < state.n(); ++i) {
        const Eigen::ArrayXd pi = state.log_beliefs.row(i).array().exp();
        for (int j = i + 1; j < state.n(); ++j) {
            const Eigen::ArrayXd pj = state.log_beliefs.row(j).array().exp();
            gap = std::max(gap, 0.5 * (w * (pi - pj).abs()).sum());
        }
    }
    return gap;
}

double normalization_drift(const BeliefState& state,
                           const Eigen::VectorXd* log_weights) {
    const Eigen::VectorXd log_w =
        zero_weights_if_null(log_weights, state.num_hypotheses());
    double drift = 0.0;
    for (int i = 0; i < state.n(); ++i)
        drift = std::max(
            drift, std::abs(log_sum_exp(Eigen::VectorXd(
                       state.log_beliefs.row(i).transpose() + log_w))));
    return drift;
}

}  // namespace belieflab
