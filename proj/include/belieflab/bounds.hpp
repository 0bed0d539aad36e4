#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "belieflab/beliefs.hpp"
#include "belieflab/covering.hpp"
#include "belieflab/model.hpp"
#include "belieflab/network.hpp"

namespace belieflab {

// Inputs shared by the transient-time calculators.
struct ConcentrationParams {
    double rho = 0.1;     // tolerated probability of the tail event
    double sigma = 0.1;   // tolerated belief mass outside the ball
    double r = 0.0;       // target ball radius
    double alpha = 0.0;   // likelihood floor of the model
    double epsilon = 0.0; // smallest prior mass at theta_star
    double lambda = 0.0;  // spectral surrogate of the weight matrix
    int n = 0;            // number of agents
    double R = 0.0;       // inner Hellinger radius (grid family only)
    int d = 0;            // grid dimension (grid family only)
};

void validate_params(const ConcentrationParams& params, bool grid_family);

// Prefactor of the union tail bound, exp(1 / (8 log^2(1/alpha))).
double tail_prefactor(double alpha);

// log gain an agent can accumulate over the network average:
//   8 log(1/alpha) log(n) / (1 - lambda).
double log_disagreement_gain(double alpha, int n, double lambda);
double disagreement_gain(double alpha, int n, double lambda);  // may overflow to inf

// Same gain divided by the worst prior mass at theta_star (log scale):
//   log_disagreement_gain - log(epsilon).
double log_prior_gain(double alpha, int n, double lambda, double epsilon);
double prior_gain(double alpha, int n, double lambda, double epsilon);

// Smallest k in [1, k_max] satisfying a monotone predicate, found by doubling
// then bisection.
std::optional<long> smallest_k(const std::function<bool(long)>& pred,
                               long k_max);

struct BandSummary {
    double lower_radius = 0.0;
    double upper_radius = 0.0;
    long count = 0;
    bool overflow = false;
    double delta = 0.0;                  // grid family
    long net_size = 0;                   // grid family
    double log_tail_term_at_horizon = 0; // N1 contribution at k = horizon
    std::optional<long> required_k;      // per-band N2 requirement
};

struct BoundReport {
    std::string family;                // "countable" | "grid"
    double log_tail_prefactor = 0.0;   // log of tail_prefactor
    double log_gain = 0.0;             // log prior gain / disagreement gain
    std::optional<long> n1, n2, horizon;
    std::optional<long> n2_bandwise;   // countable family side-check
    std::string n2_source;
    double n1_residual_log = 0.0;      // tail LHS at k_max when n1 missing
    double n2_residual_log = 0.0;
    long k_max = 0;
    double r = 0.0, R = 0.0;
    int d = 0;
    long truncation_level = 0;
    std::vector<BandSummary> bands;
    std::vector<std::string> notes;
};

// Transient time for finite / truncated countable hypothesis sets.  n1 is the
// smallest k with
//   C2 sum_l N_l exp(-k r_l^2) <= rho
// (overflow counted at the last radius); n2 the smallest k with
//   C3 exp(-(k/2) rate(theta)) <= sigma prod_i mu_0^i(theta)^(1/n)
// for every theta outside the innermost ball, checked exactly per hypothesis
// with a band-wise sufficient variant reported alongside.  horizon is the
// larger of the two; a missing value means k_max was not enough and the
// residuals record the gap.  `log_prior_mass` is n x |Theta| (null = uniform).
BoundReport countable_transient(const ConcentrationParams& params,
                                const Covering& cov,
                                const LikelihoodModel& model,
                                const Eigen::MatrixXd* log_prior_mass = nullptr,
                                long k_max = 1000000);

// Transient time over a grid via a Hellinger covering.  n1 is the smallest k
// with
//   sum_l exp(log_gain - k (r_{l+1} - delta_l - R) - d log delta_l) <= rho,
// n2 the smallest k with
//   sum_l exp(d log(r_l / R) - 2 k (r_{l+1} - delta_l - R)) <= sigma.
// Demands r_{l+1} - delta_l - R > 0 for every band and reports which band
// breaks it otherwise.
BoundReport grid_transient(const ConcentrationParams& params,
                           const Covering& cov, long k_max = 1000000);

// Running average log-likelihood ratio against the truth,
//   sum_{t=1..k} (1/n) sum_i log( l^i(s_t^i | theta) / l^i(s_t^i | theta*) ).
// Its expectation under the truth is -k * kl_rate(model, theta).
double cumulative_log_ratio(const LikelihoodModel& model, long theta,
                            const Eigen::MatrixXi& history, long k);

struct McCheck {
    double frequency = 0.0;
    double bound = 0.0;
    double se = 0.0;       // binomial standard error of the frequency
    long hits = 0;
    long trials = 0;
    bool vacuous = false;  // bound >= 1, nothing to assert
    bool pass = false;
};

struct TailMcReport {
    McCheck check;
    double log_bound = 0.0;
    long k = 0;
};

// Monte Carlo estimate of the tail event
//   exists theta outside the ball with
//   cumulative_log_ratio(theta, k) >= -(k/2) kl_rate(theta),
// compared against the covering tail bound at the same k.
TailMcReport tail_bound_mc(const LikelihoodModel& model, const Covering& cov,
                           long k, long trials, std::uint64_t seed,
                           int parallelism = 0);

// Log marginal data density of a hypothesis subset:
//   log integral_B prod_t prod_j l^j(s_t^j | theta) d mu_0(theta).
double log_evidence(const LikelihoodModel& model, const std::vector<long>& set,
                    const Eigen::MatrixXi& history, long k,
                    const Eigen::VectorXd& log_prior_mass);

// Agent-weighted counterpart, normalized by the prior mass of the set:
//   log (1/mu_0(B)) integral_B prod_t prod_j l^j(s_t^j|theta)^{[A^{k-t}]_ij} d mu_0.
double log_agent_evidence(const LikelihoodModel& model, const WeightMatrix& w,
                          const std::vector<long>& set,
                          const Eigen::MatrixXi& history, long k, int agent,
                          const Eigen::VectorXd& log_prior_mass);

// Checks log_agent_evidence <= log_gain + (1/n) log_evidence for every agent
// on a concrete draw.
struct EvidenceGainReport {
    bool pass = false;
    double log_gain = 0.0;
    double min_slack = 0.0;
    std::vector<double> slack;  // per agent
};

EvidenceGainReport evidence_gain_check(const LikelihoodModel& model,
                                       const WeightMatrix& w,
                                       const std::vector<long>& set,
                                       const Eigen::MatrixXi& history, long k,
                                       const Eigen::VectorXd& log_prior_mass);

enum class HistorySampler { TruthProxy, BallMixture };

struct CellCheck {
    int band = 0;   // 1-based covering level
    int cell = 0;   // net position within the band
    int agent = 0;
    McCheck check;
};

struct CellRatioMcReport {
    std::vector<CellCheck> cells;
    bool pass = false;
    long k = 0;
    std::string sampler_note;
};

// Monte Carlo frequency, per covering cell and agent, of the evidence-ratio
// event
//   log g_F^i - log g_{B_R}^i >= -2k (r_{l+1} - delta_l - R),
// compared against C2 exp(-k (r_{l+1} - delta_l - R) + d log delta_l).
// Assertions apply only where the bound is below 1 and k >= 1; at k = 0 the
// event is deterministic and only determinism is checked.
CellRatioMcReport evidence_ratio_mc(const LikelihoodModel& model,
                                    const WeightMatrix& w, const Covering& cov,
                                    double R, int d, long k, long trials,
                                    std::uint64_t seed,
                                    const Eigen::VectorXd& log_prior_mass,
                                    HistorySampler sampler = HistorySampler::TruthProxy,
                                    int parallelism = 0);

// Pathwise mass bound: every agent's belief mass in the ball must be at least
//   1 - exp(log_gain + log sum_{theta notin B} exp(cumulative_log_ratio)).
struct MassLowerBoundReport {
    bool pass = false;
    double min_margin = 0.0;
    double log_residual = 0.0;
    std::vector<double> lower;  // per-agent lower bound (identical entries)
};

MassLowerBoundReport mass_lower_bound_check(
    const BeliefState& state, const LikelihoodModel& model,
    const std::vector<long>& ball, const Eigen::MatrixXi& history, long k,
    double log_gain, const Eigen::VectorXd* log_weights = nullptr);

}  // namespace belieflab
