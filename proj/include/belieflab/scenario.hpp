#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "belieflab/beliefs.hpp"
#include "belieflab/model.hpp"
#include "belieflab/network.hpp"

namespace belieflab {

enum class BallKind { KlRate, Hellinger, Indices };

struct BallSpec {
    std::string name;
    BallKind kind = BallKind::KlRate;
    double radius = 0.0;
    std::vector<long> indices;
};

std::vector<long> resolve_ball(const LikelihoodModel& model,
                               const BallSpec& spec);

struct Scenario {
    Graph graph;
    WeightMatrix weights;
    LikelihoodModel model;
    HypothesisSpace space;
    Eigen::MatrixXd log_prior;  // n x |Theta|, normalized under the quadrature
    long horizon = 0;
    std::vector<BallSpec> balls;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

void validate_scenario(const Scenario& sc);

// Smallest prior mass any agent puts on the true hypothesis.
double prior_epsilon(const Scenario& sc);

struct Trace {
    long horizon = 0;
    std::vector<long> snapshot_steps;
    std::vector<Eigen::MatrixXd> snapshots;   // log beliefs
    Eigen::MatrixXi observations;             // horizon x n
    Eigen::VectorXd consensus_gaps;           // horizon + 1
    std::vector<std::vector<long>> ball_members;
    std::vector<Eigen::MatrixXd> ball_masses;  // per ball: (horizon + 1) x n
};

Trace run_scenario(const Scenario& sc, std::uint64_t seed, long trial = 0);

std::optional<long> concentration_time(const Trace& trace, int ball,
                                       double sigma);

struct RateSlopeReport {
    double slope = 0.0;
    Eigen::VectorXd per_agent;
    long used_k_min = 0;
    long used_k_max = 0;
    bool shrunk = false;
};

RateSlopeReport rate_slope(const Trace& trace, long theta, long k_min,
                           long k_max);

struct ConcentrationMcReport {
    long k = 0;
    double sigma = 0.0;
    long trials = 0;
    long failures = 0;
    double failure_frequency = 0.0;
    double se = 0.0;
};

ConcentrationMcReport concentration_mc(const Scenario& sc,
                                       const BallSpec& ball, double sigma,
                                       long horizon, long trials,
                                       std::uint64_t seed, int parallelism = 0);

struct LocalizationConfig {
    Eigen::MatrixXd positions;          // n x d
    Eigen::VectorXd grid_lo, grid_hi;   // box bounds
    std::vector<int> points_per_axis;
    Eigen::VectorXd theta_star;         // must coincide with a grid point
    Eigen::VectorXd noise_offsets;
    Eigen::VectorXd noise_probs;
    double bin_width = 0.0;
    double floor = 1e-4;
    long horizon = 0;
};

Scenario build_localization(const LocalizationConfig& cfg, const Graph& graph);

}  // namespace belieflab
