#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "belieflab/beliefs.hpp"
#include "belieflab/divergences.hpp"
#include "helpers.hpp"

namespace bl = belieflab;
using testutil::make_model;
using testutil::rows;

namespace {

Eigen::VectorXd beliefs_of(const bl::BeliefState& state, int agent) {
    return state.log_beliefs.row(agent).array().exp().transpose();
}

Eigen::MatrixXi random_history(std::mt19937_64& gen,
                               const bl::LikelihoodModel& model, long k) {
    Eigen::MatrixXi h(k, model.n);
    for (long t = 0; t < k; ++t)
        for (int i = 0; i < model.n; ++i)
            h(t, i) = static_cast<int>(gen() % model.alphabets[i]);
    return h;
}

}  // namespace

TEST_CASE("uniform_beliefs rows are normalized densities") {
    const bl::HypothesisSpace finite = bl::finite_space(4);
    const bl::BeliefState state = bl::uniform_beliefs(3, finite);
    CHECK(state.n() == 3);
    CHECK(state.num_hypotheses() == 4);
    CHECK(state.step_index == 0);
    CHECK(beliefs_of(state, 0).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(state.log_beliefs(1, 2) == doctest::Approx(-std::log(4.0)));

    // Grid: densities against quadrature weights integrate to one.
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.0;
    hi << 10.0;
    const bl::HypothesisSpace grid = bl::grid_space(lo, hi, {5});
    const bl::BeliefState gstate = bl::uniform_beliefs(2, grid);
    const Eigen::VectorXd log_w = grid.log_weights();
    CHECK(bl::normalization_drift(gstate, &log_w) <= 1e-12);
    CHECK(gstate.log_beliefs(0, 0) == doctest::Approx(-std::log(10.0)));

    CHECK_THROWS_AS(bl::uniform_beliefs(0, finite), std::invalid_argument);
}

TEST_CASE("log_likelihood_matrix picks observed columns") {
    const bl::LikelihoodModel m = testutil::two_agent_model();
    const Eigen::MatrixXd log_lik = bl::log_likelihood_matrix(m, {0, 1});
    CHECK(log_lik.rows() == 2);
    CHECK(log_lik.cols() == 2);
    CHECK(log_lik(0, 0) == doctest::Approx(std::log(0.9)));
    CHECK(log_lik(0, 1) == doctest::Approx(std::log(0.1)));
    CHECK(log_lik(1, 0) == doctest::Approx(std::log(0.5)));

    CHECK_THROWS_AS(bl::log_likelihood_matrix(m, {0}), std::invalid_argument);
    CHECK_THROWS_AS(bl::log_likelihood_matrix(m, {0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(bl::log_likelihood_matrix(m, {-1, 0}), std::invalid_argument);
}

TEST_CASE("belief_step single agent is Bayes' rule") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.8, 0.2}, {0.2, 0.8}})});
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::make_graph(1, {}));
    const bl::BeliefState prior = bl::uniform_beliefs(1, bl::finite_space(2));

    const bl::BeliefState post = bl::belief_step(prior, w, m, {0});
    CHECK(post.step_index == 1);
    CHECK(beliefs_of(post, 0)[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(beliefs_of(post, 0)[1] == doctest::Approx(0.2).epsilon(1e-12));

    // Second observation of the same symbol: posterior odds square.
    const bl::BeliefState post2 = bl::belief_step(post, w, m, {0});
    CHECK(beliefs_of(post2, 0)[0] ==
          doctest::Approx(0.64 / 0.68).epsilon(1e-12));
}

TEST_CASE("belief_step uninformative likelihood leaves equal priors fixed") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.6, 0.4}, {0.6, 0.4}}),
                       rows({{0.3, 0.7}, {0.3, 0.7}})});
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    const bl::BeliefState prior = bl::uniform_beliefs(2, bl::finite_space(2));
    const bl::BeliefState post = bl::belief_step(prior, w, m, {0, 1});
    CHECK(beliefs_of(post, 0)[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(beliefs_of(post, 1)[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("belief_step two-agent worked example") {
    const bl::LikelihoodModel m = testutil::two_agent_model();
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    REQUIRE(w.entries(0, 0) == doctest::Approx(0.75));
    const bl::BeliefState prior = bl::uniform_beliefs(2, bl::finite_space(2));

    // Agent 0 sees symbol 0 (likelihood column [0.9, 0.1]); agent 1's signal
    // is uninformative.  Equal priors make the mixing term constant, so agent
    // 0's posterior is [0.9, 0.1] and agent 1 stays at [0.5, 0.5].
    const bl::BeliefState post = bl::belief_step(prior, w, m, {0, 0});
    CHECK(beliefs_of(post, 0)[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(beliefs_of(post, 0)[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(beliefs_of(post, 1)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(beliefs_of(post, 1)[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("belief_step guards shapes and degenerate likelihoods") {
    const bl::LikelihoodModel m = testutil::two_agent_model();
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    const bl::BeliefState bad = bl::uniform_beliefs(3, bl::finite_space(2));
    CHECK_THROWS_AS(bl::belief_step(bad, w, m, {0, 0}), std::invalid_argument);

    // Both hypotheses assign zero to agent 0's symbol 0: nothing normalizes.
    const bl::LikelihoodModel degen =
        make_model(0, {rows({{0.0, 1.0}, {0.0, 1.0}}),
                       rows({{0.5, 0.5}, {0.5, 0.5}})});
    const bl::BeliefState prior = bl::uniform_beliefs(2, bl::finite_space(2));
    CHECK_THROWS_AS(bl::belief_step(prior, w, degen, {0, 0}),
                    bl::degenerate_likelihood_error);
}

TEST_CASE("belief_from_history at k = 0 returns the initial row") {
    const bl::LikelihoodModel m = testutil::two_agent_model();
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    bl::BeliefState init = bl::uniform_beliefs(2, bl::finite_space(2));
    init.log_beliefs(1, 0) = std::log(0.3);
    init.log_beliefs(1, 1) = std::log(0.7);

    const Eigen::MatrixXi empty(0, 2);
    const Eigen::VectorXd row = bl::belief_from_history(init, w, m, empty, 0, 1);
    CHECK(row[0] == doctest::Approx(std::log(0.3)).epsilon(1e-14));
    CHECK(row[1] == doctest::Approx(std::log(0.7)).epsilon(1e-14));
}

TEST_CASE("belief_from_history single agent equals the likelihood product") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.8, 0.2}, {0.3, 0.7}})});
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::make_graph(1, {}));
    const bl::BeliefState init = bl::uniform_beliefs(1, bl::finite_space(2));

    Eigen::MatrixXi history(3, 1);
    history << 0, 1, 0;
    const Eigen::VectorXd row = bl::belief_from_history(init, w, m, history, 3, 0);

    // Bayes: posterior proportional to l(0|.) l(1|.) l(0|.).
    const double p0 = 0.8 * 0.2 * 0.8, p1 = 0.3 * 0.7 * 0.3;
    CHECK(std::exp(row[0]) == doctest::Approx(p0 / (p0 + p1)).epsilon(1e-12));
    CHECK(std::exp(row[1]) == doctest::Approx(p1 / (p0 + p1)).epsilon(1e-12));
}

TEST_CASE("belief_from_history argument guards") {
    const bl::LikelihoodModel m = testutil::two_agent_model();
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    const bl::BeliefState init = bl::uniform_beliefs(2, bl::finite_space(2));
    Eigen::MatrixXi history = Eigen::MatrixXi::Zero(2, 2);
    CHECK_THROWS_AS(bl::belief_from_history(init, w, m, history, 3, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(bl::belief_from_history(init, w, m, history, 2, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        bl::belief_from_history(init, w, m, Eigen::MatrixXi::Zero(2, 3), 2, 0),
        std::invalid_argument);
}

TEST_CASE("closed form matches iterated steps on random scenarios") {
    std::mt19937_64 gen(51);
    for (int rep = 0; rep < 12; ++rep) {
        const int n = 2 + static_cast<int>(gen() % 5);           // <= 6 agents
        const long ntheta = 3 + static_cast<long>(gen() % 38);   // <= 40
        const long k = 1 + static_cast<long>(gen() % 50);
        std::vector<int> alphabets;
        for (int i = 0; i < n; ++i)
            alphabets.push_back(2 + static_cast<int>(gen() % 3));
        const bl::LikelihoodModel m =
            testutil::random_model(gen, n, ntheta, alphabets);
        const bl::Graph g = testutil::random_connected_graph(gen, n);
        const bl::WeightMatrix w = bl::lazy_metropolis(g);
        const Eigen::MatrixXi history = random_history(gen, m, k);

        bl::BeliefState state = bl::uniform_beliefs(n, bl::finite_space(ntheta));
        const bl::BeliefState init = state;
        for (long t = 0; t < k; ++t) {
            std::vector<int> obs(n);
            for (int i = 0; i < n; ++i) obs[i] = history(t, i);
            state = bl::belief_step(state, w, m, obs);
        }

        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd direct =
                bl::belief_from_history(init, w, m, history, k, i);
            const double diff =
                (direct - state.log_beliefs.row(i).transpose())
                    .cwiseAbs()
                    .maxCoeff();
            CHECK(diff <= 1e-9);
        }
    }
}

TEST_CASE("closed form respects quadrature weights") {
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.0;
    hi << 2.0;
    const bl::HypothesisSpace grid = bl::grid_space(lo, hi, {4});
    const Eigen::VectorXd log_w = grid.log_weights();

    std::mt19937_64 gen(52);
    const bl::LikelihoodModel m = testutil::random_model(gen, 2, 4, {2, 2});
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    const Eigen::MatrixXi history = random_history(gen, m, 5);

    bl::BeliefState state = bl::uniform_beliefs(2, grid);
    const bl::BeliefState init = state;
    for (long t = 0; t < 5; ++t) {
        std::vector<int> obs{history(t, 0), history(t, 1)};
        state = bl::belief_step(state, w, m, obs, &log_w);
    }
    CHECK(bl::normalization_drift(state, &log_w) <= 1e-12);
    for (int i = 0; i < 2; ++i) {
        const Eigen::VectorXd direct =
            bl::belief_from_history(init, w, m, history, 5, i, &log_w);
        CHECK((direct - state.log_beliefs.row(i).transpose())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-9);
    }
}

TEST_CASE("mirror descent equals Bayes for a single agent") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.8, 0.2}, {0.2, 0.8}})});
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::make_graph(1, {}));
    const bl::BeliefState prior = bl::uniform_beliefs(1, bl::finite_space(2));
    const Eigen::VectorXd pi = bl::mirror_descent_minimizer(prior, w, m, {0}, 0);
    CHECK(pi[0] == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(pi[1] == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("mirror descent fixes the shared prior under uninformative signals") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.6, 0.4}, {0.6, 0.4}}),
                       rows({{0.3, 0.7}, {0.3, 0.7}})});
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    const bl::BeliefState prior = bl::uniform_beliefs(2, bl::finite_space(2));
    const Eigen::VectorXd pi = bl::mirror_descent_minimizer(prior, w, m, {0, 0}, 0);
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("mirror descent reproduces the two-agent worked example") {
    const bl::LikelihoodModel m = testutil::two_agent_model();
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    const bl::BeliefState prior = bl::uniform_beliefs(2, bl::finite_space(2));
    const Eigen::VectorXd pi = bl::mirror_descent_minimizer(prior, w, m, {0, 0}, 0);
    CHECK(pi[0] == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(pi[1] == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("mirror descent agrees with the update on random instances") {
    std::mt19937_64 gen(53);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(gen() % 3);
        const long ntheta = 2 + static_cast<long>(gen() % 6);
        std::vector<int> alphabets(n, 2);
        const bl::LikelihoodModel m =
            testutil::random_model(gen, n, ntheta, alphabets);
        const bl::WeightMatrix w =
            bl::lazy_metropolis(testutil::random_connected_graph(gen, n));

        // Random normalized prior state.
        bl::BeliefState state = bl::uniform_beliefs(n, bl::finite_space(ntheta));
        std::uniform_real_distribution<double> u(0.1, 1.0);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd p(ntheta);
            for (long th = 0; th < ntheta; ++th) p[th] = u(gen);
            p /= p.sum();
            state.log_beliefs.row(i) = p.array().log().transpose();
        }

        std::vector<int> obs(n);
        for (int i = 0; i < n; ++i) obs[i] = static_cast<int>(gen() % 2);
        const bl::BeliefState next = bl::belief_step(state, w, m, obs);

        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd pi =
                bl::mirror_descent_minimizer(state, w, m, obs, i);
            const Eigen::VectorXd direct = beliefs_of(next, i);
            CHECK(bl::tv_distance(pi, direct) <= 1e-6);
        }
    }
}

TEST_CASE("belief_mass sums subsets and respects weights") {
    const bl::BeliefState state = bl::uniform_beliefs(1, bl::finite_space(10));
    CHECK(bl::belief_mass(state, 0, {0, 1, 2}) ==
          doctest::Approx(0.3).epsilon(1e-12));
    CHECK(bl::belief_mass(state, 0, {}) == 0.0);
    std::vector<long> all;
    for (long th = 0; th < 10; ++th) all.push_back(th);
    CHECK(bl::belief_mass(state, 0, all) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(bl::belief_mass(state, 2, {0}), std::invalid_argument);
    CHECK_THROWS_AS(bl::belief_mass(state, 0, {11}), std::invalid_argument);

    // Grid masses integrate density * cell volume.
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.0;
    hi << 2.0;
    const bl::HypothesisSpace grid = bl::grid_space(lo, hi, {4});
    const Eigen::VectorXd log_w = grid.log_weights();
    const bl::BeliefState gstate = bl::uniform_beliefs(1, grid);
    CHECK(bl::belief_mass(gstate, 0, {0, 1}, &log_w) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("consensus_gap measures the largest pairwise TV") {
    bl::BeliefState state = bl::uniform_beliefs(1, bl::finite_space(3));
    CHECK(bl::consensus_gap(state) == 0.0);

    state = bl::uniform_beliefs(3, bl::finite_space(2));
    CHECK(bl::consensus_gap(state) == 0.0);

    state.log_beliefs.row(0) << 0.0, bl::kLogZeroFloor;
    state.log_beliefs.row(1) << bl::kLogZeroFloor, 0.0;
    CHECK(bl::consensus_gap(state) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalization drift stays tiny over ten thousand steps") {
    const bl::LikelihoodModel m = testutil::two_agent_model();
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    bl::BeliefState state = bl::uniform_beliefs(2, bl::finite_space(2));

    std::mt19937_64 gen(54);
    for (int t = 0; t < 10000; ++t) {
        std::vector<int> obs{static_cast<int>(gen() % 2),
                             static_cast<int>(gen() % 2)};
        state = bl::belief_step(state, w, m, obs);
    }
    CHECK(state.step_index == 10000);
    CHECK(bl::normalization_drift(state) <= 1e-9);
}

TEST_CASE("monotone likelihood dominance is preserved") {
    // Hypothesis 0 dominates hypothesis 1 at symbol 0 for every agent; a
    // history of all-zero symbols can never favor hypothesis 1.
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.7, 0.3}, {0.4, 0.6}, {0.55, 0.45}}),
                       rows({{0.8, 0.2}, {0.5, 0.5}, {0.65, 0.35}})});
    const bl::WeightMatrix w = bl::lazy_metropolis(bl::path_graph(2));
    bl::BeliefState state = bl::uniform_beliefs(2, bl::finite_space(3));
    for (int t = 0; t < 25; ++t) {
        state = bl::belief_step(state, w, m, {0, 0});
        for (int i = 0; i < 2; ++i) {
            CHECK(state.log_beliefs(i, 0) >= state.log_beliefs(i, 1) - 1e-12);
            CHECK(state.log_beliefs(i, 2) >= state.log_beliefs(i, 1) - 1e-12);
        }
    }
}
