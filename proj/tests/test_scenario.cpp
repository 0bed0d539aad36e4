#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "belieflab/scenario.hpp"
#include "helpers.hpp"

namespace bl = belieflab;
using testutil::make_model;
using testutil::rows;

namespace {

bl::Scenario make_scenario(const bl::Graph& g, const bl::LikelihoodModel& m,
                           long horizon) {
    bl::Scenario sc;
    sc.graph = g;
    sc.weights = bl::lazy_metropolis(g);
    sc.model = m;
    sc.space = bl::finite_space(m.num_hypotheses());
    sc.log_prior = bl::uniform_beliefs(m.n, sc.space).log_beliefs;
    sc.horizon = horizon;
    return sc;
}

// Deterministic observations: the truth emits symbol 0 surely, the wrong
// hypothesis halves its posterior every step, so the ball mass at theta_star
// is exactly 1 / (1 + 2^-k).
bl::Scenario bernoulli_scenario(long horizon) {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{1.0, 0.0}, {0.5, 0.5}})});
    bl::Scenario sc = make_scenario(bl::make_graph(1, {}), m, horizon);
    bl::BallSpec ball;
    ball.name = "truth";
    ball.kind = bl::BallKind::KlRate;
    ball.radius = 1e-12;
    sc.balls.push_back(ball);
    return sc;
}

bl::BallSpec kl_ball_spec(double radius) {
    bl::BallSpec b;
    b.kind = bl::BallKind::KlRate;
    b.radius = radius;
    return b;
}

}  // namespace

TEST_CASE("resolve_ball covers all three kinds") {
    const bl::LikelihoodModel m = make_model(0, {rows({{0.5, 0.5},
                                                       {0.2, 0.8},
                                                       {0.1, 0.9},
                                                       {0.01, 0.99}})});
    // rates ~ {0, 0.223, 0.511, 1.614}
    bl::BallSpec spec = kl_ball_spec(0.3);
    CHECK(bl::resolve_ball(m, spec) == std::vector<long>{0, 1});
    spec.radius = 0.0;
    CHECK(bl::resolve_ball(m, spec) == std::vector<long>{0});
    spec.radius = 2.0;
    CHECK(bl::resolve_ball(m, spec).size() == 4);

    // distances ~ {0, 0.054, 0.255, 0.465, 0.632}
    const bl::LikelihoodModel h = make_model(0, {rows({{0.9, 0.1},
                                                       {0.85, 0.15},
                                                       {0.6, 0.4},
                                                       {0.3, 0.7},
                                                       {0.1, 0.9}})});
    bl::BallSpec hb;
    hb.kind = bl::BallKind::Hellinger;
    hb.radius = 0.3;
    CHECK(bl::resolve_ball(h, hb) == std::vector<long>{0, 1, 2});

    bl::BallSpec ib;
    ib.kind = bl::BallKind::Indices;
    ib.indices = {3, 1, 1, 3};
    CHECK(bl::resolve_ball(m, ib) == std::vector<long>{1, 3});

    spec.radius = -0.5;
    CHECK_THROWS_AS(bl::resolve_ball(m, spec), std::invalid_argument);
    hb.radius = -0.1;
    CHECK_THROWS_AS(bl::resolve_ball(h, hb), std::invalid_argument);
    ib.indices = {9};
    CHECK_THROWS_WITH_AS(bl::resolve_ball(m, ib),
                         doctest::Contains("out of range"),
                         std::invalid_argument);
}

TEST_CASE("validate_scenario pinpoints the broken field") {
    const auto good = [&] {
        return make_scenario(bl::path_graph(2), testutil::two_agent_model(), 5);
    };
    CHECK_NOTHROW(bl::validate_scenario(good()));

    {
        bl::Scenario sc = good();
        sc.graph = bl::path_graph(3);
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("graph/model"),
                             std::invalid_argument);
    }
    {
        bl::Scenario sc = good();
        sc.weights = bl::lazy_metropolis(bl::path_graph(3));
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("weight matrix size"),
                             std::invalid_argument);
    }
    {
        bl::Scenario sc = good();
        sc.space = bl::finite_space(5);
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("space/model"),
                             std::invalid_argument);
    }
    {
        bl::Scenario sc = good();
        sc.horizon = -1;
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("negative horizon"),
                             std::invalid_argument);
    }
    {
        bl::Scenario sc = good();
        sc.log_prior = Eigen::MatrixXd::Zero(1, 2);
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("prior shape"),
                             std::invalid_argument);
    }
    {
        bl::Scenario sc = good();
        sc.log_prior(0, 0) = bl::kNegInf;
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("strictly positive"),
                             std::invalid_argument);
    }
    {
        bl::Scenario sc = good();
        sc.log_prior(0, 0) += 0.1;
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("row 0"),
                             std::invalid_argument);
    }
    {
        bl::Scenario sc = good();
        sc.weights.entries(0, 0) += 0.1;
        CHECK_THROWS_WITH_AS(bl::validate_scenario(sc),
                             doctest::Contains("weight matrix invalid"),
                             bl::assumption_error);
    }
    {
        bl::Scenario sc = good();
        bl::BallSpec b;
        b.kind = bl::BallKind::Indices;
        b.indices = {7};
        sc.balls.push_back(b);
        CHECK_THROWS_AS(bl::validate_scenario(sc), std::invalid_argument);
    }
}

TEST_CASE("prior_epsilon is the worst prior mass at the truth") {
    bl::Scenario sc =
        make_scenario(bl::path_graph(2), testutil::two_agent_model(), 1);
    CHECK(bl::prior_epsilon(sc) == doctest::Approx(0.5).epsilon(1e-12));

    sc.log_prior(0, 0) = std::log(0.3);
    sc.log_prior(0, 1) = std::log(0.7);
    sc.log_prior(1, 0) = std::log(0.6);
    sc.log_prior(1, 1) = std::log(0.4);
    CHECK(bl::prior_epsilon(sc) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("run_scenario at horizon zero records only the prior") {
    bl::Scenario sc = bernoulli_scenario(0);
    const bl::Trace trace = bl::run_scenario(sc, 3);

    CHECK(trace.horizon == 0);
    CHECK(trace.observations.rows() == 0);
    CHECK(trace.consensus_gaps.size() == 1);
    CHECK(trace.consensus_gaps[0] == 0.0);
    CHECK(trace.snapshot_steps == std::vector<long>{0});
    REQUIRE(trace.snapshots.size() == 1);
    CHECK(trace.snapshots[0](0, 0) == doctest::Approx(-std::log(2.0)));
    REQUIRE(trace.ball_members.size() == 1);
    CHECK(trace.ball_members[0] == std::vector<long>{0});
    CHECK(trace.ball_masses[0](0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("run_scenario is reproducible and trial-indexed") {
    bl::Scenario sc =
        make_scenario(bl::path_graph(2), testutil::two_agent_model(), 60);

    const bl::Trace a = bl::run_scenario(sc, 42);
    const bl::Trace b = bl::run_scenario(sc, 42);
    CHECK((a.observations - b.observations).cwiseAbs().maxCoeff() == 0);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    CHECK((a.snapshots.back() - b.snapshots.back()).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((a.consensus_gaps - b.consensus_gaps).cwiseAbs().maxCoeff() == 0.0);

    const bl::Trace other_trial = bl::run_scenario(sc, 42, 1);
    CHECK((a.observations - other_trial.observations).cwiseAbs().maxCoeff() >
          0);
    const bl::Trace other_seed = bl::run_scenario(sc, 43);
    CHECK((a.observations - other_seed.observations).cwiseAbs().maxCoeff() > 0);
}

TEST_CASE("deterministic Bernoulli run concentrates like 1/(1+2^-k)") {
    bl::Scenario sc = bernoulli_scenario(10);
    const bl::Trace trace = bl::run_scenario(sc, 1);

    const auto mass_at = [&](long k) { return trace.ball_masses[0](k, 0); };
    CHECK(mass_at(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mass_at(4) == doctest::Approx(16.0 / 17.0).epsilon(1e-12));
    CHECK(mass_at(10) == doctest::Approx(1024.0 / 1025.0).epsilon(1e-12));
    for (long k = 0; k <= 10; ++k)
        CHECK(trace.consensus_gaps[k] == 0.0);  // single agent

    CHECK(*bl::concentration_time(trace, 0, 0.51) == 0);
    CHECK(*bl::concentration_time(trace, 0, 0.3) == 2);
    CHECK(*bl::concentration_time(trace, 0, 0.1) == 4);
    CHECK(*bl::concentration_time(trace, 0, 0.05) == 5);
    CHECK(*bl::concentration_time(trace, 0, 0.01) == 7);
    CHECK(*bl::concentration_time(trace, 0, 1.0) == 0);
    CHECK(!bl::concentration_time(trace, 0, 1e-9).has_value());

    long prev = 0;
    for (double sigma : {0.5, 0.3, 0.1, 0.05, 0.01}) {
        const auto t = bl::concentration_time(trace, 0, sigma);
        REQUIRE(t.has_value());
        CHECK(*t >= prev);
        prev = *t;
    }

    CHECK_THROWS_WITH_AS(bl::concentration_time(trace, 1, 0.1),
                         doctest::Contains("not tracked"),
                         std::invalid_argument);
}

TEST_CASE("rate_slope recovers the exact decay of a deterministic run") {
    bl::Scenario sc = bernoulli_scenario(100);
    const bl::Trace trace = bl::run_scenario(sc, 5);

    const bl::RateSlopeReport rep = bl::rate_slope(trace, 1, 40, 90);
    CHECK(rep.slope == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
    REQUIRE(rep.per_agent.size() == 1);
    CHECK(rep.per_agent[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
    CHECK(rep.used_k_min == 40);
    CHECK(rep.used_k_max == 90);
    CHECK(!rep.shrunk);
}

TEST_CASE("rate_slope is flat for an indistinguishable hypothesis") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.6, 0.4}, {0.6, 0.4}})});
    bl::Scenario sc = make_scenario(bl::make_graph(1, {}), m, 60);
    const bl::Trace trace = bl::run_scenario(sc, 9);
    const bl::RateSlopeReport rep = bl::rate_slope(trace, 1, 0, 60);
    CHECK(std::abs(rep.slope) <= 1e-12);
}

TEST_CASE("rate_slope matches the network-averaged rate after mixing") {
    // Both agents observe symbol 0 surely; the wrong hypothesis decays at the
    // average of log 2 and log 4 once the lazy-Metropolis transient dies out.
    const bl::LikelihoodModel m = make_model(
        0, {rows({{1.0, 0.0}, {0.5, 0.5}}), rows({{1.0, 0.0}, {0.25, 0.75}})});
    bl::Scenario sc = make_scenario(bl::path_graph(2), m, 100);
    const bl::Trace trace = bl::run_scenario(sc, 2);

    const double gamma = bl::kl_rate(m, 1);
    REQUIRE(gamma == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-12));
    const bl::RateSlopeReport rep = bl::rate_slope(trace, 1, 30, 90);
    CHECK(rep.slope == doctest::Approx(-gamma).epsilon(1e-7));
    CHECK(rep.per_agent[0] == doctest::Approx(-gamma).epsilon(1e-7));
    CHECK(rep.per_agent[1] == doctest::Approx(-gamma).epsilon(1e-7));
    CHECK(!rep.shrunk);
}

TEST_CASE("rate_slope flags a window wider than the trace") {
    bl::Scenario sc = bernoulli_scenario(50);
    const bl::Trace trace = bl::run_scenario(sc, 5);
    const bl::RateSlopeReport rep = bl::rate_slope(trace, 1, 0, 120);
    CHECK(rep.shrunk);
    CHECK(rep.used_k_max == 50);
}

TEST_CASE("rate_slope argument and data guards") {
    bl::Scenario sc = bernoulli_scenario(4);
    const bl::Trace trace = bl::run_scenario(sc, 5);

    CHECK_THROWS_WITH_AS(bl::rate_slope(trace, 5, 0, 4),
                         doctest::Contains("theta"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(bl::rate_slope(trace, 1, 3, 3),
                         doctest::Contains("window"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(bl::rate_slope(trace, 1, 5, 9),
                         doctest::Contains("fewer than two"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(bl::rate_slope(bl::Trace{}, 0, 0, 1),
                         doctest::Contains("empty trace"),
                         std::invalid_argument);

    // A hypothesis with zero likelihood at the observed symbol pins its log
    // belief to the floor; no usable points remain.
    const bl::LikelihoodModel dead =
        make_model(0, {rows({{1.0, 0.0}, {0.0, 1.0}})});
    bl::Scenario dsc = make_scenario(bl::make_graph(1, {}), dead, 20);
    const bl::Trace dtrace = bl::run_scenario(dsc, 5);
    CHECK_THROWS_WITH_AS(bl::rate_slope(dtrace, 1, 0, 20),
                         doctest::Contains("fewer than two"),
                         std::invalid_argument);
}

TEST_CASE("concentration_mc counts failures exactly on a deterministic run") {
    bl::Scenario sc = bernoulli_scenario(0);
    const bl::BallSpec ball = sc.balls[0];

    // mass(7) = 128/129 > 0.99, mass(5) = 32/33 < 0.99.
    const bl::ConcentrationMcReport ok =
        bl::concentration_mc(sc, ball, 0.01, 7, 25, 3);
    CHECK(ok.k == 7);
    CHECK(ok.trials == 25);
    CHECK(ok.failures == 0);
    CHECK(ok.failure_frequency == 0.0);
    CHECK(ok.se == 0.0);

    const bl::ConcentrationMcReport bad =
        bl::concentration_mc(sc, ball, 0.01, 5, 25, 3);
    CHECK(bad.failures == 25);
    CHECK(bad.failure_frequency == 1.0);

    CHECK_THROWS_AS(bl::concentration_mc(sc, ball, 0.01, -1, 10, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(bl::concentration_mc(sc, ball, 0.01, 5, 0, 3),
                    std::invalid_argument);
}

TEST_CASE("concentration_mc is deterministic across parallelism") {
    bl::Scenario sc =
        make_scenario(bl::path_graph(2), testutil::two_agent_model(), 6);
    const bl::BallSpec ball = kl_ball_spec(0.1);

    const bl::ConcentrationMcReport seq =
        bl::concentration_mc(sc, ball, 0.2, 6, 60, 17, 1);
    const bl::ConcentrationMcReport par =
        bl::concentration_mc(sc, ball, 0.2, 6, 60, 17, 4);
    CHECK(seq.failures == par.failures);
    CHECK(seq.failure_frequency == par.failure_frequency);
    CHECK(seq.se == doctest::Approx(std::sqrt(seq.failure_frequency *
                                              (1.0 - seq.failure_frequency) /
                                              60.0)));
}

TEST_CASE("sampled observations follow the truth marginals") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.7, 0.3}, {0.5, 0.5}})});
    bl::Scenario sc = make_scenario(bl::make_graph(1, {}), m, 2000);
    const bl::Trace trace = bl::run_scenario(sc, 8);

    long zeros = 0;
    for (long k = 0; k < 2000; ++k) zeros += trace.observations(k, 0) == 0;
    const double freq = static_cast<double>(zeros) / 2000.0;
    const double se = std::sqrt(0.7 * 0.3 / 2000.0);
    CHECK(std::abs(freq - 0.7) <= 4.0 * se);
}

TEST_CASE("long traces thin their snapshots past one thousand steps") {
    const bl::LikelihoodModel m =
        make_model(0, {rows({{0.7, 0.3}, {0.5, 0.5}})});
    bl::Scenario sc = make_scenario(bl::make_graph(1, {}), m, 1013);
    const bl::Trace trace = bl::run_scenario(sc, 4);

    CHECK(trace.observations.rows() == 1013);
    CHECK(trace.consensus_gaps.size() == 1014);
    REQUIRE(trace.snapshots.size() == trace.snapshot_steps.size());
    CHECK(trace.snapshot_steps.size() == 1003);  // 0..1000, 1010, final
    CHECK(trace.snapshot_steps.front() == 0);
    CHECK(trace.snapshot_steps.back() == 1013);

    const auto has = [&](long k) {
        return std::find(trace.snapshot_steps.begin(),
                         trace.snapshot_steps.end(),
                         k) != trace.snapshot_steps.end();
    };
    CHECK(has(1000));
    CHECK(has(1010));
    CHECK(!has(1001));
    CHECK(!has(1009));
}

TEST_CASE("build_localization quantizes ranges onto a binned alphabet") {
    bl::LocalizationConfig cfg;
    cfg.positions = Eigen::MatrixXd::Zero(1, 1);
    cfg.grid_lo = Eigen::VectorXd::Zero(1);
    cfg.grid_hi = Eigen::VectorXd::Constant(1, 2.0);
    cfg.points_per_axis = {2};
    cfg.theta_star = Eigen::VectorXd::Constant(1, 0.5);
    cfg.noise_offsets = Eigen::VectorXd::Zero(1);
    cfg.noise_probs = Eigen::VectorXd::Ones(1);
    cfg.bin_width = 0.6;
    cfg.floor = 0.01;
    cfg.horizon = 5;

    const bl::Graph g = bl::make_graph(1, {});
    const bl::Scenario sc = bl::build_localization(cfg, g);

    CHECK(sc.model.n == 1);
    CHECK(sc.model.theta_star == 0);
    REQUIRE(sc.model.alphabets == std::vector<int>{2});
    // Ranges 0.5 and 1.5 land in distinct bins; the floor then renormalizes.
    CHECK(sc.model.tables[0](0, 0) == doctest::Approx(1.01 / 1.02).epsilon(1e-12));
    CHECK(sc.model.tables[0](0, 1) == doctest::Approx(0.01 / 1.02).epsilon(1e-12));
    CHECK(sc.model.tables[0](1, 0) == doctest::Approx(0.01 / 1.02).epsilon(1e-12));
    CHECK(sc.model.tables[0](1, 1) == doctest::Approx(1.01 / 1.02).epsilon(1e-12));
    CHECK(sc.warnings.empty());
    CHECK(sc.horizon == 5);
    CHECK(bl::prior_epsilon(sc) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_NOTHROW(bl::validate_scenario(sc));
}

TEST_CASE("build_localization warns when geometry hides the source") {
    bl::LocalizationConfig cfg;
    cfg.positions = Eigen::MatrixXd::Constant(1, 1, 1.0);  // equidistant
    cfg.grid_lo = Eigen::VectorXd::Zero(1);
    cfg.grid_hi = Eigen::VectorXd::Constant(1, 2.0);
    cfg.points_per_axis = {2};
    cfg.theta_star = Eigen::VectorXd::Constant(1, 0.5);
    cfg.noise_offsets = Eigen::VectorXd::Zero(1);
    cfg.noise_probs = Eigen::VectorXd::Ones(1);
    cfg.bin_width = 0.6;
    cfg.floor = 0.01;
    cfg.horizon = 3;

    const bl::Scenario sc = bl::build_localization(cfg, bl::make_graph(1, {}));
    REQUIRE(sc.warnings.size() == 1);
    CHECK(sc.warnings[0].find("indistinguishable") != std::string::npos);
    CHECK(bl::kl_rate(sc.model, 1) == 0.0);
}

TEST_CASE("build_localization rejects inconsistent geometry") {
    bl::LocalizationConfig cfg;
    cfg.positions = Eigen::MatrixXd::Zero(1, 1);
    cfg.grid_lo = Eigen::VectorXd::Zero(1);
    cfg.grid_hi = Eigen::VectorXd::Constant(1, 2.0);
    cfg.points_per_axis = {2};
    cfg.theta_star = Eigen::VectorXd::Constant(1, 0.5);
    cfg.noise_offsets = Eigen::VectorXd::Zero(1);
    cfg.noise_probs = Eigen::VectorXd::Ones(1);
    cfg.bin_width = 0.6;
    cfg.floor = 0.01;
    cfg.horizon = 1;
    const bl::Graph g = bl::make_graph(1, {});

    {
        auto bad = cfg;
        bad.floor = 0.0;
        CHECK_THROWS_WITH_AS(bl::build_localization(bad, g),
                             doctest::Contains("zero likelihood"),
                             bl::assumption_error);
    }
    {
        auto bad = cfg;
        bad.theta_star = Eigen::VectorXd::Constant(1, 0.6);
        CHECK_THROWS_WITH_AS(bl::build_localization(bad, g),
                             doctest::Contains("grid point"),
                             std::invalid_argument);
    }
    {
        auto bad = cfg;
        bad.positions = Eigen::MatrixXd::Zero(2, 1);
        CHECK_THROWS_WITH_AS(bl::build_localization(bad, g),
                             doctest::Contains("positions/graph"),
                             std::invalid_argument);
    }
    {
        auto bad = cfg;
        bad.grid_lo = Eigen::VectorXd::Zero(2);
        CHECK_THROWS_AS(bl::build_localization(bad, g), std::invalid_argument);
    }
    {
        auto bad = cfg;
        bad.bin_width = 0.0;
        CHECK_THROWS_WITH_AS(bl::build_localization(bad, g),
                             doctest::Contains("bin width"),
                             std::invalid_argument);
    }
    {
        auto bad = cfg;
        bad.noise_offsets = Eigen::VectorXd();
        bad.noise_probs = Eigen::VectorXd();
        CHECK_THROWS_WITH_AS(bl::build_localization(bad, g),
                             doctest::Contains("noise"),
                             std::invalid_argument);
    }
    {
        auto bad = cfg;
        bad.noise_probs = Eigen::VectorXd::Constant(1, 0.4);
        CHECK_THROWS_AS(bl::build_localization(bad, g), std::invalid_argument);
    }
    {
        auto bad = cfg;
        bad.theta_star = Eigen::VectorXd::Constant(2, 0.5);
        CHECK_THROWS_WITH_AS(bl::build_localization(bad, g),
                             doctest::Contains("theta_star dimension"),
                             std::invalid_argument);
    }
}

TEST_CASE("a two-sensor localization scenario runs end to end") {
    bl::LocalizationConfig cfg;
    cfg.positions = Eigen::MatrixXd(2, 1);
    cfg.positions << 0.0, 2.0;
    cfg.grid_lo = Eigen::VectorXd::Zero(1);
    cfg.grid_hi = Eigen::VectorXd::Constant(1, 2.0);
    cfg.points_per_axis = {3};
    cfg.theta_star = Eigen::VectorXd::Constant(1, 1.0);
    cfg.noise_offsets = Eigen::VectorXd(2);
    cfg.noise_offsets << -0.1, 0.1;
    cfg.noise_probs = Eigen::VectorXd::Constant(2, 0.5);
    cfg.bin_width = 0.25;
    cfg.floor = 1e-3;
    cfg.horizon = 30;

    const bl::Scenario sc = bl::build_localization(cfg, bl::path_graph(2));
    CHECK(sc.model.theta_star == 1);
    CHECK(sc.warnings.empty());
    for (int i = 0; i < 2; ++i) {
        const Eigen::VectorXd sums = sc.model.tables[i].rowwise().sum();
        CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-12);
        CHECK(sc.model.tables[i].minCoeff() > 0.0);
    }
    CHECK_NOTHROW(bl::validate_scenario(sc));

    const bl::Trace trace = bl::run_scenario(sc, 21);
    CHECK(trace.observations.rows() == 30);
    const Eigen::VectorXd log_w = sc.space.log_weights();
    CHECK(bl::normalization_drift(bl::BeliefState{trace.snapshots.back(), 30},
                                  &log_w) <= 1e-9);
}
