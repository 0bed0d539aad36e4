#include "belieflab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "belieflab/divergences.hpp"
#include "belieflab/parallel.hpp"
#include "belieflab/rng.hpp"

namespace belieflab {

std::vector<long> resolve_ball(const LikelihoodModel& model,
                               const BallSpec& spec) {
    const long ntheta = model.num_hypotheses();
    std::vector<long> out;
    switch (spec.kind) {
        case BallKind::KlRate:
            if (spec.radius < 0.0)
                throw std::invalid_argument("ball: negative radius");
            for (long th = 0; th < ntheta; ++th)
                if (kl_rate(model, th) <= spec.radius) out.push_back(th);
            break;
        case BallKind::Hellinger:
            if (spec.radius < 0.0)
                throw std::invalid_argument("ball: negative radius");
            for (long th = 0; th < ntheta; ++th)
                if (joint_hellinger(model, model.theta_star, th) <= spec.radius)
                    out.push_back(th);
            break;
        case BallKind::Indices:
            for (long th : spec.indices) {
                if (th < 0 || th >= ntheta)
                    throw std::invalid_argument("ball: index out of range");
                out.push_back(th);
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            break;
    }
    return out;
}

void validate_scenario(const Scenario& sc) {
    validate_model(sc.model);
    if (sc.graph.n != sc.model.n)
        throw std::invalid_argument("scenario: graph/model agent mismatch");
    if (sc.weights.n() != sc.model.n)
        throw std::invalid_argument("scenario: weight matrix size mismatch");
    if (sc.space.size != sc.model.num_hypotheses())
        throw std::invalid_argument("scenario: space/model size mismatch");
    if (sc.horizon < 0) throw std::invalid_argument("scenario: negative horizon");
    if (sc.log_prior.rows() != sc.model.n ||
        sc.log_prior.cols() != sc.model.num_hypotheses())
        throw std::invalid_argument("scenario: prior shape mismatch");
    if (!sc.log_prior.allFinite())
        throw std::invalid_argument(
            "scenario: initial beliefs must be strictly positive");
    const Eigen::VectorXd log_w = sc.space.log_weights();
    for (int i = 0; i < sc.model.n; ++i) {
        const double z =
            log_sum_exp(Eigen::VectorXd(sc.log_prior.row(i).transpose() + log_w));
        if (std::abs(z) > 1e-9)
            throw std::invalid_argument("scenario: prior row " +
                                        std::to_string(i) + " not normalized");
    }
    const WeightReport wr = validate_weights(sc.weights, sc.graph);
    if (!wr.pass) {
        std::string detail;
        for (const auto& c : wr.conditions)
            if (!c.pass) detail += (detail.empty() ? "" : "; ") + c.name +
                                   ": " + c.witness;
        throw assumption_error("scenario: weight matrix invalid (" + detail + ")");
    }
    for (const auto& b : sc.balls) resolve_ball(sc.model, b);
}

double prior_epsilon(const Scenario& sc) {
    const Eigen::VectorXd log_w = sc.space.log_weights();
    double eps = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sc.model.n; ++i)
        eps = std::min(eps, std::exp(sc.log_prior(i, sc.model.theta_star) +
                                     log_w[sc.model.theta_star]));
    return eps;
}

namespace {

std::vector<Eigen::VectorXd> truth_cdfs(const LikelihoodModel& model) {
    std::vector<Eigen::VectorXd> cdfs(model.n);
    for (int i = 0; i < model.n; ++i) {
        const Eigen::VectorXd row = model.truth_row(i);
        cdfs[i].resize(row.size());
        double acc = 0.0;
        for (Eigen::Index s = 0; s < row.size(); ++s) {
            acc += row[s];
            cdfs[i][s] = acc;
        }
    }
    return cdfs;
}

bool keep_snapshot(long k, long horizon) {
    return k <= 1000 || k % 10 == 0 || k == horizon;
}

}  // namespace

Trace run_scenario(const Scenario& sc, std::uint64_t seed, long trial) {
    validate_scenario(sc);
    const Eigen::VectorXd log_w = sc.space.log_weights();
    const std::vector<Eigen::VectorXd> cdfs = truth_cdfs(sc.model);
    const CounterRng rng(seed);

    Trace trace;
    trace.horizon = sc.horizon;
    trace.observations.resize(sc.horizon, sc.model.n);
    trace.consensus_gaps.resize(sc.horizon + 1);
    for (const auto& b : sc.balls) {
        trace.ball_members.push_back(resolve_ball(sc.model, b));
        trace.ball_masses.emplace_back(sc.horizon + 1, sc.model.n);
    }

    BeliefState state{sc.log_prior, 0};
    const auto record = [&](long k) {
        trace.consensus_gaps[k] = consensus_gap(state, &log_w);
        for (size_t b = 0; b < sc.balls.size(); ++b)
            for (int i = 0; i < sc.model.n; ++i)
                trace.ball_masses[b](k, i) =
                    belief_mass(state, i, trace.ball_members[b], &log_w);
        if (keep_snapshot(k, sc.horizon)) {
            trace.snapshot_steps.push_back(k);
            trace.snapshots.push_back(state.log_beliefs);
        }
    };
    record(0);

    std::vector<int> obs(sc.model.n);
    for (long k = 1; k <= sc.horizon; ++k) {
        for (int i = 0; i < sc.model.n; ++i) {
            obs[i] = sample_discrete(cdfs[i], rng.uniform(trial, i, k - 1));
            trace.observations(k - 1, i) = obs[i];
        }
        state = belief_step(state, sc.weights, sc.model, obs, &log_w);
        record(k);
    }
    return trace;
}

std::optional<long> concentration_time(const Trace& trace, int ball,
                                       double sigma) {
    if (ball < 0 || ball >= static_cast<int>(trace.ball_masses.size()))
        throw std::invalid_argument("concentration_time: ball not tracked");
    const Eigen::MatrixXd& masses = trace.ball_masses[ball];
    const double threshold = 1.0 - sigma;
    long first = trace.horizon + 1;
    for (long k = trace.horizon; k >= 0; --k) {
        if (masses.row(k).minCoeff() >= threshold)
            first = k;
        else
            break;
    }
    if (first > trace.horizon) return std::nullopt;
    return first;
}

RateSlopeReport rate_slope(const Trace& trace, long theta, long k_min,
                           long k_max) {
    if (trace.snapshots.empty())
        throw std::invalid_argument("rate_slope: empty trace");
    const long ntheta = trace.snapshots.front().cols();
    const int n = static_cast<int>(trace.snapshots.front().rows());
    if (theta < 0 || theta >= ntheta)
        throw std::invalid_argument("rate_slope: theta out of range");
    if (k_min < 0 || k_max <= k_min)
        throw std::invalid_argument("rate_slope: bad window");

    RateSlopeReport rep;
    rep.per_agent.resize(n);
    rep.used_k_min = std::numeric_limits<long>::max();
    rep.used_k_max = std::numeric_limits<long>::min();

    const double floor_cut = 0.5 * kLogZeroFloor;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<double> xs, ys;
        for (size_t s = 0; s < trace.snapshot_steps.size(); ++s) {
            const long k = trace.snapshot_steps[s];
            if (k < k_min || k > k_max) continue;
            const double v = trace.snapshots[s](i, theta);
            if (!std::isfinite(v) || v <= floor_cut) {
                rep.shrunk = true;
                continue;
            }
            xs.push_back(static_cast<double>(k));
            ys.push_back(v);
        }
        if (xs.size() < 2)
            throw std::invalid_argument(
                "rate_slope: fewer than two usable snapshots in window");
        rep.used_k_min = std::min(rep.used_k_min, static_cast<long>(xs.front()));
        rep.used_k_max = std::max(rep.used_k_max, static_cast<long>(xs.back()));

        const auto m = static_cast<double>(xs.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (size_t p = 0; p < xs.size(); ++p) {
            sx += xs[p];
            sy += ys[p];
            sxx += xs[p] * xs[p];
            sxy += xs[p] * ys[p];
        }
        rep.per_agent[i] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        total += rep.per_agent[i];
    }
    rep.slope = total / n;
    rep.shrunk = rep.shrunk || rep.used_k_min > k_min || rep.used_k_max < k_max;
    return rep;
}

ConcentrationMcReport concentration_mc(const Scenario& sc, const BallSpec& ball,
                                       double sigma, long horizon, long trials,
                                       std::uint64_t seed, int parallelism) {
    validate_scenario(sc);
    if (horizon < 0) throw std::invalid_argument("concentration_mc: horizon < 0");
    if (trials < 1) throw std::invalid_argument("concentration_mc: trials < 1");

    const std::vector<long> members = resolve_ball(sc.model, ball);
    const Eigen::VectorXd log_w = sc.space.log_weights();
    const std::vector<Eigen::VectorXd> cdfs = truth_cdfs(sc.model);
    const double threshold = 1.0 - sigma;
    const CounterRng rng(seed);

    const auto trial_fn = [&](long trial) -> char {
        BeliefState state{sc.log_prior, 0};
        std::vector<int> obs(sc.model.n);
        for (long k = 1; k <= horizon; ++k) {
            for (int i = 0; i < sc.model.n; ++i)
                obs[i] = sample_discrete(cdfs[i], rng.uniform(trial, i, k - 1));
            state = belief_step(state, sc.weights, sc.model, obs, &log_w);
        }
        for (int i = 0; i < sc.model.n; ++i)
            if (belief_mass(state, i, members, &log_w) < threshold) return 1;
        return 0;
    };
    const std::vector<char> fails =
        parallel_map<char>(trials, parallelism, trial_fn);

    ConcentrationMcReport rep;
    rep.k = horizon;
    rep.sigma = sigma;
    rep.trials = trials;
    for (char f : fails) rep.failures += f;
    rep.failure_frequency =
        static_cast<double>(rep.failures) / static_cast<double>(trials);
    rep.se = std::sqrt(rep.failure_frequency * (1.0 - rep.failure_frequency) /
                       static_cast<double>(trials));
    return rep;
}

Scenario build_localization(const LocalizationConfig& cfg, const Graph& graph) {
    const int n = static_cast<int>(cfg.positions.rows());
    const int d = static_cast<int>(cfg.positions.cols());
    if (n != graph.n)
        throw std::invalid_argument("localization: positions/graph mismatch");
    if (cfg.grid_lo.size() != d || cfg.grid_hi.size() != d)
        throw std::invalid_argument("localization: grid bounds dimension mismatch");
    if (!(cfg.bin_width > 0.0))
        throw std::invalid_argument("localization: bin width must be positive");
    if (cfg.noise_offsets.size() == 0 ||
        cfg.noise_offsets.size() != cfg.noise_probs.size())
        throw std::invalid_argument("localization: bad noise specification");
    validate_distribution(cfg.noise_probs);
    if (cfg.theta_star.size() != d)
        throw std::invalid_argument("localization: theta_star dimension mismatch");

    Scenario sc;
    sc.graph = graph;
    sc.space = grid_space(cfg.grid_lo, cfg.grid_hi, cfg.points_per_axis);

    long star = -1;
    for (long th = 0; th < sc.space.size; ++th)
        if ((sc.space.points.row(th).transpose() - cfg.theta_star)
                .cwiseAbs()
                .maxCoeff() <= 1e-9) {
            star = th;
            break;
        }
    if (star < 0)
        throw std::invalid_argument(
            "localization: theta_star does not coincide with a grid point");

    const long noffsets = cfg.noise_offsets.size();
    LikelihoodModel model;
    model.n = n;
    model.theta_star = star;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd dist(sc.space.size);
        for (long th = 0; th < sc.space.size; ++th)
            dist[th] = (sc.space.points.row(th) - cfg.positions.row(i)).norm();

        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (long th = 0; th < sc.space.size; ++th)
            for (long o = 0; o < noffsets; ++o) {
                const double v = dist[th] + cfg.noise_offsets[o];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        const int symbols =
            static_cast<int>(std::floor((hi - lo) / cfg.bin_width)) + 1;

        Eigen::MatrixXd table = Eigen::MatrixXd::Zero(sc.space.size, symbols);
        for (long th = 0; th < sc.space.size; ++th)
            for (long o = 0; o < noffsets; ++o) {
                const double v = dist[th] + cfg.noise_offsets[o];
                int s = static_cast<int>(std::floor((v - lo) / cfg.bin_width));
                s = std::min(std::max(s, 0), symbols - 1);
                table(th, s) += cfg.noise_probs[o];
            }
        if (cfg.floor > 0.0) {
            table.array() += cfg.floor;
            const Eigen::ArrayXd sums = table.rowwise().sum().array();
            table.array().colwise() /= sums;
        } else if ((table.array() == 0.0).any()) {
            throw assumption_error(
                "localization: zero likelihood entries; set a positive floor");
        }
        model.alphabets.push_back(symbols);
        model.tables.push_back(std::move(table));
    }
    sc.model = std::move(model);
    validate_model(sc.model);
    likelihood_floor(sc.model);

    for (long th = 0; th < sc.space.size; ++th)
        if (th != star && kl_rate(sc.model, th) == 0.0)
            sc.warnings.push_back(
                "hypothesis " + std::to_string(th) +
                " is indistinguishable from the source (zero divergence rate)");

    sc.weights = lazy_metropolis(graph);
    sc.log_prior = uniform_beliefs(n, sc.space).log_beliefs;
    sc.horizon = cfg.horizon;
    return sc;
}

}  // namespace belieflab
