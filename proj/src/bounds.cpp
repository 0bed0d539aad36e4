#include "belieflab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "belieflab/parallel.hpp"
#include "belieflab/rng.hpp"

namespace belieflab {

void validate_params(const ConcentrationParams& p, bool grid_family) {
    const auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(p.rho)) throw std::invalid_argument("params: rho outside (0,1)");
    if (!in_unit(p.sigma)) throw std::invalid_argument("params: sigma outside (0,1)");
    if (!in_unit(p.alpha)) throw std::invalid_argument("params: alpha outside (0,1)");
    if (!(p.lambda >= 0.0 && p.lambda < 1.0))
        throw std::invalid_argument("params: lambda outside [0,1)");
    if (p.n < 1) throw std::invalid_argument("params: n < 1");
    if (!(p.r > 0.0)) throw std::invalid_argument("params: r <= 0");
    if (!(p.epsilon > 0.0 && p.epsilon <= 1.0))
        throw std::invalid_argument("params: epsilon outside (0,1]");
    if (grid_family) {
        if (!(p.R > 0.0)) throw std::invalid_argument("params: R <= 0");
        if (p.d < 1) throw std::invalid_argument("params: d < 1");
    }
}

double tail_prefactor(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("tail_prefactor: alpha outside (0,1)");
    const double l = std::log(1.0 / alpha);
    return std::exp(1.0 / (8.0 * l * l));
}

double log_disagreement_gain(double alpha, int n, double lambda) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("disagreement_gain: alpha outside (0,1)");
    if (n < 1) throw std::invalid_argument("disagreement_gain: n < 1");
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw std::invalid_argument("disagreement_gain: lambda outside [0,1)");
    return 8.0 * std::log(1.0 / alpha) * std::log(static_cast<double>(n)) /
           (1.0 - lambda);
}

double disagreement_gain(double alpha, int n, double lambda) {
    return std::exp(log_disagreement_gain(alpha, n, lambda));
}

double log_prior_gain(double alpha, int n, double lambda, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("prior_gain: epsilon outside (0,1]");
    return log_disagreement_gain(alpha, n, lambda) - std::log(epsilon);
}

double prior_gain(double alpha, int n, double lambda, double epsilon) {
    return std::exp(log_prior_gain(alpha, n, lambda, epsilon));
}

std::optional<long> smallest_k(const std::function<bool(long)>& pred,
                               long k_max) {
    if (k_max < 1) throw std::invalid_argument("smallest_k: k_max < 1");
    if (pred(1)) return 1;
    long lo = 1;  // known false
    long hi = 2;
    while (hi < k_max && !pred(hi)) {
        lo = hi;
        hi = hi <= k_max / 2 ? hi * 2 : k_max;
    }
    if (hi >= k_max) {
        if (!pred(k_max)) return std::nullopt;
        hi = k_max;
    }
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}

namespace {

struct TailBand {
    double lower_radius = 0.0;
    double log_count = 0.0;
};

// Nonempty bands plus the overflow shelf, keyed by their lower radii; these
// drive the tail series C2 sum_l N_l exp(-k r_l^2).
std::vector<TailBand> tail_bands(const Covering& cov) {
    std::vector<TailBand> out;
    for (const auto& b : cov.bands)
        if (!b.members.empty())
            out.push_back({b.lower_radius,
                           std::log(static_cast<double>(b.members.size()))});
    if (!cov.overflow.empty())
        out.push_back({cov.radii.back(),
                       std::log(static_cast<double>(cov.overflow.size()))});
    return out;
}

double log_tail_sum(const std::vector<TailBand>& bands, double log_c2, long k) {
    Eigen::VectorXd terms(bands.size());
    for (size_t l = 0; l < bands.size(); ++l)
        terms[l] = bands[l].log_count -
                   static_cast<double>(k) * bands[l].lower_radius * bands[l].lower_radius;
    return log_c2 + log_sum_exp(terms);
}

}  // namespace

BoundReport countable_transient(const ConcentrationParams& params,
                                const Covering& cov,
                                const LikelihoodModel& model,
                                const Eigen::MatrixXd* log_prior_mass,
                                long k_max) {
    validate_params(params, false);
    if (cov.hellinger)
        throw std::invalid_argument("countable_transient: needs a KL covering");
    if (k_max < 1) throw std::invalid_argument("countable_transient: k_max < 1");
    const long ntheta = model.num_hypotheses();

    Eigen::MatrixXd log_mass;
    if (log_prior_mass != nullptr) {
        log_mass = *log_prior_mass;
        if (log_mass.rows() != model.n || log_mass.cols() != ntheta)
            throw std::invalid_argument("countable_transient: prior shape mismatch");
    } else {
        log_mass = Eigen::MatrixXd::Constant(
            model.n, ntheta, -std::log(static_cast<double>(ntheta)));
    }

    BoundReport rep;
    rep.family = "countable";
    rep.log_tail_prefactor = std::log(tail_prefactor(params.alpha));
    rep.log_gain =
        log_prior_gain(params.alpha, params.n, params.lambda, params.epsilon);
    rep.k_max = k_max;
    rep.r = cov.radii.empty() ? params.r : cov.radii.front();
    rep.truncation_level = cov.truncation_level;

    const std::vector<TailBand> tails = tail_bands(cov);
    const double log_rho = std::log(params.rho);
    const double log_sigma = std::log(params.sigma);

    // --- N1: tail series below rho -----------------------------------------
    const auto n1_pred = [&](long k) {
        return log_tail_sum(tails, rep.log_tail_prefactor, k) <= log_rho;
    };
    if (tails.empty()) {
        rep.n1 = 1;
        rep.notes.push_back("no hypotheses outside the ball: tail bound vacuous");
    } else {
        rep.n1 = smallest_k(n1_pred, k_max);
    }
    rep.n1_residual_log =
        tails.empty()
            ? -std::numeric_limits<double>::infinity()
            : log_tail_sum(tails, rep.log_tail_prefactor,
                           rep.n1 ? *rep.n1 : k_max);

    // --- N2: prior-weighted decay for every outside hypothesis --------------
    struct Outside {
        long theta;
        double rate;     // kl_rate
        double log_gm;   // (1/n) sum_i log prior mass
    };
    std::vector<Outside> outside;
    const auto add_outside = [&](long th) {
        Outside o;
        o.theta = th;
        o.rate = kl_rate(model, th);
        o.log_gm = log_mass.col(th).mean();
        outside.push_back(o);
    };
    for (const auto& b : cov.bands)
        for (long th : b.members) add_outside(th);
    for (long th : cov.overflow) add_outside(th);

    const auto n2_pred = [&](long k) {
        for (const auto& o : outside)
            if (rep.log_gain - 0.5 * k * o.rate > log_sigma + o.log_gm)
                return false;
        return true;
    };
    if (outside.empty()) {
        rep.n2 = 1;
    } else {
        rep.n2 = smallest_k(n2_pred, k_max);
    }
    rep.n2_source = "exact";
    {
        double worst = -std::numeric_limits<double>::infinity();
        const long at = rep.n2 ? *rep.n2 : k_max;
        for (const auto& o : outside)
            worst = std::max(worst, rep.log_gain - 0.5 * at * o.rate -
                                        log_sigma - o.log_gm);
        rep.n2_residual_log = worst;
    }

    // Band-wise sufficient variant: lower radius as the rate, worst prior mass
    // in the band.
    std::vector<std::pair<double, double>> band_floor;  // (lower radius, min gm)
    {
        const auto collect = [&](const std::vector<long>& members, double lower) {
            if (members.empty()) return;
            double min_gm = std::numeric_limits<double>::infinity();
            for (long th : members)
                min_gm = std::min(min_gm, log_mass.col(th).mean());
            band_floor.emplace_back(lower, min_gm);
        };
        for (const auto& b : cov.bands) collect(b.members, b.lower_radius);
        collect(cov.overflow, cov.radii.empty() ? 0.0 : cov.radii.back());
    }
    const auto n2_band_pred = [&](long k) {
        for (const auto& [lower, min_gm] : band_floor)
            if (rep.log_gain - 0.5 * k * lower > log_sigma + min_gm) return false;
        return true;
    };
    rep.n2_bandwise =
        band_floor.empty() ? std::optional<long>(1) : smallest_k(n2_band_pred, k_max);

    if (rep.n1 && rep.n2) rep.horizon = std::max(*rep.n1, *rep.n2);

    // --- per-band detail -----------------------------------------------------
    const long at = rep.horizon ? *rep.horizon : k_max;
    const auto band_summary = [&](const std::vector<long>& members, double lower,
                                  double upper, bool overflow) {
        BandSummary s;
        s.lower_radius = lower;
        s.upper_radius = upper;
        s.count = static_cast<long>(members.size());
        s.overflow = overflow;
        s.log_tail_term_at_horizon =
            members.empty()
                ? -std::numeric_limits<double>::infinity()
                : rep.log_tail_prefactor + std::log(static_cast<double>(members.size())) -
                      static_cast<double>(at) * lower * lower;
        if (!members.empty()) {
            double min_gm = std::numeric_limits<double>::infinity();
            for (long th : members) min_gm = std::min(min_gm, log_mass.col(th).mean());
            const double num = rep.log_gain - log_sigma - min_gm;
            if (num <= 0.0)
                s.required_k = 1;
            else if (lower > 0.0)
                s.required_k = static_cast<long>(std::ceil(2.0 * num / lower));
        }
        return s;
    };
    for (const auto& b : cov.bands)
        rep.bands.push_back(
            band_summary(b.members, b.lower_radius, b.upper_radius, false));
    if (!cov.overflow.empty())
        rep.bands.push_back(band_summary(
            cov.overflow, cov.radii.back(),
            std::numeric_limits<double>::infinity(), true));

    for (const auto& o : outside)
        if (o.rate == 0.0 && rep.log_gain > log_sigma + o.log_gm) {
            rep.notes.push_back("hypothesis " + std::to_string(o.theta) +
                                " outside the ball has zero rate: n2 unreachable");
            break;
        }
    return rep;
}

BoundReport grid_transient(const ConcentrationParams& params,
                           const Covering& cov, long k_max) {
    validate_params(params, true);
    if (!cov.hellinger)
        throw std::invalid_argument("grid_transient: needs a Hellinger covering");
    if (k_max < 1) throw std::invalid_argument("grid_transient: k_max < 1");

    BoundReport rep;
    rep.family = "grid";
    rep.log_tail_prefactor = std::log(tail_prefactor(params.alpha));
    rep.log_gain = log_disagreement_gain(params.alpha, params.n, params.lambda);
    rep.k_max = k_max;
    rep.r = cov.r;
    rep.R = params.R;
    rep.d = params.d;
    rep.truncation_level = cov.truncation_level;

    const int levels = static_cast<int>(cov.bands.size());
    Eigen::VectorXd gap(levels), log_delta(levels), log_radius_ratio(levels);
    for (int l = 0; l < levels; ++l) {
        const auto& b = cov.bands[l];
        gap[l] = b.lower_radius - b.delta - params.R;
        if (!(gap[l] > 0.0))
            throw std::invalid_argument(
                "grid_transient: band " + std::to_string(l + 1) +
                " violates r_{l+1} - delta_l - R > 0 (gap = " +
                std::to_string(gap[l]) + ")");
        log_delta[l] = std::log(b.delta);
        log_radius_ratio[l] = std::log(b.upper_radius / params.R);
    }

    const double log_rho = std::log(params.rho);
    const double log_sigma = std::log(params.sigma);
    const double d = static_cast<double>(params.d);

    const auto n1_lhs = [&](long k) {
        Eigen::VectorXd terms(levels);
        for (int l = 0; l < levels; ++l)
            terms[l] = rep.log_gain - static_cast<double>(k) * gap[l] - d * log_delta[l];
        return log_sum_exp(terms);
    };
    const auto n2_lhs = [&](long k) {
        Eigen::VectorXd terms(levels);
        for (int l = 0; l < levels; ++l)
            terms[l] = d * log_radius_ratio[l] - 2.0 * static_cast<double>(k) * gap[l];
        return log_sum_exp(terms);
    };

    if (levels == 0) {
        rep.n1 = 1;
        rep.n2 = 1;
        rep.horizon = 1;
        rep.notes.push_back("no covering bands: bounds vacuous");
        rep.n1_residual_log = -std::numeric_limits<double>::infinity();
        rep.n2_residual_log = -std::numeric_limits<double>::infinity();
        return rep;
    }

    rep.n1 = smallest_k([&](long k) { return n1_lhs(k) <= log_rho; }, k_max);
    rep.n2 = smallest_k([&](long k) { return n2_lhs(k) <= log_sigma; }, k_max);
    rep.n1_residual_log = n1_lhs(rep.n1 ? *rep.n1 : k_max);
    rep.n2_residual_log = n2_lhs(rep.n2 ? *rep.n2 : k_max);
    if (rep.n1 && rep.n2) rep.horizon = std::max(*rep.n1, *rep.n2);

    const long at = rep.horizon ? *rep.horizon : k_max;
    for (int l = 0; l < levels; ++l) {
        const auto& b = cov.bands[l];
        BandSummary s;
        s.lower_radius = b.lower_radius;
        s.upper_radius = b.upper_radius;
        s.count = static_cast<long>(b.members.size());
        s.delta = b.delta;
        s.net_size = static_cast<long>(b.net.size());
        s.log_tail_term_at_horizon =
            rep.log_gain - static_cast<double>(at) * gap[l] - d * log_delta[l];
        const double num = d * log_radius_ratio[l] - log_sigma;
        s.required_k =
            num <= 0.0 ? 1 : static_cast<long>(std::ceil(num / (2.0 * gap[l])));
        rep.bands.push_back(s);

        const double volumetric = std::exp(-d * log_delta[l]);
        if (static_cast<double>(b.net.size()) >= volumetric)
            rep.notes.push_back("band " + std::to_string(l + 1) + ": net size " +
                                std::to_string(b.net.size()) +
                                " at or above delta^-d = " +
                                std::to_string(volumetric));
        else
            rep.notes.push_back("band " + std::to_string(l + 1) + ": net size " +
                                std::to_string(b.net.size()) +
                                " below delta^-d = " + std::to_string(volumetric));
    }
    rep.notes.push_back("finite radius ladder: tail series check not applicable");
    return rep;
}

double cumulative_log_ratio(const LikelihoodModel& model, long theta,
                            const Eigen::MatrixXi& history, long k) {
    if (theta < 0 || theta >= model.num_hypotheses())
        throw std::invalid_argument("cumulative_log_ratio: theta out of range");
    if (k < 0 || history.rows() < k)
        throw std::invalid_argument("cumulative_log_ratio: history shorter than k");
    if (history.cols() != model.n)
        throw std::invalid_argument("cumulative_log_ratio: history agent mismatch");
    double acc = 0.0;
    for (long t = 0; t < k; ++t)
        for (int i = 0; i < model.n; ++i) {
            const int s = history(t, i);
            if (s < 0 || s >= model.alphabets[i])
                throw std::invalid_argument("cumulative_log_ratio: bad symbol");
            const double truth = model.tables[i](model.theta_star, s);
            if (truth <= 0.0)
                throw std::invalid_argument(
                    "cumulative_log_ratio: observed symbol has zero truth probability");
            acc += std::log(model.tables[i](theta, s) / truth) / model.n;
        }
    return acc;
}

namespace {

Eigen::VectorXd truth_cdf(const LikelihoodModel& model, int agent) {
    const Eigen::VectorXd row = model.truth_row(agent);
    Eigen::VectorXd cdf(row.size());
    double acc = 0.0;
    for (Eigen::Index s = 0; s < row.size(); ++s) {
        acc += row[s];
        cdf[s] = acc;
    }
    return cdf;
}

McCheck finish_check(long hits, long trials, double bound) {
    McCheck c;
    c.hits = hits;
    c.trials = trials;
    c.frequency = static_cast<double>(hits) / static_cast<double>(trials);
    c.se = std::sqrt(c.frequency * (1.0 - c.frequency) /
                     static_cast<double>(trials));
    c.bound = bound;
    c.vacuous = !(bound < 1.0);
    c.pass = c.vacuous || c.frequency <= bound + 3.0 * c.se;
    return c;
}

}  // namespace

TailMcReport tail_bound_mc(const LikelihoodModel& model, const Covering& cov,
                           long k, long trials, std::uint64_t seed,
                           int parallelism) {
    if (k < 1) throw std::invalid_argument("tail_bound_mc: k < 1");
    if (trials < 1) throw std::invalid_argument("tail_bound_mc: trials < 1");
    if (cov.hellinger)
        throw std::invalid_argument("tail_bound_mc: needs a KL covering");

    std::vector<long> outside;
    for (const auto& b : cov.bands)
        outside.insert(outside.end(), b.members.begin(), b.members.end());
    outside.insert(outside.end(), cov.overflow.begin(), cov.overflow.end());

    const long m = static_cast<long>(outside.size());
    Eigen::VectorXd rate(m);
    for (long j = 0; j < m; ++j) rate[j] = kl_rate(model, outside[j]);

    // ratio_cols[i] maps a symbol to the vector over outside hypotheses of
    // (1/n) log( l(s|theta) / f(s) ).
    std::vector<Eigen::MatrixXd> ratio_cols(model.n);
    for (int i = 0; i < model.n; ++i) {
        ratio_cols[i].resize(model.alphabets[i], m);
        const Eigen::VectorXd truth = model.truth_row(i);
        for (int s = 0; s < model.alphabets[i]; ++s)
            for (long j = 0; j < m; ++j)
                ratio_cols[i](s, j) =
                    std::log(model.tables[i](outside[j], s) / truth[s]) / model.n;
    }
    std::vector<Eigen::VectorXd> cdfs(model.n);
    for (int i = 0; i < model.n; ++i) cdfs[i] = truth_cdf(model, i);

    const CounterRng rng(seed);
    const auto trial_fn = [&](long trial) -> char {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
        for (long t = 0; t < k; ++t)
            for (int i = 0; i < model.n; ++i) {
                const int s = sample_discrete(cdfs[i], rng.uniform(trial, i, t));
                acc += ratio_cols[i].row(s).transpose();
            }
        for (long j = 0; j < m; ++j)
            if (acc[j] >= -0.5 * static_cast<double>(k) * rate[j]) return 1;
        return 0;
    };
    const std::vector<char> events =
        parallel_map<char>(trials, parallelism, trial_fn);
    long hits = 0;
    for (char e : events) hits += e;

    TailMcReport rep;
    rep.k = k;
    rep.log_bound =
        m == 0 ? -std::numeric_limits<double>::infinity()
               : log_tail_sum(tail_bands(cov),
                              std::log(tail_prefactor(likelihood_floor(model))), k);
    rep.check = finish_check(hits, trials, std::exp(rep.log_bound));
    return rep;
}

namespace {

void check_evidence_args(const LikelihoodModel& model,
                         const std::vector<long>& set,
                         const Eigen::MatrixXi& history, long k,
                         const Eigen::VectorXd& log_prior_mass) {
    if (set.empty())
        throw std::invalid_argument("evidence: empty hypothesis set");
    if (k < 0 || history.rows() < k)
        throw std::invalid_argument("evidence: history shorter than k");
    if (k > 0 && history.cols() != model.n)
        throw std::invalid_argument("evidence: history agent mismatch");
    if (log_prior_mass.size() != model.num_hypotheses())
        throw std::invalid_argument("evidence: prior mass size mismatch");
    double max_log_mass = -std::numeric_limits<double>::infinity();
    for (long th : set) {
        if (th < 0 || th >= model.num_hypotheses())
            throw std::invalid_argument("evidence: hypothesis index out of range");
        max_log_mass = std::max(max_log_mass, log_prior_mass[th]);
    }
    if (!std::isfinite(max_log_mass))
        throw std::invalid_argument("evidence: set has zero prior mass");
}

}  // namespace

double log_evidence(const LikelihoodModel& model, const std::vector<long>& set,
                    const Eigen::MatrixXi& history, long k,
                    const Eigen::VectorXd& log_prior_mass) {
    check_evidence_args(model, set, history, k, log_prior_mass);
    Eigen::VectorXd terms(set.size());
    for (size_t j = 0; j < set.size(); ++j) {
        const long th = set[j];
        double acc = log_prior_mass[th];
        for (long t = 0; t < k; ++t)
            for (int i = 0; i < model.n; ++i)
                acc += std::log(model.tables[i](th, history(t, i)));
        terms[j] = acc;
    }
    return log_sum_exp(terms);
}

double log_agent_evidence(const LikelihoodModel& model, const WeightMatrix& w,
                          const std::vector<long>& set,
                          const Eigen::MatrixXi& history, long k, int agent,
                          const Eigen::VectorXd& log_prior_mass) {
    check_evidence_args(model, set, history, k, log_prior_mass);
    if (agent < 0 || agent >= model.n)
        throw std::invalid_argument("evidence: bad agent index");
    if (w.n() != model.n)
        throw std::invalid_argument("evidence: weight matrix size mismatch");

    const std::vector<Eigen::MatrixXd> powers =
        matrix_powers(w.entries, static_cast<int>(k));

    Eigen::VectorXd terms(set.size()), mass(set.size());
    for (size_t j = 0; j < set.size(); ++j) {
        const long th = set[j];
        double acc = log_prior_mass[th];
        for (long t = 1; t <= k; ++t)
            for (int i = 0; i < model.n; ++i)
                acc += powers[k - t](agent, i) *
                       std::log(model.tables[i](th, history(t - 1, i)));
        terms[j] = acc;
        mass[j] = log_prior_mass[th];
    }
    return log_sum_exp(terms) - log_sum_exp(mass);
}

EvidenceGainReport evidence_gain_check(const LikelihoodModel& model,
                                       const WeightMatrix& w,
                                       const std::vector<long>& set,
                                       const Eigen::MatrixXi& history, long k,
                                       const Eigen::VectorXd& log_prior_mass) {
    EvidenceGainReport rep;
    rep.log_gain = log_disagreement_gain(likelihood_floor(model), model.n,
                                         w.lambda_formula);
    const double log_g = log_evidence(model, set, history, k, log_prior_mass);
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < model.n; ++i) {
        const double log_gi =
            log_agent_evidence(model, w, set, history, k, i, log_prior_mass);
        rep.slack.push_back(rep.log_gain + log_g / model.n - log_gi);
        rep.min_slack = std::min(rep.min_slack, rep.slack.back());
    }
    rep.pass = rep.min_slack >= -1e-9;
    return rep;
}

CellRatioMcReport evidence_ratio_mc(const LikelihoodModel& model,
                                    const WeightMatrix& w, const Covering& cov,
                                    double R, int d, long k, long trials,
                                    std::uint64_t seed,
                                    const Eigen::VectorXd& log_prior_mass,
                                    HistorySampler sampler, int parallelism) {
    if (!cov.hellinger)
        throw std::invalid_argument("evidence_ratio_mc: needs a Hellinger covering");
    if (k < 0) throw std::invalid_argument("evidence_ratio_mc: k < 0");
    if (trials < 1) throw std::invalid_argument("evidence_ratio_mc: trials < 1");
    if (!(R > 0.0)) throw std::invalid_argument("evidence_ratio_mc: R <= 0");
    if (d < 1) throw std::invalid_argument("evidence_ratio_mc: d < 1");

    const long ntheta = model.num_hypotheses();
    if (log_prior_mass.size() != ntheta)
        throw std::invalid_argument("evidence_ratio_mc: prior mass size mismatch");

    std::vector<long> ball;
    for (long th = 0; th < ntheta; ++th)
        if (joint_hellinger(model, cov.center, th) <= R) ball.push_back(th);

    struct Cell {
        int band;  // 1-based
        int pos;
        std::vector<long> members;
        double gap;
        double bound;
    };
    const double c2 = tail_prefactor(likelihood_floor(model));
    std::vector<Cell> cells;
    for (size_t l = 0; l < cov.bands.size(); ++l) {
        const auto& b = cov.bands[l];
        const double gap = b.lower_radius - b.delta - R;
        const double bound =
            c2 * std::exp(-static_cast<double>(k) * gap + d * std::log(b.delta));
        for (size_t p = 0; p < b.net.size(); ++p) {
            Cell c;
            c.band = static_cast<int>(l) + 1;
            c.pos = static_cast<int>(p);
            c.gap = gap;
            c.bound = bound;
            for (size_t m = 0; m < b.members.size(); ++m)
                if (b.cell_of[m] == static_cast<int>(p))
                    c.members.push_back(b.members[m]);
            cells.push_back(std::move(c));
        }
    }

    std::vector<Eigen::MatrixXd> log_tables(model.n);
    for (int i = 0; i < model.n; ++i)
        log_tables[i] = model.tables[i].array().log();
    std::vector<Eigen::VectorXd> cdfs(model.n);
    for (int i = 0; i < model.n; ++i) cdfs[i] = truth_cdf(model, i);

    // Mixture sampler: prior restricted to the inner ball.
    Eigen::VectorXd ball_cdf(ball.size());
    {
        double acc = 0.0;
        Eigen::VectorXd mass(ball.size());
        for (size_t j = 0; j < ball.size(); ++j)
            mass[j] = std::exp(log_prior_mass[ball[j]]);
        const double total = mass.sum();
        for (size_t j = 0; j < ball.size(); ++j) {
            acc += mass[j] / total;
            ball_cdf[j] = acc;
        }
    }

    const std::vector<Eigen::MatrixXd> powers =
        matrix_powers(w.entries, static_cast<int>(k));
    const CounterRng rng(seed);
    const long ncells = static_cast<long>(cells.size());

    const auto trial_fn = [&](long trial) -> std::vector<char> {
        // Draw the data-generating hypothesis, then the history.
        long source = model.theta_star;
        if (sampler == HistorySampler::BallMixture)
            source = ball[sample_discrete(ball_cdf,
                                          rng.uniform(trial, model.n, 0))];
        Eigen::MatrixXi history(k, model.n);
        for (long t = 0; t < k; ++t)
            for (int i = 0; i < model.n; ++i) {
                Eigen::VectorXd cdf = cdfs[i];
                if (source != model.theta_star) {
                    double acc = 0.0;
                    for (int s = 0; s < model.alphabets[i]; ++s) {
                        acc += model.tables[i](source, s);
                        cdf[s] = acc;
                    }
                }
                history(t, i) = sample_discrete(cdf, rng.uniform(trial, i, t));
            }

        // Per-agent network-weighted log likelihood sums over all hypotheses.
        Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(model.n, ntheta);
        for (long t = 1; t <= k; ++t) {
            Eigen::MatrixXd log_lik(model.n, ntheta);
            for (int i = 0; i < model.n; ++i)
                log_lik.row(i) =
                    log_tables[i].col(history(t - 1, i)).transpose();
            weighted += powers[k - t] * log_lik;
        }

        const auto set_log_density = [&](const std::vector<long>& set, int agent) {
            Eigen::VectorXd terms(set.size()), mass(set.size());
            for (size_t j = 0; j < set.size(); ++j) {
                terms[j] = weighted(agent, set[j]) + log_prior_mass[set[j]];
                mass[j] = log_prior_mass[set[j]];
            }
            return log_sum_exp(terms) - log_sum_exp(mass);
        };

        std::vector<char> events(ncells * model.n, 0);
        for (long c = 0; c < ncells; ++c)
            for (int i = 0; i < model.n; ++i) {
                const double ratio =
                    set_log_density(cells[c].members, i) - set_log_density(ball, i);
                if (ratio >= -2.0 * static_cast<double>(k) * cells[c].gap)
                    events[c * model.n + i] = 1;
            }
        return events;
    };

    const std::vector<std::vector<char>> all =
        parallel_map<std::vector<char>>(trials, parallelism, trial_fn);

    CellRatioMcReport rep;
    rep.k = k;
    rep.sampler_note =
        sampler == HistorySampler::TruthProxy
            ? "histories sampled from the truth product measure (proxy for the "
              "inner-ball mixture)"
            : "histories sampled from the prior mixture over the inner ball";
    rep.pass = true;
    for (long c = 0; c < ncells; ++c)
        for (int i = 0; i < model.n; ++i) {
            long hits = 0;
            for (long trial = 0; trial < trials; ++trial)
                hits += all[trial][c * model.n + i];
            CellCheck cc;
            cc.band = cells[c].band;
            cc.cell = cells[c].pos;
            cc.agent = i;
            cc.check = finish_check(hits, trials, cells[c].bound);
            if (k == 0) {
                // Empty product: the ratio is exactly zero, the event fires
                // deterministically, and no tail assertion applies.
                cc.check.vacuous = true;
                cc.check.pass = cc.check.frequency == 1.0;
            }
            rep.pass = rep.pass && cc.check.pass;
            rep.cells.push_back(std::move(cc));
        }
    return rep;
}

MassLowerBoundReport mass_lower_bound_check(
    const BeliefState& state, const LikelihoodModel& model,
    const std::vector<long>& ball, const Eigen::MatrixXi& history, long k,
    double log_gain, const Eigen::VectorXd* log_weights) {
    std::vector<char> inside(model.num_hypotheses(), 0);
    for (long th : ball) inside.at(th) = 1;
    std::vector<long> outside;
    for (long th = 0; th < model.num_hypotheses(); ++th)
        if (!inside[th]) outside.push_back(th);

    MassLowerBoundReport rep;
    if (outside.empty()) {
        rep.log_residual = -std::numeric_limits<double>::infinity();
    } else {
        Eigen::VectorXd terms(outside.size());
        for (size_t j = 0; j < outside.size(); ++j)
            terms[j] = cumulative_log_ratio(model, outside[j], history, k);
        rep.log_residual = log_gain + log_sum_exp(terms);
    }
    const double lower = 1.0 - std::exp(rep.log_residual);

    rep.min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < state.n(); ++i) {
        rep.lower.push_back(lower);
        const double mass = belief_mass(state, i, ball, log_weights);
        rep.min_margin = std::min(rep.min_margin, mass - lower);
    }
    rep.pass = rep.min_margin >= -1e-9;
    return rep;
}

}  // namespace belieflab
