#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "belieflab/bounds.hpp"
#include "belieflab/covering.hpp"
#include "belieflab/io.hpp"
#include "belieflab/rng.hpp"
#include "belieflab/scenario.hpp"

namespace bl = belieflab;
using bl::Json;

namespace {

enum LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

LogLevel log_threshold() {
    const char* env = std::getenv("BELIEFLAB_LOG");
    if (env == nullptr) return kInfo;
    const std::string v(env);
    if (v == "debug") return kDebug;
    if (v == "warn") return kWarn;
    if (v == "error") return kError;
    return kInfo;
}

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::optional<long> horizon;
    int parallel = 0;
    bool quiet = false;

    void log(LogLevel level, const std::string& msg) const {
        if (quiet || level < log_threshold()) return;
        (level >= kWarn ? std::cerr : std::cout) << msg << '\n';
    }
};

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void write_json(const Options& opt, const std::string& name, const Json& j) {
    std::filesystem::create_directories(opt.out);
    bl::atomic_write(join(opt.out, name), j.dump(2) + "\n");
    opt.log(kInfo, "wrote " + join(opt.out, name));
}

Json load_config(const Options& opt) {
    Json cfg = bl::parse_json(bl::read_file(opt.config), opt.config);
    if (!cfg.is_object())
        throw bl::config_error(opt.config + ": top level must be an object");
    if (opt.seed) cfg["seed"] = *opt.seed;
    if (opt.horizon) cfg["horizon"] = *opt.horizon;
    return cfg;
}

Eigen::MatrixXd log_prior_mass(const bl::Scenario& sc) {
    Eigen::MatrixXd mass = sc.log_prior;
    mass.rowwise() += sc.space.log_weights().transpose();
    return mass;
}

bl::ConcentrationParams params_from_config(const Json& cfg,
                                           const bl::Scenario& sc) {
    const Json& b = cfg.contains("bounds") ? cfg.at("bounds") : Json::object();
    bl::ConcentrationParams p;
    p.rho = b.value("rho", 0.1);
    p.sigma = b.value("sigma", 0.1);
    p.r = b.value("r", 0.0);
    p.R = b.value("R", 0.0);
    p.alpha = bl::likelihood_floor(sc.model);
    p.epsilon = bl::prior_epsilon(sc);
    p.lambda = sc.weights.lambda_formula;
    p.n = sc.model.n;
    p.d = sc.space.dim;
    return p;
}

std::string bounds_family(const Json& cfg, const bl::Scenario& sc) {
    const Json& b = cfg.contains("bounds") ? cfg.at("bounds") : Json::object();
    if (b.contains("family")) return b.at("family").get<std::string>();
    return sc.space.kind == bl::HypothesisSpace::Kind::Grid ? "grid"
                                                            : "countable";
}

bl::Covering covering_from_config(const Json& cfg, const bl::Scenario& sc,
                                  const bl::ConcentrationParams& p) {
    const Json& b = cfg.contains("bounds") ? cfg.at("bounds") : Json::object();
    const std::string family = bounds_family(cfg, sc);
    if (family == "countable") {
        std::vector<double> radii;
        if (b.contains("radii"))
            radii = b.at("radii").get<std::vector<double>>();
        else
            radii = bl::default_kl_radii(sc.model, p.r, b.value("levels", 0));
        const long trunc =
            sc.space.kind == bl::HypothesisSpace::Kind::CountableTruncated
                ? sc.space.truncation_level
                : sc.space.size;
        return bl::kl_covering(sc.model, radii, trunc);
    }
    if (family != "grid")
        throw bl::config_error("config: unknown bounds family '" + family + "'");
    std::vector<double> radii;
    if (b.contains("radii")) {
        radii = b.at("radii").get<std::vector<double>>();
    } else {
        if (!(p.r > 0.0 && p.r < 1.0))
            throw bl::config_error("config: bounds.r must lie in (0,1)");
        int levels = 1;
        while (std::ldexp(1.0, 1 - levels) > p.r) ++levels;
        radii = bl::default_hellinger_radii(levels);
    }
    int l_r = 0;
    for (size_t l = 0; l < radii.size() && l_r == 0; ++l)
        if (radii[l] <= p.r) l_r = static_cast<int>(l) + 1;
    if (l_r == 0) throw bl::config_error("config: no covering radius <= r");
    std::vector<double> deltas;
    if (b.contains("deltas"))
        deltas = b.at("deltas").get<std::vector<double>>();
    else
        deltas = bl::default_hellinger_deltas(radii, l_r, p.R);
    return bl::hellinger_covering(sc.model, sc.space, p.r, radii, deltas);
}

Eigen::MatrixXi sample_history(const bl::LikelihoodModel& model, long k,
                               const bl::CounterRng& rng, long trial) {
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
    Eigen::MatrixXi history(k, model.n);
    for (long t = 0; t < k; ++t)
        for (int i = 0; i < model.n; ++i)
            history(t, i) = bl::sample_discrete(cdfs[i], rng.uniform(trial, i, t));
    return history;
}

Json run_summary(const Json& cfg, const bl::Scenario& sc,
                 const bl::Trace& trace) {
    const double sigma = cfg.value("sigma", 0.1);
    Json summary;
    summary["horizon"] = trace.horizon;
    summary["seed"] = sc.seed;
    summary["final_consensus_gap"] = trace.consensus_gaps[trace.horizon];
    summary["sigma"] = sigma;

    Json balls = Json::array();
    for (size_t b = 0; b < sc.balls.size(); ++b) {
        Json bj;
        bj["name"] = sc.balls[b].name;
        bj["size"] = trace.ball_members[b].size();
        const auto t = bl::concentration_time(trace, static_cast<int>(b), sigma);
        bj["concentration_time"] = t ? Json(*t) : Json(nullptr);
        bj["final_min_mass"] =
            trace.ball_masses[b].row(trace.horizon).minCoeff();
        balls.push_back(std::move(bj));
    }
    summary["balls"] = std::move(balls);

    Json slopes = Json::array();
    const long ntheta = sc.model.num_hypotheses();
    if (trace.horizon >= 50 && ntheta <= 64) {
        const long k_max = std::min<long>(1000, trace.horizon);
        const long k_min = std::min<long>(200, k_max / 2);
        for (long th = 0; th < ntheta; ++th) {
            if (th == sc.model.theta_star) continue;
            try {
                Json sj = bl::rate_slope_to_json(
                    bl::rate_slope(trace, th, k_min, k_max));
                sj["theta"] = th;
                sj["kl_rate"] = bl::kl_rate(sc.model, th);
                slopes.push_back(std::move(sj));
            } catch (const std::invalid_argument&) {
                // hypothesis annihilated within the window; nothing to fit
            }
        }
    }
    summary["rate_slopes"] = std::move(slopes);
    summary["warnings"] = sc.warnings;
    return summary;
}

int cmd_run(const Options& opt) {
    const Json cfg = load_config(opt);
    const bl::Scenario sc = bl::scenario_from_json(cfg);
    const bl::Trace trace = bl::run_scenario(sc, sc.seed, 0);
    std::filesystem::create_directories(opt.out);
    bl::atomic_write(join(opt.out, "trace.csv"), bl::trace_to_csv(trace));
    opt.log(kInfo, "wrote " + join(opt.out, "trace.csv"));
    write_json(opt, "summary.json", run_summary(cfg, sc, trace));
    return 0;
}

int cmd_bounds(const Options& opt) {
    const Json cfg = load_config(opt);
    const bl::Scenario sc = bl::scenario_from_json(cfg);
    const bl::ConcentrationParams p = params_from_config(cfg, sc);
    const Json& b = cfg.contains("bounds") ? cfg.at("bounds") : Json::object();
    const long k_max = b.value("k_max", 1000000L);

    const bl::Covering cov = covering_from_config(cfg, sc, p);
    bl::BoundReport rep;
    if (bounds_family(cfg, sc) == "countable") {
        const Eigen::MatrixXd mass = log_prior_mass(sc);
        rep = bl::countable_transient(p, cov, sc.model, &mass, k_max);
    } else {
        rep = bl::grid_transient(p, cov, k_max);
    }
    write_json(opt, "covering.json", bl::covering_to_json(cov));
    write_json(opt, "bounds.json", bl::bound_report_to_json(rep));

    const auto show = [](const std::optional<long>& v) {
        return v ? std::to_string(*v) : std::string("not reached within k_max");
    };
    opt.log(kInfo, "N1_min = " + show(rep.n1));
    opt.log(kInfo, "N2_min = " + show(rep.n2));
    opt.log(kInfo, "N = " + show(rep.horizon) +
                       "  (constants reported in log scale: log_gain = " +
                       std::to_string(rep.log_gain) + ")");
    return 0;
}

int cmd_covering(const Options& opt) {
    const Json cfg = load_config(opt);
    const bl::Scenario sc = bl::scenario_from_json(cfg);
    const bl::ConcentrationParams p = params_from_config(cfg, sc);
    const bl::Covering cov = covering_from_config(cfg, sc, p);
    Json j = bl::covering_to_json(cov);
    if (!cov.hellinger)
        j["series_check"] = bl::series_report_to_json(bl::covering_series_check(cov));
    write_json(opt, "covering.json", j);
    return 0;
}

int cmd_mc_verify(const Options& opt) {
    const Json cfg = load_config(opt);
    const bl::Scenario sc = bl::scenario_from_json(cfg);
    const bl::ConcentrationParams p = params_from_config(cfg, sc);
    const Json& mc = cfg.contains("mc") ? cfg.at("mc") : Json::object();

    const long trials = opt.trials ? *opt.trials : mc.value("trials", 1000L);
    if (trials < 1) throw bl::config_error("config: mc trials must be >= 1");
    const long k = mc.value("k", 50L);
    const std::uint64_t seed = opt.seed ? *opt.seed : sc.seed;

    std::vector<std::string> checks;
    if (mc.contains("checks"))
        checks = mc.at("checks").get<std::vector<std::string>>();
    else if (sc.space.kind == bl::HypothesisSpace::Kind::Grid)
        checks = {"cell_ratio"};
    else
        checks = {"tail", "evidence_gain"};

    Json report;
    std::vector<std::string> failures;
    const bl::CounterRng rng(seed);

    for (const std::string& check : checks) {
        if (check == "tail") {
            const bl::Covering cov = covering_from_config(cfg, sc, p);
            const bl::TailMcReport rep =
                bl::tail_bound_mc(sc.model, cov, k, trials, seed, opt.parallel);
            report["tail"] = bl::tail_mc_to_json(rep);
            if (!rep.check.pass) failures.push_back("tail");
        } else if (check == "evidence_gain") {
            std::vector<long> set;
            if (mc.contains("set"))
                set = mc.at("set").get<std::vector<long>>();
            else
                set = bl::kl_ball(sc.model, p.r);
            const Eigen::VectorXd mass =
                log_prior_mass(sc).row(0).transpose();
            const long reps = std::min<long>(trials, 64);
            double min_slack = std::numeric_limits<double>::infinity();
            bool pass = true;
            Json draws = Json::array();
            for (long trial = 0; trial < reps; ++trial) {
                const Eigen::MatrixXi history =
                    sample_history(sc.model, k, rng, trial);
                const bl::EvidenceGainReport rep = bl::evidence_gain_check(
                    sc.model, sc.weights, set, history, k, mass);
                min_slack = std::min(min_slack, rep.min_slack);
                pass = pass && rep.pass;
                if (trial == 0) draws.push_back(bl::evidence_gain_to_json(rep));
            }
            report["evidence_gain"] = {{"pass", pass},
                                       {"min_slack", min_slack},
                                       {"histories", reps},
                                       {"first_draw", draws}};
            if (!pass) failures.push_back("evidence_gain");
        } else if (check == "cell_ratio") {
            const bl::Covering cov = covering_from_config(cfg, sc, p);
            const std::string sampler_name =
                mc.value("sampler", std::string("truth_proxy"));
            bl::HistorySampler sampler;
            if (sampler_name == "truth_proxy")
                sampler = bl::HistorySampler::TruthProxy;
            else if (sampler_name == "ball_mixture")
                sampler = bl::HistorySampler::BallMixture;
            else
                throw bl::config_error("config: unknown sampler '" +
                                       sampler_name + "'");
            const Eigen::VectorXd mass = log_prior_mass(sc).row(0).transpose();
            const bl::CellRatioMcReport rep = bl::evidence_ratio_mc(
                sc.model, sc.weights, cov, p.R, p.d, k, trials, seed, mass,
                sampler, opt.parallel);
            report["cell_ratio"] = bl::cell_ratio_to_json(rep);
            if (!rep.pass) failures.push_back("cell_ratio");
        } else if (check == "concentration") {
            const int ball_index = mc.value("ball", 0);
            if (ball_index < 0 ||
                ball_index >= static_cast<int>(sc.balls.size()))
                throw bl::config_error(
                    "config: concentration check needs a tracked ball");
            const bl::BallSpec& ball = sc.balls[ball_index];
            long horizon = mc.value("horizon", sc.horizon);
            bool asserted = false;
            if (mc.value("use_bound_horizon", false)) {
                const bl::Covering cov = covering_from_config(cfg, sc, p);
                const Eigen::MatrixXd pm = log_prior_mass(sc);
                const bl::BoundReport bound = bl::countable_transient(
                    p, cov, sc.model, &pm,
                    cfg.value("bounds", Json::object()).value("k_max", 1000000L));
                if (!bound.horizon)
                    throw bl::config_error(
                        "config: bound horizon not reached within k_max");
                horizon = std::min<long>(*bound.horizon,
                                         mc.value("horizon_cap", 100000L));
                asserted = horizon == *bound.horizon;
            }
            const bl::ConcentrationMcReport rep = bl::concentration_mc(
                sc, ball, p.sigma, horizon, trials, seed, opt.parallel);
            Json rj = bl::concentration_mc_to_json(rep);
            rj["asserted"] = asserted;
            rj["rho"] = p.rho;
            if (asserted &&
                rep.failure_frequency > p.rho + 3.0 * rep.se) {
                rj["pass"] = false;
                failures.push_back("concentration");
            } else {
                rj["pass"] = true;
            }
            report["concentration"] = std::move(rj);
        } else {
            throw bl::config_error("config: unknown mc check '" + check + "'");
        }
    }

    report["trials"] = trials;
    report["seed"] = seed;
    report["pass"] = failures.empty();
    write_json(opt, "mc_report.json", report);
    if (!failures.empty()) {
        std::string list;
        for (const auto& f : failures) list += (list.empty() ? "" : ", ") + f;
        opt.log(kError, "verification failed: " + list);
        return 4;
    }
    opt.log(kInfo, "all verifications passed");
    return 0;
}

int cmd_validate(const Options& opt) {
    const Json cfg = load_config(opt);
    const bl::Scenario sc = bl::scenario_from_json(cfg);
    Json j;
    j["valid"] = true;
    j["n"] = sc.model.n;
    j["hypotheses"] = sc.model.num_hypotheses();
    j["alpha"] = bl::likelihood_floor(sc.model);
    j["epsilon"] = bl::prior_epsilon(sc);
    j["lambda_formula"] = sc.weights.lambda_formula;
    j["lambda_empirical"] = sc.weights.lambda_empirical;
    j["weights"] = bl::weight_report_to_json(
        bl::validate_weights(sc.weights, sc.graph));
    j["warnings"] = sc.warnings;
    std::cout << j.dump(2) << '\n';
    return 0;
}

Json demo_config() {
    return Json{
        {"graph", "ring(3)"},
        {"model",
         {{"localization",
           {{"positions", {{0.5, 0.75}, {3.25, 0.5}, {2.0, 3.5}}},
            {"grid",
             {{"bounds", {{0.0, 4.0}, {0.0, 4.0}}},
              {"points_per_axis", {9, 9}}}},
            {"theta_star", {2.0, 2.0}},
            {"noise", {{"offsets", {-0.3, 0.0, 0.3}}, {"probs", {0.25, 0.5, 0.25}}}},
            {"bin_width", 0.4},
            {"floor", 1e-3}}}}},
        {"priors", "uniform"},
        {"horizon", 400},
        {"seed", 7},
        {"sigma", 0.2},
        {"balls", Json::array({Json{{"name", "target"},
                                    {"kind", "hellinger"},
                                    {"radius", 0.25}}})},
        {"bounds",
         {{"family", "grid"},
          {"rho", 0.2},
          {"sigma", 0.2},
          {"r", 0.5},
          {"R", 0.25},
          {"k_max", 1000000}}}};
}

int cmd_localize_demo(const Options& opt) {
    Json cfg;
    if (opt.config.empty()) {
        cfg = demo_config();
        if (opt.seed) cfg["seed"] = *opt.seed;
        if (opt.horizon) cfg["horizon"] = *opt.horizon;
    } else {
        cfg = load_config(opt);
    }
    const bl::Scenario sc = bl::scenario_from_json(cfg);
    for (const auto& w : sc.warnings) opt.log(kWarn, "warning: " + w);

    write_json(opt, "localize_config.json", cfg);
    const bl::Trace trace = bl::run_scenario(sc, sc.seed, 0);
    std::filesystem::create_directories(opt.out);
    bl::atomic_write(join(opt.out, "trace.csv"), bl::trace_to_csv(trace));
    opt.log(kInfo, "wrote " + join(opt.out, "trace.csv"));
    write_json(opt, "summary.json", run_summary(cfg, sc, trace));

    const bl::ConcentrationParams p = params_from_config(cfg, sc);
    const bl::Covering cov = covering_from_config(cfg, sc, p);
    const bl::BoundReport rep = bl::grid_transient(
        p, cov, cfg.value("bounds", Json::object()).value("k_max", 1000000L));
    write_json(opt, "covering.json", bl::covering_to_json(cov));
    write_json(opt, "bounds.json", bl::bound_report_to_json(rep));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed non-Bayesian learning simulator and bound checker"};
    app.require_subcommand(1);

    Options opt;
    const auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", opt.config, "JSON config path");
        if (config_required) c->required();
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--seed", opt.seed, "root seed override");
        sub->add_option("--trials", opt.trials, "Monte Carlo trials override");
        sub->add_option("--horizon", opt.horizon, "horizon override");
        sub->add_option("--parallel", opt.parallel,
                        "worker threads (0 = all cores)");
        sub->add_flag("--quiet", opt.quiet, "suppress progress output");
    };

    CLI::App* run = app.add_subcommand("run", "simulate and write trace + summary");
    CLI::App* bounds = app.add_subcommand("bounds", "compute transient-time bounds");
    CLI::App* mc = app.add_subcommand("mc-verify", "Monte Carlo bound verification");
    CLI::App* covering = app.add_subcommand("covering", "build and report a covering");
    CLI::App* demo = app.add_subcommand("localize-demo",
                                        "source-localization demo scenario");
    CLI::App* validate = app.add_subcommand("validate", "validate a config");
    add_common(run, true);
    add_common(bounds, true);
    add_common(mc, true);
    add_common(covering, true);
    add_common(demo, false);
    add_common(validate, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(opt);
        if (app.got_subcommand(bounds)) return cmd_bounds(opt);
        if (app.got_subcommand(mc)) return cmd_mc_verify(opt);
        if (app.got_subcommand(covering)) return cmd_covering(opt);
        if (app.got_subcommand(demo)) return cmd_localize_demo(opt);
        if (app.got_subcommand(validate)) return cmd_validate(opt);
    } catch (const bl::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
