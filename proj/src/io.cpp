#include "belieflab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace belieflab {

namespace {

const Json& need(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw config_error(std::string("config: missing field '") + key + "'");
    return j.at(key);
}

template <typename T>
T need_as(const Json& j, const char* key) {
    try {
        return need(j, key).get<T>();
    } catch (const Json::exception& e) {
        throw config_error(std::string("config: field '") + key + "': " +
                           e.what());
    }
}

Eigen::VectorXd vector_from_json(const Json& j, const char* key) {
    const std::vector<double> v = need_as<std::vector<double>>(j, key);
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<long>(v.size()));
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json optional_long_to_json(const std::optional<long>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("short write: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
    }
}

Json parse_json(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw config_error(origin + ": " + e.what());
    }
}

Json model_to_json(const LikelihoodModel& model) {
    Json j;
    j["n"] = model.n;
    j["alphabets"] = model.alphabets;
    j["theta_star"] = model.theta_star;
    Json tables = Json::array();
    for (const auto& t : model.tables) {
        Json rows = Json::array();
        for (long th = 0; th < t.rows(); ++th) {
            Json row = Json::array();
            for (long s = 0; s < t.cols(); ++s) row.push_back(t(th, s));
            rows.push_back(std::move(row));
        }
        tables.push_back(std::move(rows));
    }
    j["tables"] = std::move(tables);
    return j;
}

LikelihoodModel model_from_json(const Json& j) {
    LikelihoodModel model;
    model.n = need_as<int>(j, "n");
    model.alphabets = need_as<std::vector<int>>(j, "alphabets");
    model.theta_star = need_as<long>(j, "theta_star");
    const Json& tables = need(j, "tables");
    if (!tables.is_array() || static_cast<int>(tables.size()) != model.n)
        throw config_error("config: 'tables' must hold one table per agent");
    for (int i = 0; i < model.n; ++i) {
        const auto rows = tables.at(i).get<std::vector<std::vector<double>>>();
        if (rows.empty()) throw config_error("config: empty likelihood table");
        Eigen::MatrixXd t(rows.size(), rows.front().size());
        for (size_t th = 0; th < rows.size(); ++th) {
            if (static_cast<long>(rows[th].size()) != t.cols())
                throw config_error("config: ragged likelihood table");
            for (size_t s = 0; s < rows[th].size(); ++s)
                t(th, s) = rows[th][s];
        }
        model.tables.push_back(std::move(t));
    }
    validate_model(model);
    return model;
}

Json space_to_json(const HypothesisSpace& space) {
    Json j;
    switch (space.kind) {
        case HypothesisSpace::Kind::Finite:
            j["kind"] = "finite";
            j["size"] = space.size;
            break;
        case HypothesisSpace::Kind::CountableTruncated:
            j["kind"] = "countable";
            j["size"] = space.size;
            j["truncation_level"] = space.truncation_level;
            break;
        case HypothesisSpace::Kind::Grid: {
            j["kind"] = "grid";
            j["d"] = space.dim;
            Json bounds = Json::array();
            for (int a = 0; a < space.dim; ++a)
                bounds.push_back({space.lo[a], space.hi[a]});
            j["bounds"] = std::move(bounds);
            j["points_per_axis"] = space.points_per_axis;
            break;
        }
    }
    return j;
}

HypothesisSpace space_from_json(const Json& j) {
    const std::string kind = need_as<std::string>(j, "kind");
    if (kind == "finite") return finite_space(need_as<long>(j, "size"));
    if (kind == "countable")
        return countable_space(need_as<long>(j, "size"),
                               need_as<long>(j, "truncation_level"));
    if (kind == "grid") {
        const auto bounds =
            need_as<std::vector<std::vector<double>>>(j, "bounds");
        const auto per_axis = need_as<std::vector<int>>(j, "points_per_axis");
        if (bounds.size() != per_axis.size())
            throw config_error("config: grid bounds/points_per_axis mismatch");
        Eigen::VectorXd lo(bounds.size()), hi(bounds.size());
        for (size_t a = 0; a < bounds.size(); ++a) {
            if (bounds[a].size() != 2)
                throw config_error("config: grid bounds need [lo, hi] pairs");
            lo[a] = bounds[a][0];
            hi[a] = bounds[a][1];
        }
        return grid_space(lo, hi, per_axis);
    }
    throw config_error("config: unknown space kind '" + kind + "'");
}

Graph graph_from_json(const Json& j) {
    if (j.is_string()) return graph_from_generator(j.get<std::string>());
    const int n = need_as<int>(j, "n");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : need_as<std::vector<std::vector<int>>>(j, "edges")) {
        if (e.size() != 2) throw config_error("config: edges need [u, v] pairs");
        edges.emplace_back(e[0], e[1]);
    }
    return make_graph(n, std::move(edges));
}

BallSpec ball_from_json(const Json& j) {
    BallSpec spec;
    spec.name = j.value("name", std::string());
    const std::string kind = need_as<std::string>(j, "kind");
    if (kind == "kl_rate") {
        spec.kind = BallKind::KlRate;
        spec.radius = need_as<double>(j, "radius");
    } else if (kind == "hellinger") {
        spec.kind = BallKind::Hellinger;
        spec.radius = need_as<double>(j, "radius");
    } else if (kind == "indices") {
        spec.kind = BallKind::Indices;
        spec.indices = need_as<std::vector<long>>(j, "indices");
    } else {
        throw config_error("config: unknown ball kind '" + kind + "'");
    }
    if (spec.name.empty()) spec.name = kind;
    return spec;
}

LocalizationConfig localization_from_json(const Json& j) {
    LocalizationConfig cfg;
    const auto pos = need_as<std::vector<std::vector<double>>>(j, "positions");
    if (pos.empty()) throw config_error("config: localization needs positions");
    cfg.positions.resize(pos.size(), pos.front().size());
    for (size_t i = 0; i < pos.size(); ++i) {
        if (pos[i].size() != static_cast<size_t>(cfg.positions.cols()))
            throw config_error("config: ragged positions");
        for (size_t a = 0; a < pos[i].size(); ++a)
            cfg.positions(i, a) = pos[i][a];
    }
    const Json& grid = need(j, "grid");
    const auto bounds = need_as<std::vector<std::vector<double>>>(grid, "bounds");
    const auto per_axis = need_as<std::vector<int>>(grid, "points_per_axis");
    if (bounds.size() != per_axis.size())
        throw config_error("config: grid bounds/points_per_axis mismatch");
    cfg.grid_lo.resize(bounds.size());
    cfg.grid_hi.resize(bounds.size());
    for (size_t a = 0; a < bounds.size(); ++a) {
        if (bounds[a].size() != 2)
            throw config_error("config: grid bounds need [lo, hi] pairs");
        cfg.grid_lo[a] = bounds[a][0];
        cfg.grid_hi[a] = bounds[a][1];
    }
    cfg.points_per_axis.assign(per_axis.begin(), per_axis.end());
    cfg.theta_star = vector_from_json(j, "theta_star");
    const Json& noise = need(j, "noise");
    cfg.noise_offsets = vector_from_json(noise, "offsets");
    cfg.noise_probs = vector_from_json(noise, "probs");
    cfg.bin_width = need_as<double>(j, "bin_width");
    cfg.floor = j.value("floor", 1e-4);
    return cfg;
}

Scenario scenario_from_json(const Json& cfg) {
    if (!cfg.is_object()) throw config_error("config: top level must be an object");
    Scenario sc;
    sc.horizon = cfg.value("horizon", 0L);
    sc.seed = cfg.value("seed", std::uint64_t{0});

    const Json& model = need(cfg, "model");
    if (model.contains("localization")) {
        LocalizationConfig lc = localization_from_json(model.at("localization"));
        lc.horizon = sc.horizon;
        const Graph g = graph_from_json(need(cfg, "graph"));
        const std::uint64_t seed = sc.seed;
        sc = build_localization(lc, g);
        sc.seed = seed;
    } else {
        sc.graph = graph_from_json(need(cfg, "graph"));
        sc.model = model_from_json(model);
        sc.space = cfg.contains("space")
                       ? space_from_json(cfg.at("space"))
                       : finite_space(sc.model.num_hypotheses());
        sc.weights = lazy_metropolis(sc.graph);
    }

    if (cfg.contains("weights")) {
        const auto rows =
            cfg.at("weights").get<std::vector<std::vector<double>>>();
        Eigen::MatrixXd a(rows.size(), rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size())
                throw config_error("config: weights must be square");
            for (size_t k = 0; k < rows[i].size(); ++k) a(i, k) = rows[i][k];
        }
        sc.weights = make_weight_matrix(std::move(a));
    }

    const Json priors = cfg.value("priors", Json("uniform"));
    if (priors.is_string()) {
        if (priors.get<std::string>() != "uniform")
            throw config_error("config: priors must be \"uniform\" or a matrix");
        sc.log_prior = uniform_beliefs(sc.model.n, sc.space).log_beliefs;
    } else {
        const auto rows = priors.get<std::vector<std::vector<double>>>();
        if (static_cast<int>(rows.size()) != sc.model.n)
            throw config_error("config: priors need one row per agent");
        const Eigen::VectorXd log_w = sc.space.log_weights();
        sc.log_prior.resize(sc.model.n, sc.model.num_hypotheses());
        for (int i = 0; i < sc.model.n; ++i) {
            if (static_cast<long>(rows[i].size()) != sc.model.num_hypotheses())
                throw config_error("config: prior row length mismatch");
            for (long th = 0; th < sc.model.num_hypotheses(); ++th) {
                if (!(rows[i][th] > 0.0))
                    throw config_error(
                        "config: priors must be strictly positive");
                sc.log_prior(i, th) = std::log(rows[i][th]) - log_w[th];
            }
        }
    }

    if (cfg.contains("balls"))
        for (const auto& b : cfg.at("balls")) sc.balls.push_back(ball_from_json(b));

    try {
        validate_scenario(sc);
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return sc;
}

Json weight_report_to_json(const WeightReport& rep) {
    Json j;
    j["pass"] = rep.pass;
    Json conditions = Json::array();
    for (const auto& c : rep.conditions) {
        Json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        if (!c.witness.empty()) cj["witness"] = c.witness;
        conditions.push_back(std::move(cj));
    }
    j["conditions"] = std::move(conditions);
    return j;
}

Json consensus_report_to_json(const ConsensusBoundReport& rep) {
    Json j;
    j["pass"] = rep.pass;
    j["bound_formula"] = rep.bound_formula;
    j["bound_empirical"] = rep.bound_empirical;
    j["max_deviation"] = rep.max_deviation;
    j["max_ratio_formula"] = rep.max_ratio_formula;
    j["max_ratio_empirical"] = rep.max_ratio_empirical;
    return j;
}

Json series_report_to_json(const SeriesReport& rep) {
    Json j;
    j["increments"] = rep.increments;
    j["partial_sum"] = rep.partial_sum;
    j["verdict"] = rep.verdict;
    j["heuristic"] = true;
    return j;
}

Json covering_to_json(const Covering& cov) {
    Json j;
    j["family"] = cov.hellinger ? "hellinger" : "kl";
    j["center"] = cov.center;
    j["radii"] = cov.radii;
    if (cov.hellinger) {
        j["r"] = cov.r;
        j["L_r"] = cov.L_r;
    }
    j["truncation_level"] = cov.truncation_level;
    j["inner_ball_size"] = cov.inner_ball.size();
    Json bands = Json::array();
    for (const auto& b : cov.bands) {
        Json bj;
        bj["lower_radius"] = b.lower_radius;
        bj["upper_radius"] = b.upper_radius;
        bj["count"] = b.members.size();
        if (cov.hellinger) {
            bj["delta"] = b.delta;
            bj["net_size"] = b.net.size();
        }
        bands.push_back(std::move(bj));
    }
    j["bands"] = std::move(bands);
    if (!cov.hellinger) j["overflow_count"] = cov.overflow.size();
    return j;
}

Json bound_report_to_json(const BoundReport& rep) {
    Json j;
    j["family"] = rep.family;
    j["log_scale_constants"] = true;
    j["log_tail_prefactor"] = rep.log_tail_prefactor;
    j["log_gain"] = rep.log_gain;
    j["N1_min"] = optional_long_to_json(rep.n1);
    j["N2_min"] = optional_long_to_json(rep.n2);
    j["N"] = optional_long_to_json(rep.horizon);
    j["reached_within_k_max"] = rep.horizon.has_value();
    if (rep.family == "countable") {
        j["N2_bandwise"] = optional_long_to_json(rep.n2_bandwise);
        j["N2_source"] = rep.n2_source;
    }
    j["n1_residual_log"] = rep.n1_residual_log;
    j["n2_residual_log"] = rep.n2_residual_log;
    j["k_max"] = rep.k_max;
    j["r"] = rep.r;
    if (rep.family == "grid") {
        j["R"] = rep.R;
        j["d"] = rep.d;
    }
    j["truncation_level"] = rep.truncation_level;
    Json bands = Json::array();
    for (const auto& b : rep.bands) {
        Json bj;
        bj["lower_radius"] = b.lower_radius;
        bj["upper_radius"] = b.upper_radius;
        bj["count"] = b.count;
        bj["overflow"] = b.overflow;
        if (rep.family == "grid") {
            bj["delta"] = b.delta;
            bj["net_size"] = b.net_size;
        }
        bj["log_tail_term_at_horizon"] = b.log_tail_term_at_horizon;
        bj["required_k"] = optional_long_to_json(b.required_k);
        bands.push_back(std::move(bj));
    }
    j["bands"] = std::move(bands);
    j["notes"] = rep.notes;
    return j;
}

Json mc_check_to_json(const McCheck& c) {
    Json j;
    j["frequency"] = c.frequency;
    j["bound"] = c.bound;
    j["se"] = c.se;
    j["hits"] = c.hits;
    j["trials"] = c.trials;
    j["vacuous"] = c.vacuous;
    j["pass"] = c.pass;
    return j;
}

Json tail_mc_to_json(const TailMcReport& rep) {
    Json j = mc_check_to_json(rep.check);
    j["log_bound"] = rep.log_bound;
    j["k"] = rep.k;
    return j;
}

Json evidence_gain_to_json(const EvidenceGainReport& rep) {
    Json j;
    j["pass"] = rep.pass;
    j["log_gain"] = rep.log_gain;
    j["min_slack"] = rep.min_slack;
    j["slack"] = rep.slack;
    return j;
}

Json cell_ratio_to_json(const CellRatioMcReport& rep) {
    Json j;
    j["pass"] = rep.pass;
    j["k"] = rep.k;
    j["sampler_note"] = rep.sampler_note;
    Json cells = Json::array();
    for (const auto& c : rep.cells) {
        Json cj = mc_check_to_json(c.check);
        cj["band"] = c.band;
        cj["cell"] = c.cell;
        cj["agent"] = c.agent;
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    return j;
}

Json concentration_mc_to_json(const ConcentrationMcReport& rep) {
    Json j;
    j["k"] = rep.k;
    j["sigma"] = rep.sigma;
    j["trials"] = rep.trials;
    j["failures"] = rep.failures;
    j["failure_frequency"] = rep.failure_frequency;
    j["se"] = rep.se;
    return j;
}

Json rate_slope_to_json(const RateSlopeReport& rep) {
    Json j;
    j["slope"] = rep.slope;
    j["per_agent"] =
        std::vector<double>(rep.per_agent.data(),
                            rep.per_agent.data() + rep.per_agent.size());
    j["used_k_min"] = rep.used_k_min;
    j["used_k_max"] = rep.used_k_max;
    j["shrunk"] = rep.shrunk;
    return j;
}

std::string trace_to_csv(const Trace& trace) {
    std::ostringstream out;
    out << "kind,k,agent,theta_index,value\n";
    for (size_t s = 0; s < trace.snapshot_steps.size(); ++s) {
        const long k = trace.snapshot_steps[s];
        const Eigen::MatrixXd& snap = trace.snapshots[s];
        for (long i = 0; i < snap.rows(); ++i)
            for (long th = 0; th < snap.cols(); ++th)
                out << "belief," << k << ',' << i << ',' << th << ','
                    << format_value(std::exp(snap(i, th))) << '\n';
    }
    for (long k = 0; k <= trace.horizon; ++k)
        out << "consensus_gap," << k << ",-1,-1,"
            << format_value(trace.consensus_gaps[k]) << '\n';
    for (size_t b = 0; b < trace.ball_masses.size(); ++b)
        for (long k = 0; k <= trace.horizon; ++k)
            for (long i = 0; i < trace.ball_masses[b].cols(); ++i)
                out << "mass_in_ball," << k << ',' << i << ',' << b << ','
                    << format_value(trace.ball_masses[b](k, i)) << '\n';
    return out.str();
}

}  // namespace belieflab
