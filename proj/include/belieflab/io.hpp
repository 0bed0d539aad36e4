#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "belieflab/bounds.hpp"
#include "belieflab/covering.hpp"
#include "belieflab/network.hpp"
#include "belieflab/scenario.hpp"

namespace belieflab {

using Json = nlohmann::json;

// Anything wrong with a config file: unreadable, unparsable, missing or
// ill-typed fields.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

std::string read_file(const std::string& path);

// Writes to a temporary sibling and renames, so partial output never lands
// under the final name.
void atomic_write(const std::string& path, const std::string& content);

Json parse_json(const std::string& text, const std::string& origin);

// Model layout: {n, alphabets[], theta_star, tables[i][theta][s]}.
Json model_to_json(const LikelihoodModel& model);
LikelihoodModel model_from_json(const Json& j);

// Space layout: {kind, size, truncation_level} or
// {kind: "grid", d, bounds: [[lo, hi]...], points_per_axis[]}.
Json space_to_json(const HypothesisSpace& space);
HypothesisSpace space_from_json(const Json& j);

Graph graph_from_json(const Json& j);
BallSpec ball_from_json(const Json& j);
LocalizationConfig localization_from_json(const Json& j);

// Full scenario config: graph generator/spec, inline model or localization
// generator, priors ("uniform" or explicit masses), horizon, balls, seed,
// optional explicit weights.
Scenario scenario_from_json(const Json& cfg);

Json weight_report_to_json(const WeightReport& rep);
Json consensus_report_to_json(const ConsensusBoundReport& rep);
Json series_report_to_json(const SeriesReport& rep);
Json covering_to_json(const Covering& cov);
Json bound_report_to_json(const BoundReport& rep);
Json mc_check_to_json(const McCheck& c);
Json tail_mc_to_json(const TailMcReport& rep);
Json evidence_gain_to_json(const EvidenceGainReport& rep);
Json cell_ratio_to_json(const CellRatioMcReport& rep);
Json concentration_mc_to_json(const ConcentrationMcReport& rep);
Json rate_slope_to_json(const RateSlopeReport& rep);

// CSV rows: kind,k,agent,theta_index,value.  Belief rows carry linear-scale
// beliefs at the snapshot steps; consensus_gap and mass_in_ball rows cover
// every step (theta_index of a mass row is the ball position).
std::string trace_to_csv(const Trace& trace);

}  // namespace belieflab
