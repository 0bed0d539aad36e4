#pragma once

#include <functional>
#include <string>
#include <vector>

#include "belieflab/model.hpp"

namespace belieflab {

// One annulus of a covering.  Members satisfy
//   lower_radius < dist(theta_star, theta) <= upper_radius
// where dist is kl_rate for KL coverings and joint_hellinger for Hellinger
// coverings.  Hellinger bands additionally carry a delta-separated net and the
// assignment of each member to its nearest net point.
struct CoveringBand {
    double lower_radius = 0.0;
    double upper_radius = 0.0;
    std::vector<long> members;

    double delta = 0.0;          // net separation (Hellinger only)
    std::vector<long> net;       // hypothesis indices forming the net
    std::vector<int> cell_of;    // per member: position of its net point
};

struct Covering {
    bool hellinger = false;
    long center = 0;             // theta_star of the generating model
    std::vector<double> radii;   // as supplied
    double r = 0.0;              // target radius (Hellinger only)
    int L_r = 0;                 // 1-based first level with radii[l-1] <= r
    std::vector<CoveringBand> bands;
    std::vector<long> inner_ball;  // innermost ball members
    std::vector<long> overflow;    // KL only: rate beyond the last radius
    long truncation_level = 0;
    int dim = 0;
};

// Hypotheses with kl_rate(model, theta) <= radius.
std::vector<long> kl_ball(const LikelihoodModel& model, double radius);

// Partition of the hypothesis set by KL rate.  `radii` must be strictly
// increasing; band l collects rates in (radii[l-1], radii[l]], hypotheses
// beyond the last radius land in `overflow`.
Covering kl_covering(const LikelihoodModel& model,
                     const std::vector<double>& radii,
                     long truncation_level = 0);

// Radius ladder r, 2r, 3r, ... long enough that nothing overflows (levels = 0
// picks the length automatically from the largest finite rate).
std::vector<double> default_kl_radii(const LikelihoodModel& model, double r,
                                     int levels = 0);

// Convergence diagnostic for the covering tail series
//   sum_l exp(-r_l^2 + log N_l)
// evaluated from the band lower radii and cardinalities.  The verdict looks at
// the last `tail_levels` increments: all below `tol` and non-increasing means
// "converged", strictly growing means "diverging", anything else is
// "inconclusive".
struct SeriesReport {
    std::vector<double> increments;
    double partial_sum = 0.0;
    std::string verdict;  // "converged" | "inconclusive" | "diverging"
};

SeriesReport covering_series_check(const std::vector<double>& lower_radii,
                                   const std::vector<double>& counts,
                                   int tail_levels = 3, double tol = 1e-8);
SeriesReport covering_series_check(const Covering& cov, int tail_levels = 3,
                                   double tol = 1e-8);

// Greedy maximal delta-separated subset: scan `items` in order, keep an item
// iff it is at distance >= delta from everything kept so far.  The result is
// maximal: every rejected item sits within delta of some kept one.
std::vector<long> max_delta_separated(
    const std::vector<long>& items, double delta,
    const std::function<double(long, long)>& metric);

// Multiscale Hellinger covering of the exterior of the ball of radius `r`
// around theta_star.  `radii` must start at 1 and decrease strictly; bands run
// l = 1 .. L_r - 1 with members in (radii[l], radii[l-1]], each carrying a
// deltas[l-1]-separated net and nearest-net-point cells (ties resolved to the
// lowest net position).
Covering hellinger_covering(const LikelihoodModel& model,
                            const HypothesisSpace& space, double r,
                            const std::vector<double>& radii,
                            const std::vector<double>& deltas);

// Halving ladder 1, 1/2, 1/4, ... with `levels` entries.
std::vector<double> default_hellinger_radii(int levels);

// delta_l = (r_{l+1} - R) / 2, clamped positive; one entry per band.
std::vector<double> default_hellinger_deltas(const std::vector<double>& radii,
                                             int L_r, double R);

}  // namespace belieflab
