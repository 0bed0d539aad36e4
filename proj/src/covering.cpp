#include "belieflab/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace belieflab {

std::vector<long> kl_ball(const LikelihoodModel& model, double radius) {
    if (radius < 0.0) throw std::invalid_argument("kl_ball: negative radius");
    std::vector<long> members;
    for (long th = 0; th < model.num_hypotheses(); ++th)
        if (kl_rate(model, th) <= radius) members.push_back(th);
    return members;
}

namespace {

void require_strictly_increasing(const std::vector<double>& radii) {
    if (radii.empty()) throw std::invalid_argument("covering: no radii");
    for (size_t l = 0; l < radii.size(); ++l) {
        if (!(radii[l] > 0.0))
            throw std::invalid_argument("covering: radius " + std::to_string(l) +
                                        " not positive");
        if (l > 0 && !(radii[l] > radii[l - 1]))
            throw std::invalid_argument("covering: radii not strictly increasing");
    }
}

}  // namespace

Covering kl_covering(const LikelihoodModel& model,
                     const std::vector<double>& radii,
                     long truncation_level) {
    require_strictly_increasing(radii);

    Covering cov;
    cov.hellinger = false;
    cov.center = model.theta_star;
    cov.radii = radii;
    cov.truncation_level =
        truncation_level > 0 ? truncation_level : model.num_hypotheses();

    const size_t L = radii.size();
    cov.bands.resize(L >= 2 ? L - 1 : 0);
    for (size_t l = 0; l + 1 < L; ++l) {
        cov.bands[l].lower_radius = radii[l];
        cov.bands[l].upper_radius = radii[l + 1];
    }

    for (long th = 0; th < model.num_hypotheses(); ++th) {
        const double rate = kl_rate(model, th);
        if (rate <= radii.front()) {
            cov.inner_ball.push_back(th);
        } else if (rate > radii.back()) {
            cov.overflow.push_back(th);
        } else {
            // First band whose upper radius reaches the rate.
            const auto it = std::lower_bound(radii.begin() + 1, radii.end(), rate);
            cov.bands[it - radii.begin() - 1].members.push_back(th);
        }
    }
    return cov;
}

std::vector<double> default_kl_radii(const LikelihoodModel& model, double r,
                                     int levels) {
    if (!(r > 0.0)) throw std::invalid_argument("default_kl_radii: r <= 0");
    if (levels <= 0) {
        double max_rate = 0.0;
        for (long th = 0; th < model.num_hypotheses(); ++th)
            max_rate = std::max(max_rate, kl_rate(model, th));
        levels = std::max(2, static_cast<int>(std::ceil(max_rate / r)) + 1);
    }
    std::vector<double> radii(levels);
    for (int l = 0; l < levels; ++l) radii[l] = r * (l + 1);
    return radii;
}

SeriesReport covering_series_check(const std::vector<double>& lower_radii,
                                   const std::vector<double>& counts,
                                   int tail_levels, double tol) {
    if (lower_radii.size() != counts.size())
        throw std::invalid_argument("covering_series_check: size mismatch");
    if (tail_levels < 1)
        throw std::invalid_argument("covering_series_check: tail_levels < 1");

    SeriesReport rep;
    for (size_t l = 0; l < counts.size(); ++l) {
        const double inc =
            counts[l] <= 0.0
                ? 0.0
                : std::exp(-lower_radii[l] * lower_radii[l] + std::log(counts[l]));
        rep.increments.push_back(inc);
        rep.partial_sum += inc;
    }

    const size_t have = rep.increments.size();
    const size_t tail = std::min<size_t>(tail_levels, have);
    if (tail == 0) {
        rep.verdict = "converged";  // empty series
        return rep;
    }
    bool small_and_falling = true;
    bool growing = tail >= 2;
    for (size_t j = have - tail; j < have; ++j) {
        if (!(rep.increments[j] < tol)) small_and_falling = false;
        if (j > have - tail) {
            if (rep.increments[j] > rep.increments[j - 1]) small_and_falling = false;
            if (!(rep.increments[j] > rep.increments[j - 1])) growing = false;
        }
    }
    if (small_and_falling)
        rep.verdict = "converged";
    else if (growing)
        rep.verdict = "diverging";
    else
        rep.verdict = "inconclusive";
    return rep;
}

SeriesReport covering_series_check(const Covering& cov, int tail_levels,
                                   double tol) {
    std::vector<double> radii, counts;
    for (const auto& b : cov.bands) {
        radii.push_back(b.lower_radius);
        counts.push_back(static_cast<double>(b.members.size()));
    }
    if (!cov.overflow.empty() && !cov.radii.empty()) {
        radii.push_back(cov.radii.back());
        counts.push_back(static_cast<double>(cov.overflow.size()));
    }
    return covering_series_check(radii, counts, tail_levels, tol);
}

std::vector<long> max_delta_separated(
    const std::vector<long>& items, double delta,
    const std::function<double(long, long)>& metric) {
    if (!(delta > 0.0))
        throw std::invalid_argument("max_delta_separated: delta <= 0");
    std::vector<long> kept;
    for (long item : items) {
        bool separated = true;
        for (long k : kept)
            if (metric(item, k) < delta) {
                separated = false;
                break;
            }
        if (separated) kept.push_back(item);
    }
    return kept;
}

Covering hellinger_covering(const LikelihoodModel& model,
                            const HypothesisSpace& space, double r,
                            const std::vector<double>& radii,
                            const std::vector<double>& deltas) {
    if (radii.empty() || radii.front() != 1.0)
        throw std::invalid_argument("hellinger_covering: radii must start at 1");
    for (size_t l = 1; l < radii.size(); ++l)
        if (!(radii[l] < radii[l - 1] && radii[l] > 0.0))
            throw std::invalid_argument(
                "hellinger_covering: radii not strictly decreasing and positive");
    if (!(r > 0.0) || r >= 1.0)
        throw std::invalid_argument("hellinger_covering: need 0 < r < 1");
    if (space.size != model.num_hypotheses())
        throw std::invalid_argument("hellinger_covering: space/model size mismatch");

    int L_r = 0;  // 1-based
    for (size_t l = 0; l < radii.size(); ++l)
        if (radii[l] <= r) {
            L_r = static_cast<int>(l) + 1;
            break;
        }
    if (L_r == 0)
        throw std::invalid_argument(
            "hellinger_covering: no radius at or below the target radius");
    if (static_cast<int>(deltas.size()) < L_r - 1)
        throw std::invalid_argument("hellinger_covering: need a delta per band");

    Covering cov;
    cov.hellinger = true;
    cov.center = model.theta_star;
    cov.radii = radii;
    cov.r = r;
    cov.L_r = L_r;
    cov.truncation_level = space.size;
    cov.dim = space.dim;

    Eigen::VectorXd dist(space.size);
    for (long th = 0; th < space.size; ++th)
        dist[th] = joint_hellinger(model, model.theta_star, th);

    cov.bands.resize(L_r - 1);
    for (int l = 0; l < L_r - 1; ++l) {
        auto& band = cov.bands[l];
        band.upper_radius = radii[l];
        band.lower_radius = radii[l + 1];
        band.delta = deltas[l];
        if (!(band.delta > 0.0))
            throw std::invalid_argument("hellinger_covering: delta for band " +
                                        std::to_string(l + 1) + " not positive");
        for (long th = 0; th < space.size; ++th)
            if (dist[th] > band.lower_radius && dist[th] <= band.upper_radius)
                band.members.push_back(th);

        const auto metric = [&](long a, long b) {
            return joint_hellinger(model, a, b);
        };
        band.net = max_delta_separated(band.members, band.delta, metric);

        band.cell_of.resize(band.members.size());
        for (size_t m = 0; m < band.members.size(); ++m) {
            int best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (size_t p = 0; p < band.net.size(); ++p) {
                const double d = metric(band.members[m], band.net[p]);
                if (d < best_dist) {  // strict: ties stay with lowest index
                    best_dist = d;
                    best = static_cast<int>(p);
                }
            }
            band.cell_of[m] = best;
        }
    }

    const double inner = radii[L_r - 1];
    for (long th = 0; th < space.size; ++th)
        if (dist[th] <= inner) cov.inner_ball.push_back(th);
    return cov;
}

std::vector<double> default_hellinger_radii(int levels) {
    if (levels < 1) throw std::invalid_argument("default_hellinger_radii: levels < 1");
    std::vector<double> radii(levels);
    for (int l = 0; l < levels; ++l) radii[l] = std::ldexp(1.0, -l);
    return radii;
}

std::vector<double> default_hellinger_deltas(const std::vector<double>& radii,
                                             int L_r, double R) {
    if (L_r < 1 || L_r > static_cast<int>(radii.size()))
        throw std::invalid_argument("default_hellinger_deltas: bad L_r");
    std::vector<double> deltas;
    for (int l = 0; l < L_r - 1; ++l)
        deltas.push_back(std::max((radii[l + 1] - R) / 2.0, 1e-9));
    return deltas;
}

}  // namespace belieflab
