#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

namespace belieflab {

// Counter-based random stream.  Every draw is a pure hash of
// (root seed, trial, agent, step), so simulations are bit-identical no matter
// how trials are scheduled across threads.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t root_seed) : root_(root_seed) {}

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t bits(std::uint64_t trial, std::uint64_t agent,
                       std::uint64_t step) const {
        std::uint64_t h = mix(root_ ^ 0x8f1bbcdcbfa53e0bULL);
        h = mix(h ^ trial);
        h = mix(h ^ agent);
        h = mix(h ^ step);
        return h;
    }

    // Uniform draw in [0, 1) with 53 significant bits.
    double uniform(std::uint64_t trial, std::uint64_t agent,
                   std::uint64_t step) const {
        return static_cast<double>(bits(trial, agent, step) >> 11) * 0x1.0p-53;
    }

    std::uint64_t root() const { return root_; }

  private:
    std::uint64_t root_;
};

// Inverse-CDF draw from a finite distribution.  `cdf` holds cumulative sums of
// the probability vector; the last entry is forced to act as 1.
inline int sample_discrete(const Eigen::Ref<const Eigen::VectorXd>& cdf,
                           double u) {
    if (cdf.size() == 0) throw std::invalid_argument("sample_discrete: empty cdf");
    for (Eigen::Index i = 0; i + 1 < cdf.size(); ++i)
        if (u < cdf[i]) return static_cast<int>(i);
    return static_cast<int>(cdf.size() - 1);
}

}  // namespace belieflab
