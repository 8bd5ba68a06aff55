#pragma once

#include <cmath>
#include <cstdint>

namespace oectsim {

// Deterministic random stream built on splitmix64. Streams are forked by
// index from a parent, so the draw sequence of any (seed, indices...) path
// is fixed regardless of evaluation order across devices or threads.
//
// Normal deviates use Box-Muller without caching the spare value, so a
// stream's state depends only on how many draws were taken from it.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : state_(scramble(seed)) {}

    // Derives an independent child stream. Pure: does not advance *this.
    [[nodiscard]] RngStream fork(std::uint64_t index) const {
        return RngStream(state_ ^ scramble(0x9e3779b97f4a7c15ULL * (index + 1) + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return scramble(state_);
    }

    // Uniform on (0, 1]: never returns 0, safe for log().
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
        return mean + stddev * z;
    }

  private:
    static std::uint64_t scramble(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace oectsim
