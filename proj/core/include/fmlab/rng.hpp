#pragma once

#include <cmath>
#include <cstdint>

namespace fmlab::rng {

/// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream. Stream `index` under a master seed is
/// statistically independent of every other index, so per-particle
/// substreams give results that do not depend on scheduling: particle i
/// always consumes exactly its own stream.
class Substream {
public:
    Substream(std::uint64_t master_seed, std::uint64_t index)
        : state_(mix64(master_seed + 0x9e3779b97f4a7c15ULL) ^
                 mix64((index + 1) * 0xd1342543de82ef95ULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform double in the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fmlab::rng
