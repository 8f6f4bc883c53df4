// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#ifndef THZ360_COMMON_HPP
#define THZ360_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace thz360 {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// Wrap an angle to (-pi, pi].
inline double wrap_pi(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    if (a > kPi) a -= kTwoPi;
    return a;
}

/// Wrap an angle to [0, 2*pi).
inline double wrap_two_pi(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// [z]^+ = max(0, z)
inline double pos_part(double z) { return z > 0.0 ? z : 0.0; }
inline long pos_part(long z) { return z > 0 ? z : 0; }
inline int pos_part(int z) { return z > 0 ? z : 0; }

/// Derive an independent sub-seed from a master seed and a stream tag.
/// Splitmix64 finalizer; stable across platforms.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

}  // namespace thz360

#endif  // THZ360_COMMON_HPP
