// Copyright 2026 The Ventrate Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VENTRATE_SEEDS_H_
#define VENTRATE_SEEDS_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace ventrate {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20240917;

// Sub-seeds are pure functions of (parent seed, purpose), so results do not
// depend on evaluation order.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view label);

// Uniform double in [0, 1) from the top 53 bits.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fair coin from the top bit.
inline bool CoinFlip(Rng& rng) { return (rng() >> 63) != 0; }

// Uniform integer in [lo, hi] by rejection, independent of the standard
// library's distribution implementation.
std::int64_t UniformInt(Rng& rng, std::int64_t lo, std::int64_t hi);

}  // namespace ventrate

#endif  // VENTRATE_SEEDS_H_
