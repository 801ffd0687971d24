// Copyright 2026 The flipnerf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace flipnerf {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so results never depend on call order or threads.
struct CounterRng {
  std::uint64_t seed = 0;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    return mix(mix(mix(seed) ^ stream) ^ counter);
  }

  /// Uniform in [0, 1).
  constexpr double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) by rejection-free multiply-shift.
  std::uint64_t below(std::uint64_t stream, std::uint64_t counter, std::uint64_t n) const {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits(stream, counter)) * n) >> 64);
  }
};

// Stream identifiers keep unrelated draws apart.
enum RngStream : std::uint64_t {
  kStreamJitter = 1,
  kStreamShuffle = 2,
  kStreamPoseNoise = 3,
  kStreamInit = 4,
};

}  // namespace flipnerf
