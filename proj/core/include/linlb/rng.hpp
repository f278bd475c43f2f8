#pragma once

#include <cstdint>
#include <random>

namespace linlb {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent, reproducible sub-streams
// (per seed, per cell, per level) from one user-facing seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

inline Rng make_rng(std::uint64_t base, std::uint64_t stream = 0) {
  return Rng(mix_seed(base, stream));
}

}  // namespace linlb
