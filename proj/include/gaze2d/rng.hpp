#pragma once

#include <cstdint>
#include <random>

namespace gaze2d {

// splitmix64 mix, used to derive independent sub-stream seeds (per
// subject, per trial) from one top-level seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 1));
}

using Rng = std::mt19937_64;

}  // namespace gaze2d
