#pragma once

#include <cstdint>
#include <random>

namespace blueprint {

using Rng = std::mt19937_64;

/// Derives an independent seed for `stream` from a master seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Fixed stream ids so that components never share random sequences.
namespace streams {
inline constexpr std::uint64_t model_init = 1;
inline constexpr std::uint64_t env_reset = 100;      // + env index
inline constexpr std::uint64_t action_noise = 200;   // + env index
inline constexpr std::uint64_t minibatch = 300;
inline constexpr std::uint64_t analysis = 400;
inline constexpr std::uint64_t random_policy = 500;
inline constexpr std::uint64_t kmeans = 600;         // + restart index
}  // namespace streams

}  // namespace blueprint
