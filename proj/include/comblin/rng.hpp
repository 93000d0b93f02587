#pragma once

#include <cstdint>
#include <random>

namespace comblin {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent random streams used inside one Monte-Carlo run.
enum class Stream : std::uint64_t {
  kEnvironment = 0,
  kWeights = 1,
  kAgent = 2,
  kOracle = 3,
};

// seed = splitmix64(splitmix64(splitmix64(base) ^ run) ^ stream).
// Depends only on its arguments, so runs can be scheduled in any order.
constexpr std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t run_index,
                                 Stream stream) {
  return splitmix64(splitmix64(splitmix64(base_seed) ^ run_index) ^
                    static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t base_seed, std::uint64_t run_index, Stream stream) {
  return Rng(mix_seed(base_seed, run_index, stream));
}

}  // namespace comblin
