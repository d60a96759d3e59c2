#pragma once

#include <cstdint>
#include <random>

namespace fsv {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class StreamTag : std::uint64_t { initial_variance = 1, gaussian = 2, orthogonal = 3, bootstrap = 4, misc = 5 };

// Independent generator for one (path, component, purpose) triple. Results do
// not depend on how paths are batched or distributed over threads.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t path, std::uint64_t component, StreamTag tag) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ path);
  h = splitmix64(h ^ (component * 0x100000001b3ULL));
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace fsv
