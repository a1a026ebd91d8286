#pragma once

#include <cstdint>
#include <random>

namespace factorcop {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive disjoint stream seeds so that
// replicate k's stream depends only on (base_seed, k), never on execution
// order or thread count.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t base_seed, std::uint64_t stream_index) {
  return Rng(mix64(mix64(base_seed) ^ mix64(stream_index * 0xd1342543de82ef95ull + 1)));
}

// Uniform draw in the open interval (0,1).
inline double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u;
  do { u = dist(rng); } while (u <= 0.0 || u >= 1.0);
  return u;
}

inline double std_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace factorcop
