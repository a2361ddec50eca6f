#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace jumpact {

using Engine = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a path of indices, e.g.
/// (master, cell, replication, component). Distinct paths give unrelated
/// streams; the same path always gives the same stream.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (auto id : path) h = mix64(h ^ mix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

inline Engine make_engine(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path = {}) {
  const std::uint64_t s = derive_seed(master, path);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32)};
  return Engine(seq);
}

// Open interval (0,1).
inline double uniform_open(Engine& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 64>(rng);
    if (u > 0.0 && u < 1.0) return u;
  }
}

}  // namespace jumpact
