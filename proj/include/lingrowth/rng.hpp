#pragma once

// Counter-based random streams. Every random quantity in the library is keyed
// by (seed, tag, time index, site[, event index]) so that it can be
// re-materialized in any order and any window with identical bits.

#include <cmath>
#include <cstdint>

#include "lingrowth/core.hpp"

namespace lingrowth::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Tag : std::uint64_t {
  kKernelUnit = 0x4b55,
  kCtClock = 0x434c,
  kCtJump = 0x434b,
  kReplica = 0x5250,
  kMonteCarlo = 0x4d43,
};

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t key(std::uint64_t seed, Tag tag, std::int64_t index, const Site& site,
                         std::int64_t sub = 0) {
  std::uint64_t h = mix64(seed ^ static_cast<std::uint64_t>(tag));
  h = combine(h, static_cast<std::uint64_t>(index));
  h = combine(h, static_cast<std::uint64_t>(site.dim()));
  for (int i = 0; i < site.dim(); ++i) {
    h = combine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(site[i])));
  }
  return combine(h, static_cast<std::uint64_t>(sub));
}

/// Seed of replica `index` under a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return combine(mix64(master ^ static_cast<std::uint64_t>(Tag::kReplica)), index);
}

/// splitmix64 sequence started from a key.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  int below(int n) { return static_cast<int>(uniform() * n); }
  /// Mean-one exponential.
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::uint64_t state_;
};

}  // namespace lingrowth::rng
