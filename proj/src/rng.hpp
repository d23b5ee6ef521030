#pragma once

#include <cstdint>

namespace fpt {

// Counter-based pseudorandom generator. Output k of a stream is a fixed
// 64-bit mix of (seed, k), so a stream can be replayed bit for bit from its
// seed alone and never carries hidden state beyond the counter.
//
// Splitting rule (used by the harness to derive sub-streams): split(tag)
// seeds a fresh stream with mix(seed ^ mix(tag)), which keeps parent and
// child streams decorrelated regardless of how far the parent has advanced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return mix(seed_ + kGamma * ++counter_); }

  // Uniform double strictly inside (0, 1).
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal via Box-Muller; consumes two draws per pair and caches
  // the second.
  double gaussian();

  int sign() { return (next_u64() & 1) ? 1 : -1; }

  Rng split(std::uint64_t tag) const {
    return Rng(mix(seed_ ^ mix(tag + kGamma)));
  }

  static std::uint64_t mix(std::uint64_t x);

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool have_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

}  // namespace fpt
