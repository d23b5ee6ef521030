#pragma once

#include "rng.hpp"

namespace fpt::dist {

// Distribution on (a, b) with density C_{a,b} / sqrt(p(1-p)). Sampling maps a
// uniform angle through sin^2, which is exact and handles the endpoint
// singularities without rejection.
class ArcsineInterval {
 public:
  // Requires 0 <= a < b <= 1; throws std::invalid_argument otherwise.
  ArcsineInterval(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }

  // C_{a,b} = 1 / (2 asin(sqrt(b)) - 2 asin(sqrt(a))); equals 1/pi for (0,1).
  double normalizer() const { return normalizer_; }

  // Returns p strictly inside (a, b).
  double sample(Rng& rng) const;

  // (2 asin(sqrt(p)) - 2 asin(sqrt(a))) * normalizer, for p in [a, b].
  double cdf(double p) const;

 private:
  double a_;
  double b_;
  double angle_lo_;  // asin(sqrt(a))
  double angle_hi_;  // asin(sqrt(b))
  double normalizer_;
};

enum class BiasKind { kSpecial0, kSpecial1, kInterior };

// A draw of the per-round bias. The kind tag is authoritative: downstream
// code distinguishes special rounds by it, never by comparing p against 0/1.
struct BiasSample {
  double p;
  BiasKind kind;
};

// Mixture putting mass zeta on each of the constants 0 and 1 and the
// remaining 1 - 2*zeta on an arcsine interval over (alpha, 1-alpha).
class BiasMixture {
 public:
  // Requires alpha in (0, 1/2) and zeta in (0, 1/2]. zeta = 1/2 leaves no
  // interior mass and is only useful in tests.
  BiasMixture(double alpha, double zeta);

  double alpha() const { return alpha_; }
  double zeta() const { return zeta_; }
  const ArcsineInterval& interior() const { return interior_; }

  BiasSample sample(Rng& rng) const;

 private:
  double alpha_;
  double zeta_;
  ArcsineInterval interior_;
};

// Centered score function: phi(p, +1) = sqrt((1-p)/p), phi(p, -1) =
// -sqrt(p/(1-p)), and 0 when p is 0 or 1. For c ~ Bernoulli(p) on {-1,+1}
// this has mean 0 and variance 1. Requires p in [0,1] and c in {-1,+1}.
double phi(double p, int c);

inline double phi(const BiasSample& s, int c) {
  return s.kind == BiasKind::kInterior ? phi(s.p, c) : 0.0;
}

}  // namespace fpt::dist
