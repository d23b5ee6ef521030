#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dist.hpp"
#include "stats.hpp"

using fpt::Rng;
using fpt::dist::ArcsineInterval;
using fpt::dist::BiasKind;
using fpt::dist::BiasMixture;
using fpt::dist::phi;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("arcsine interval construction and normalizer") {
  const ArcsineInterval full(0.0, 1.0);
  CHECK(full.normalizer() == doctest::Approx(1.0 / kPi).epsilon(1e-15));

  const ArcsineInterval half(0.25, 0.75);
  CHECK(half.normalizer() > 0.0);

  CHECK_THROWS_AS(ArcsineInterval(0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ArcsineInterval(0.7, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(ArcsineInterval(-0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ArcsineInterval(0.0, 1.1), std::invalid_argument);
}

TEST_CASE("arcsine cdf endpoints and midpoint") {
  const ArcsineInterval full(0.0, 1.0);
  CHECK(full.cdf(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(full.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // arcsin(sqrt(1/2)) = pi/4, so the cdf at 1/2 is exactly 1/2.
  CHECK(full.cdf(0.5) == doctest::Approx(0.5).epsilon(1e-15));

  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double c = full.cdf(i / 100.0);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK_THROWS_AS(full.cdf(-0.01), std::invalid_argument);
  const ArcsineInterval mid(0.25, 0.75);
  CHECK_THROWS_AS(mid.cdf(0.1), std::invalid_argument);
}

TEST_CASE("arcsine sampler: support, mean, median") {
  Rng rng(7);
  const ArcsineInterval full(0.0, 1.0);
  const int n = 100000;
  double sum = 0.0;
  int below_half = 0;
  for (int i = 0; i < n; ++i) {
    const double p = full.sample(rng);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    sum += p;
    below_half += p <= 0.5;
  }
  // mean 1/2 by symmetry; sd of the mean is sqrt(1/8)/sqrt(n).
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(0.125 / n));
  // P(p <= 1/2) = CDF(1/2) = 1/2.
  CHECK(std::abs(below_half / double(n) - 0.5) < 4.0 * std::sqrt(0.25 / n));

  const ArcsineInterval mid(0.25, 0.75);
  for (int i = 0; i < 20000; ++i) {
    const double p = mid.sample(rng);
    CHECK(p > 0.25);
    CHECK(p < 0.75);
  }
}

TEST_CASE("arcsine sampler passes KS at the 1% level") {
  const int n = 100000;
  for (const auto& interval :
       {ArcsineInterval(0.0, 1.0), ArcsineInterval(0.015625, 0.984375)}) {
    Rng rng(42);
    std::vector<double> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) samples.push_back(interval.sample(rng));
    const double d = fpt::stats::ks_statistic(
        samples, [&](double p) { return interval.cdf(p); });
    CHECK(d < fpt::stats::ks_critical_value(n, 0.01));
  }
}

TEST_CASE("bias mixture: kinds, frequencies, interior support") {
  Rng rng(11);

  SUBCASE("degenerate zeta = 1/2 puts all mass on the endpoints") {
    const BiasMixture mix(0.1, 0.5);
    for (int i = 0; i < 5000; ++i) {
      const auto s = mix.sample(rng);
      CHECK(s.kind != BiasKind::kInterior);
      CHECK((s.p == 0.0 || s.p == 1.0));
    }
  }

  SUBCASE("zeta = 3/8 endpoint frequencies") {
    const BiasMixture mix(0.1, 0.375);
    const int n = 100000;
    int zeros = 0, ones = 0;
    for (int i = 0; i < n; ++i) {
      const auto s = mix.sample(rng);
      zeros += s.kind == BiasKind::kSpecial0;
      ones += s.kind == BiasKind::kSpecial1;
    }
    const double se = std::sqrt(0.375 * 0.625 / n);
    CHECK(std::abs(zeros / double(n) - 0.375) < 4 * se);
    CHECK(std::abs(ones / double(n) - 0.375) < 4 * se);
  }

  SUBCASE("interior samples stay inside (alpha, 1-alpha)") {
    const BiasMixture mix(0.1, 0.25);
    for (int i = 0; i < 20000; ++i) {
      const auto s = mix.sample(rng);
      if (s.kind == BiasKind::kInterior) {
        CHECK(s.p > 0.1);
        CHECK(s.p < 0.9);
      }
    }
  }

  SUBCASE("kind tag matches p for special samples") {
    const BiasMixture mix(0.2, 0.4);
    for (int i = 0; i < 2000; ++i) {
      const auto s = mix.sample(rng);
      if (s.kind == BiasKind::kSpecial0) CHECK(s.p == 0.0);
      if (s.kind == BiasKind::kSpecial1) CHECK(s.p == 1.0);
    }
  }

  CHECK_THROWS_AS(BiasMixture(0.0, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(BiasMixture(0.5, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(BiasMixture(0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BiasMixture(0.1, 0.6), std::invalid_argument);
}

TEST_CASE("phi closed form") {
  CHECK(phi(0.0, 1) == 0.0);
  CHECK(phi(0.0, -1) == 0.0);
  CHECK(phi(1.0, 1) == 0.0);
  CHECK(phi(1.0, -1) == 0.0);
  CHECK(phi(0.5, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi(0.5, -1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(phi(0.25, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(phi(0.25, -1) == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));

  CHECK_THROWS_AS(phi(-0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(phi(1.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(phi(0.5, 0), std::invalid_argument);
  CHECK_THROWS_AS(phi(0.5, 2), std::invalid_argument);
}

TEST_CASE("phi has exact mean zero and unit variance") {
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    const double mean = p * phi(p, 1) + (1.0 - p) * phi(p, -1);
    const double var = p * phi(p, 1) * phi(p, 1) +
                       (1.0 - p) * phi(p, -1) * phi(p, -1);
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(std::abs(var - 1.0) <= 1e-12);
  }
}

TEST_CASE("phi magnitude bound on the restricted interval") {
  for (double alpha : {0.125, 0.015625, 0.00625}) {
    const double limit = 1.0 / std::sqrt(alpha) + 1e-12;
    for (int i = 0; i <= 50; ++i) {
      const double p = alpha + (1.0 - 2.0 * alpha) * i / 50.0;
      CHECK(std::abs(phi(p, 1)) <= limit);
      CHECK(std::abs(phi(p, -1)) <= limit);
    }
  }
}

TEST_CASE("single-letter mgf bound holds exactly on a grid") {
  for (double alpha : {0.125, 0.015625}) {
    const double t_max = std::sqrt(alpha) / 2.0;
    std::vector<double> ps = {0.0, 1.0};
    for (int i = 0; i <= 20; ++i) ps.push_back(alpha + (1.0 - 2.0 * alpha) * i / 20.0);
    for (double p : ps) {
      for (int ti = -8; ti <= 8; ++ti) {
        const double t = t_max * ti / 8.0;
        const double lhs = p == 0.0 || p == 1.0
                               ? 1.0
                               : p * std::exp(t * phi(p, 1)) +
                                     (1.0 - p) * std::exp(t * phi(p, -1));
        CHECK(lhs <= std::exp(t * t) + 1e-12);
      }
    }
  }
}
