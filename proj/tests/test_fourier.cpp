#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fourier.hpp"

using fpt::Rng;
using fpt::dist::ArcsineInterval;
using fpt::fourier::BooleanFunction;
using fpt::fourier::check_derivative_identity;
using fpt::fourier::check_g_endpoint_bound;
using fpt::fourier::check_interval_identity;
using fpt::fourier::empirical_tail_phisum;
using fpt::fourier::g_eval;
using fpt::fourier::integrate_against_arcsine;
using fpt::fourier::xi_expectation;
using fpt::fourier::xi_moment_mgf_probe;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("g_eval on canonical functions") {
  SUBCASE("constant") {
    const auto f = BooleanFunction::constant(3, 1);
    for (double p : {0.0, 0.3, 0.5, 1.0}) {
      const auto g = g_eval(f, p);
      CHECK(g.value == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(g.derivative == doctest::Approx(0.0).epsilon(1e-15));
    }
  }
  SUBCASE("dictator at arity 1: g = 2p - 1") {
    const auto f = BooleanFunction::dictator(1, 0);
    for (double p : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      const auto g = g_eval(f, p);
      CHECK(g.value == doctest::Approx(2.0 * p - 1.0).epsilon(1e-15));
      CHECK(g.derivative == doctest::Approx(2.0).epsilon(1e-15));
    }
  }
  SUBCASE("parity at arity 2: g = (2p-1)^2") {
    const auto f = BooleanFunction::parity(2);
    for (double p : {0.1, 0.5, 0.8}) {
      const auto g = g_eval(f, p);
      CHECK(g.value ==
            doctest::Approx((2 * p - 1) * (2 * p - 1)).epsilon(1e-14));
    }
    CHECK(g_eval(f, 0.5).derivative == doctest::Approx(0.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(g_eval(BooleanFunction::parity(2), 1.5),
                  std::invalid_argument);
}

TEST_CASE("analytic derivative agrees with central differences") {
  Rng rng(5);
  const double h = 1e-6;
  for (int arity = 1; arity <= 4; ++arity) {
    for (int r = 0; r < 10; ++r) {
      const auto f = BooleanFunction::random(arity, rng);
      for (double p : {0.2, 0.5, 0.77}) {
        const double numeric =
            (g_eval(f, p + h).value - g_eval(f, p - h).value) / (2 * h);
        CHECK(std::abs(g_eval(f, p).derivative - numeric) <= 1e-6);
      }
    }
  }
}

TEST_CASE("derivative identity: dictator and constant") {
  const auto dict = BooleanFunction::dictator(2, 1);
  for (double p : {0.1, 0.35, 0.5, 0.9}) {
    const auto check = check_derivative_identity(dict, p);
    CHECK(check.lhs ==
          doctest::Approx(2.0 * std::sqrt(p * (1 - p))).epsilon(1e-12));
    CHECK(check.abs_diff() <= 1e-12);
  }
  const auto con = BooleanFunction::constant(3, -1);
  for (double p : {0.2, 0.6}) {
    const auto check = check_derivative_identity(con, p);
    CHECK(check.lhs == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(check.rhs == doctest::Approx(0.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(check_derivative_identity(dict, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_derivative_identity(dict, 1.0), std::invalid_argument);
}

TEST_CASE("derivative identity: exhaustive over arity <= 3") {
  for (int arity = 1; arity <= 3; ++arity) {
    const std::uint64_t functions = 1ull << (1 << arity);
    double worst = 0.0;
    for (std::uint64_t idx = 0; idx < functions; ++idx) {
      const auto f = BooleanFunction::from_index(arity, idx);
      for (int pi = 1; pi <= 9; ++pi) {
        worst = std::max(worst,
                         check_derivative_identity(f, pi / 10.0).abs_diff());
      }
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("interval identity") {
  SUBCASE("dictator over the full interval gives 2/pi") {
    const auto f = BooleanFunction::dictator(1, 0);
    const auto check = check_interval_identity(f, 0.0, 1.0);
    CHECK(check.rhs == doctest::Approx(2.0 / kPi).epsilon(1e-12));
    CHECK(check.abs_diff() <= 1e-9);
  }
  SUBCASE("constant integrates to zero") {
    const auto f = BooleanFunction::constant(2, 1);
    const auto check = check_interval_identity(f, 0.1, 0.9);
    CHECK(std::abs(check.lhs) <= 1e-10);
    CHECK(std::abs(check.rhs) <= 1e-14);
  }
  SUBCASE("random functions at arity 4") {
    Rng rng(9);
    for (int r = 0; r < 25; ++r) {
      const auto f = BooleanFunction::random(4, rng);
      const auto check = check_interval_identity(f, 0.1, 0.9);
      CHECK(check.abs_diff() <= 1e-6);
    }
  }
  CHECK_THROWS_AS(
      check_interval_identity(BooleanFunction::parity(2), 0.9, 0.1),
      std::invalid_argument);
}

TEST_CASE("endpoint bound on g") {
  CHECK(check_g_endpoint_bound(BooleanFunction::constant(3, 1), 0.3));

  // Dictator at arity 1 is tight: |g(1 - a) - g(1)| = 2a.
  const auto dict = BooleanFunction::dictator(1, 0);
  const double diff =
      std::abs(g_eval(dict, 0.9).value - g_eval(dict, 1.0).value);
  CHECK(diff == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(check_g_endpoint_bound(dict, 0.1));

  for (int arity = 1; arity <= 3; ++arity) {
    const std::uint64_t functions = 1ull << (1 << arity);
    for (std::uint64_t idx = 0; idx < functions; ++idx) {
      const auto f = BooleanFunction::from_index(arity, idx);
      for (double alpha : {0.01, 0.1, 0.3}) {
        CHECK(check_g_endpoint_bound(f, alpha));
      }
    }
  }
}

TEST_CASE("xi expectation") {
  SUBCASE("constant +1: only the all-minus-ones indicator fires") {
    const double zeta = 0.375;
    const auto xi = xi_expectation(BooleanFunction::constant(2, 1), 0.05, zeta);
    const double gamma = (2.0 / kPi) * (1.0 - 2.0 * zeta) / zeta;
    CHECK(xi.value == doctest::Approx(zeta * gamma).epsilon(1e-9));
    CHECK(xi.value ==
          doctest::Approx((2.0 / kPi) * (1.0 - 2.0 * zeta)).epsilon(1e-9));
    CHECK(xi.value >= xi.lower_bound - 1e-9);
  }
  SUBCASE("dictator meets the nominal bound comfortably") {
    const auto xi = xi_expectation(BooleanFunction::dictator(1, 0), 0.01, 0.375);
    CHECK(xi.value >= xi.lower_bound - 1e-9);
  }
  SUBCASE("exhaustive over arity <= 3: the sign-corrected bound holds") {
    // The nominal bound amplifies negative interior correlation by the
    // interval normalizer and fails for anti-correlated functions (e.g. the
    // negated dictator). The corrected bound subtracts that amplification,
    // 2 (1 - 2 zeta)(C_{a,1-a} - 1/pi), and holds for every function.
    for (double beta : {0.0, 0.25}) {
      for (int arity = 1; arity <= 3; ++arity) {
        const double alpha = (0.5 - beta) / (4.0 * arity);
        const double zeta = 3.0 / 8.0 + beta / 4.0;
        const double normalizer =
            ArcsineInterval(alpha, 1.0 - alpha).normalizer();
        const double correction =
            2.0 * (1.0 - 2.0 * zeta) * (normalizer - 1.0 / kPi);
        const std::uint64_t functions = 1ull << (1 << arity);
        for (std::uint64_t idx = 0; idx < functions; ++idx) {
          const auto f = BooleanFunction::from_index(arity, idx);
          const auto xi = xi_expectation(f, alpha, zeta);
          CHECK(xi.value >= xi.lower_bound - correction - 1e-9);
        }
      }
    }
  }
  SUBCASE("the nominal bound does fail for the negated dictator") {
    // Pinned counterexample: n=1, alpha=1/8, zeta=3/8. Exact value
    // 2 zeta gamma - (1-2 zeta) 2 (1-2 alpha) C = 0.097218... against a
    // nominal bound of 0.119366...; the gap is reproducible and real.
    std::vector<std::int8_t> table = {1, -1};  // f(c) = -c
    const auto f = BooleanFunction(1, std::move(table));
    const auto xi = xi_expectation(f, 0.125, 0.375);
    CHECK(xi.value == doctest::Approx(0.0972182).epsilon(1e-5));
    CHECK(xi.lower_bound == doctest::Approx(0.1193662).epsilon(1e-6));
    CHECK(xi.value < xi.lower_bound - 1e-3);
  }
  CHECK_THROWS_AS(xi_expectation(BooleanFunction::parity(2), 0.6, 0.375),
                  std::invalid_argument);
}

TEST_CASE("arcsine quadrature sanity") {
  const ArcsineInterval full(0.0, 1.0);
  CHECK(integrate_against_arcsine(full, [](double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate_against_arcsine(full, [](double p) { return p; }) ==
        doctest::Approx(0.5).epsilon(1e-10));
  // E[2 sqrt(p(1-p))] over the full arcsine law: the dictator's per-round
  // correlation, 2/pi.
  CHECK(integrate_against_arcsine(
            full, [](double p) { return 2.0 * std::sqrt(p * (1 - p)); }) ==
        doctest::Approx(2.0 / kPi).epsilon(1e-10));
}

TEST_CASE("empirical tail of weighted phi sums") {
  Rng rng(13);
  SUBCASE("zero coefficients never exceed a positive threshold") {
    const std::vector<double> ps(50, 0.3);
    const std::vector<double> as(50, 0.0);
    const auto probe = empirical_tail_phisum(ps, as, 0.5, 2000, rng);
    CHECK(probe.empirical == 0.0);
  }
  SUBCASE("lambda = 0 makes the bound vacuous") {
    const std::vector<double> ps(10, 0.5);
    const std::vector<double> as(10, 1.0);
    const auto probe = empirical_tail_phisum(ps, as, 0.0, 100, rng);
    CHECK(probe.bound >= 1.0);
  }
  SUBCASE("m=100, lambda=30 is far in the tail") {
    const std::vector<double> ps(100, 0.5);
    const std::vector<double> as(100, 1.0);
    const auto probe = empirical_tail_phisum(ps, as, 30.0, 10000, rng);
    const double se =
        std::sqrt(probe.empirical * (1.0 - probe.empirical) / 10000.0);
    CHECK(probe.empirical <= probe.bound + 3.0 * se);
  }
  SUBCASE("special biases contribute nothing") {
    const std::vector<double> ps = {0.0, 1.0, 0.0};
    const std::vector<double> as = {1.0, 1.0, -1.0};
    const auto probe = empirical_tail_phisum(ps, as, 0.1, 500, rng);
    CHECK(probe.empirical == 0.0);
  }
}

TEST_CASE("xi mgf probe") {
  const int arity = 3;
  const double alpha = 0.5 / (4.0 * arity);
  const double zeta = 0.375;
  const double t_max = std::sqrt(alpha) / 8.0;
  std::vector<double> grid;
  for (int i = -4; i <= 4; ++i) grid.push_back(t_max * i / 4.0);

  SUBCASE("t = 0 gives ratio exactly 1") {
    const std::vector<double> zero = {0.0};
    const auto probe =
        xi_moment_mgf_probe(BooleanFunction::parity(arity), alpha, zeta, zero);
    CHECK(probe.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("bound holds across the grid for assorted functions") {
    Rng rng(3);
    std::vector<BooleanFunction> fs;
    fs.push_back(BooleanFunction::constant(arity, 1));
    fs.push_back(BooleanFunction::dictator(arity, 2));
    fs.push_back(BooleanFunction::parity(arity));
    for (int r = 0; r < 5; ++r) fs.push_back(BooleanFunction::random(arity, rng));
    for (const auto& f : fs) {
      const auto probe = xi_moment_mgf_probe(f, alpha, zeta, grid);
      CHECK(probe.max_ratio <= 1.0 + 1e-9);
    }
  }
  SUBCASE("rejects zeta below 1/4 and out-of-range t") {
    const std::vector<double> zero = {0.0};
    CHECK_THROWS_AS(
        xi_moment_mgf_probe(BooleanFunction::parity(arity), alpha, 0.2, zero),
        std::invalid_argument);
    const std::vector<double> far = {std::sqrt(alpha)};
    CHECK_THROWS_AS(
        xi_moment_mgf_probe(BooleanFunction::parity(arity), alpha, zeta, far),
        std::invalid_argument);
  }
}

TEST_CASE("boolean function validation") {
  CHECK_THROWS_AS(BooleanFunction(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(BooleanFunction(2, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(BooleanFunction(1, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(BooleanFunction::from_index(5, 0), std::invalid_argument);
}
