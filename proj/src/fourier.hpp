#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dist.hpp"
#include "rng.hpp"

namespace fpt::fourier {

// Total function {-1,+1}^arity -> {-1,+1}, stored as a truth table indexed
// by a bitmask in which bit i set means input i is +1. Evaluation supports
// arity up to 20; exhaustive sweeps over all functions are for the callers
// to cap (there are 2^(2^arity) of them).
class BooleanFunction {
 public:
  BooleanFunction(int arity, std::vector<std::int8_t> table);

  static BooleanFunction constant(int arity, int value);
  static BooleanFunction dictator(int arity, int index);
  static BooleanFunction parity(int arity);
  static BooleanFunction random(int arity, Rng& rng);
  // Truth table from the bits of `index` (bit m gives the value on mask m,
  // set bit meaning +1); enumerates all functions for arity <= 4.
  static BooleanFunction from_index(int arity, std::uint64_t index);

  int arity() const { return arity_; }
  int value(std::uint32_t mask) const {
    return table_[static_cast<std::size_t>(mask)];
  }

  // Sum of f over masks of each popcount; the basis for all the exact
  // enumeration formulas below.
  const std::vector<double>& level_sums() const { return level_sums_; }
  // Counts of {+1, -1}-valued masks per popcount.
  const std::vector<std::int64_t>& level_plus_counts() const {
    return level_plus_;
  }

 private:
  int arity_;
  std::vector<std::int8_t> table_;
  std::vector<double> level_sums_;
  std::vector<std::int64_t> level_plus_;
};

struct GEvaluation {
  double value;       // g(p) = E_{c~p}[f(c)]
  double derivative;  // g'(p), by term-wise analytic differentiation
};

// Exact enumeration of g and g'. Requires p in [0, 1].
GEvaluation g_eval(const BooleanFunction& f, double p);

struct IdentityCheck {
  double lhs;
  double rhs;
  double abs_diff() const;
};

// lhs = E_{c~p}[f(c) sum_i phi^p(c_i)] by exact enumeration,
// rhs = g'(p) sqrt(p(1-p)). Requires p strictly inside (0, 1).
IdentityCheck check_derivative_identity(const BooleanFunction& f, double p);

// lhs = E_{p~D_{a,b}} E_{c~p}[f(c) sum_i phi^p(c_i)] by validated
// quadrature, rhs = (g(b) - g(a)) * C_{a,b}.
IdentityCheck check_interval_identity(const BooleanFunction& f, double a,
                                      double b);

// Both |g(1-alpha) - g(1)| <= 2 n alpha and |g(alpha) - g(0)| <= 2 n alpha.
bool check_g_endpoint_bound(const BooleanFunction& f, double alpha);

struct XiExpectation {
  double value;        // exact E[xi_{alpha,zeta}(f)]
  double lower_bound;  // nominal bound (2/pi)(1 - 2 zeta)(1 - 2 n alpha)
};

// Exact expectation of the per-round progress variable: point masses at the
// constant columns plus the quadrature term over the interior. Returns the
// value together with the nominal lower bound so callers can report the
// margin; the bound can fail for anti-correlated f.
XiExpectation xi_expectation(const BooleanFunction& f, double alpha,
                             double zeta);

struct TailProbe {
  double empirical;
  double bound;  // e^{-lambda^2/4m} + e^{-sqrt(alpha) lambda / 4}
};

// Monte-Carlo frequency of sum_i a_i phi(p_i, c_i) >= lambda against the
// analytic tail bound. Each p must lie in [alpha, 1-alpha] or {0, 1}; alpha
// is taken as the largest margin consistent with the inputs.
TailProbe empirical_tail_phisum(std::span<const double> biases,
                                std::span<const double> coefficients,
                                double lambda, std::int64_t trials, Rng& rng);

struct MgfProbe {
  double max_ratio;  // max over the grid of E[e^{t(xi - E xi)}] / e^{C t^2}
  double worst_t;
};

// Exact centered MGF of xi against e^{C t^2} with C = 64 e^{n alpha/4} /
// alpha. Requires zeta in [1/4, 1/2) and every t in [-sqrt(alpha)/8,
// sqrt(alpha)/8].
MgfProbe xi_moment_mgf_probe(const BooleanFunction& f, double alpha,
                             double zeta, std::span<const double> t_grid);

// E_{p ~ D_{a,b}}[h(p)] by Gauss-Legendre quadrature in the angle variable
// (p = sin^2 theta), node-doubled until two refinements agree to 1e-8.
double integrate_against_arcsine(const dist::ArcsineInterval& interval,
                                 const std::function<double(double)>& h);

}  // namespace fpt::fourier
