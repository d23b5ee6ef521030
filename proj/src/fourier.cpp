#include "fourier.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace fpt::fourier {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kQuadTol = 1e-8;

// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on P_n.
struct GlRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GlRule gauss_legendre(int n) {
  GlRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

double gl_integrate(const std::function<double(double)>& fn, double lo,
                    double hi, int n) {
  static thread_local std::vector<std::pair<int, GlRule>> cache;
  const GlRule* rule = nullptr;
  for (const auto& entry : cache) {
    if (entry.first == n) rule = &entry.second;
  }
  if (rule == nullptr) {
    cache.emplace_back(n, gauss_legendre(n));
    rule = &cache.back().second;
  }
  const double mid = 0.5 * (lo + hi);
  const double halfwidth = 0.5 * (hi - lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule->nodes.size(); ++i) {
    sum += rule->weights[i] * fn(mid + halfwidth * rule->nodes[i]);
  }
  return halfwidth * sum;
}

// Node-doubling validation: accept once two refinements agree to kQuadTol.
double integrate_validated(const std::function<double(double)>& fn, double lo,
                           double hi) {
  double prev = gl_integrate(fn, lo, hi, 64);
  for (int n = 128; n <= 2048; n *= 2) {
    const double next = gl_integrate(fn, lo, hi, n);
    if (std::abs(next - prev) <= kQuadTol) return next;
    prev = next;
  }
  throw std::runtime_error("quadrature failed to converge");
}

// p^k (1-p)^{n-k} and its derivative, with the 0^0 = 1 convention so the
// endpoints evaluate exactly.
double pow_or_one(double base, std::int64_t exponent) {
  return exponent == 0 ? 1.0 : std::pow(base, static_cast<double>(exponent));
}

double level_weight(double p, std::int64_t k, std::int64_t n) {
  return pow_or_one(p, k) * pow_or_one(1.0 - p, n - k);
}

double level_weight_derivative(double p, std::int64_t k, std::int64_t n) {
  double d = 0.0;
  if (k > 0) d += k * pow_or_one(p, k - 1) * pow_or_one(1.0 - p, n - k);
  if (k < n) d -= (n - k) * pow_or_one(p, k) * pow_or_one(1.0 - p, n - k - 1);
  return d;
}

// E_{c~p}[f(c) sum_i phi^p(c_i)] for p in (0,1), via the level sums: a mask
// of popcount k contributes weight p^k q^{n-k} and k phi(p,+1) + (n-k)
// phi(p,-1).
double correlation_at(const BooleanFunction& f, double p) {
  if (p == 0.0 || p == 1.0) return 0.0;  // phi vanishes at the endpoints
  const auto n = static_cast<std::int64_t>(f.arity());
  const double phi_plus = dist::phi(p, 1);
  const double phi_minus = dist::phi(p, -1);
  double sum = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double w = f.level_sums()[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    sum += w * level_weight(p, k, n) * (k * phi_plus + (n - k) * phi_minus);
  }
  return sum;
}

}  // namespace

BooleanFunction::BooleanFunction(int arity, std::vector<std::int8_t> table)
    : arity_(arity), table_(std::move(table)) {
  if (arity < 1 || arity > 20) {
    throw std::invalid_argument("arity must be in [1, 20]");
  }
  if (table_.size() != (1ull << arity)) {
    throw std::invalid_argument("table size must be 2^arity");
  }
  level_sums_.assign(static_cast<std::size_t>(arity) + 1, 0.0);
  level_plus_.assign(static_cast<std::size_t>(arity) + 1, 0);
  for (std::uint32_t mask = 0; mask < table_.size(); ++mask) {
    const int v = table_[mask];
    if (v != 1 && v != -1) {
      throw std::invalid_argument("table values must be +-1");
    }
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    level_sums_[k] += v;
    level_plus_[k] += v == 1;
  }
}

BooleanFunction BooleanFunction::constant(int arity, int value) {
  return BooleanFunction(
      arity, std::vector<std::int8_t>(1ull << arity,
                                      static_cast<std::int8_t>(value)));
}

BooleanFunction BooleanFunction::dictator(int arity, int index) {
  if (index < 0 || index >= arity) {
    throw std::invalid_argument("dictator index out of range");
  }
  std::vector<std::int8_t> table(1ull << arity);
  for (std::uint32_t mask = 0; mask < table.size(); ++mask) {
    table[mask] = (mask >> index) & 1 ? 1 : -1;
  }
  return BooleanFunction(arity, std::move(table));
}

BooleanFunction BooleanFunction::parity(int arity) {
  std::vector<std::int8_t> table(1ull << arity);
  for (std::uint32_t mask = 0; mask < table.size(); ++mask) {
    table[mask] = std::popcount(mask) % 2 == 0 ? 1 : -1;
  }
  return BooleanFunction(arity, std::move(table));
}

BooleanFunction BooleanFunction::random(int arity, Rng& rng) {
  std::vector<std::int8_t> table(1ull << arity);
  for (auto& v : table) v = rng.sign() > 0 ? 1 : -1;
  return BooleanFunction(arity, std::move(table));
}

BooleanFunction BooleanFunction::from_index(int arity, std::uint64_t index) {
  if (arity > 4) {
    throw std::invalid_argument("from_index supports arity <= 4 (64 bits)");
  }
  std::vector<std::int8_t> table(1ull << arity);
  for (std::uint32_t mask = 0; mask < table.size(); ++mask) {
    table[mask] = (index >> mask) & 1 ? 1 : -1;
  }
  return BooleanFunction(arity, std::move(table));
}

GEvaluation g_eval(const BooleanFunction& f, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("g_eval requires p in [0, 1]");
  }
  const auto n = static_cast<std::int64_t>(f.arity());
  double value = 0.0;
  double derivative = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double w = f.level_sums()[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    value += w * level_weight(p, k, n);
    derivative += w * level_weight_derivative(p, k, n);
  }
  return {value, derivative};
}

double IdentityCheck::abs_diff() const { return std::abs(lhs - rhs); }

IdentityCheck check_derivative_identity(const BooleanFunction& f, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("identity requires p strictly inside (0, 1)");
  }
  const double lhs = correlation_at(f, p);
  const auto [g, gprime] = g_eval(f, p);
  (void)g;
  const double rhs = gprime * std::sqrt(p * (1.0 - p));
  return {lhs, rhs};
}

IdentityCheck check_interval_identity(const BooleanFunction& f, double a,
                                      double b) {
  const dist::ArcsineInterval interval(a, b);
  const double lhs = integrate_against_arcsine(
      interval, [&f](double p) { return correlation_at(f, p); });
  const double rhs =
      (g_eval(f, b).value - g_eval(f, a).value) * interval.normalizer();
  return {lhs, rhs};
}

bool check_g_endpoint_bound(const BooleanFunction& f, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in [0, 1]");
  }
  const double bound = 2.0 * f.arity() * alpha;
  const double high = std::abs(g_eval(f, 1.0 - alpha).value - g_eval(f, 1.0).value);
  const double low = std::abs(g_eval(f, alpha).value - g_eval(f, 0.0).value);
  return high <= bound + 1e-12 && low <= bound + 1e-12;
}

XiExpectation xi_expectation(const BooleanFunction& f, double alpha,
                             double zeta) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("alpha must be in (0, 1/2)");
  }
  if (!(zeta > 0.0 && zeta < 0.5)) {
    throw std::invalid_argument("zeta must be in (0, 1/2)");
  }
  const auto n = static_cast<std::int64_t>(f.arity());
  const double gamma = (2.0 / kPi) * (1.0 - 2.0 * zeta) / zeta;
  const std::uint32_t all_plus = (1u << f.arity()) - 1;
  double value = 0.0;
  if (f.value(0) == 1) value += zeta * gamma;          // all -1 column, answered +1
  if (f.value(all_plus) == -1) value += zeta * gamma;  // all +1 column, answered -1
  value += (1.0 - 2.0 * zeta) *
           check_interval_identity(f, alpha, 1.0 - alpha).lhs;
  // The returned lower bound is the nominal one; it is NOT guaranteed for
  // anti-correlated f (g decreasing across the interval), where the interior
  // term is negative and the interval normalizer exceeds 1/pi. Callers that
  // probe it must treat a violation as a reportable result, not a bug; see
  // the corrected-bound check in the test suite.
  const double lower_bound =
      (2.0 / kPi) * (1.0 - 2.0 * zeta) * (1.0 - 2.0 * n * alpha);
  return {value, lower_bound};
}

TailProbe empirical_tail_phisum(std::span<const double> biases,
                                std::span<const double> coefficients,
                                double lambda, std::int64_t trials, Rng& rng) {
  if (biases.size() != coefficients.size() || biases.empty()) {
    throw std::invalid_argument("biases and coefficients must match");
  }
  double alpha = 0.5;
  for (std::size_t i = 0; i < biases.size(); ++i) {
    const double p = biases[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("bias outside [0, 1]");
    }
    if (!(std::abs(coefficients[i]) <= 1.0)) {
      throw std::invalid_argument("coefficient outside [-1, 1]");
    }
    if (p > 0.0 && p < 1.0) alpha = std::min(alpha, std::min(p, 1.0 - p));
  }
  const auto m = static_cast<double>(biases.size());
  std::int64_t hits = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < biases.size(); ++i) {
      const double p = biases[i];
      if (p == 0.0 || p == 1.0) continue;
      const int c = rng.bernoulli(p) ? 1 : -1;
      sum += coefficients[i] * dist::phi(p, c);
    }
    if (sum >= lambda) ++hits;
  }
  const double bound = std::exp(-lambda * lambda / (4.0 * m)) +
                       std::exp(-std::sqrt(alpha) * lambda / 4.0);
  return {static_cast<double>(hits) / static_cast<double>(trials), bound};
}

MgfProbe xi_moment_mgf_probe(const BooleanFunction& f, double alpha,
                             double zeta, std::span<const double> t_grid) {
  if (!(zeta >= 0.25 && zeta < 0.5)) {
    throw std::invalid_argument("mgf probe requires zeta in [1/4, 1/2)");
  }
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("alpha must be in (0, 1/2)");
  }
  const double t_limit = std::sqrt(alpha) / 8.0;
  const auto n = static_cast<std::int64_t>(f.arity());
  const double gamma = (2.0 / kPi) * (1.0 - 2.0 * zeta) / zeta;
  const std::uint32_t all_plus = (1u << f.arity()) - 1;
  const double xi_at_0 = f.value(0) == 1 ? gamma : 0.0;
  const double xi_at_1 = f.value(all_plus) == -1 ? gamma : 0.0;
  const double mean = xi_expectation(f, alpha, zeta).value;
  const double big_c =
      64.0 * std::exp(static_cast<double>(n) * alpha / 4.0) / alpha;
  const dist::ArcsineInterval interval(alpha, 1.0 - alpha);

  MgfProbe probe{0.0, 0.0};
  for (double t : t_grid) {
    if (std::abs(t) > t_limit + 1e-15) {
      throw std::invalid_argument("t outside [-sqrt(alpha)/8, sqrt(alpha)/8]");
    }
    // Interior part: E_{c~p}[e^{t f(c) (k phi+ + (n-k) phi-)}] grouped by
    // popcount and the sign of f. Of the C(n,k) masks at level k,
    // level_plus_counts[k] answer +1 and the rest answer -1.
    const auto interior = [&](double p) {
      const double phi_plus = dist::phi(p, 1);
      const double phi_minus = dist::phi(p, -1);
      double sum = 0.0;
      double binom = 1.0;  // C(n, k), updated incrementally
      for (std::int64_t k = 0; k <= n; ++k) {
        const double y = k * phi_plus + (n - k) * phi_minus;
        const double w = level_weight(p, k, n);
        const auto plus = static_cast<double>(
            f.level_plus_counts()[static_cast<std::size_t>(k)]);
        const double minus_count = binom - plus;
        sum += w * (plus * std::exp(t * y) + minus_count * std::exp(-t * y));
        binom = binom * static_cast<double>(n - k) / static_cast<double>(k + 1);
      }
      return sum;
    };
    const double mgf = zeta * std::exp(t * xi_at_0) +
                       zeta * std::exp(t * xi_at_1) +
                       (1.0 - 2.0 * zeta) *
                           integrate_against_arcsine(interval, interior);
    const double centered = std::exp(-t * mean) * mgf;
    const double ratio = centered / std::exp(big_c * t * t);
    if (ratio > probe.max_ratio) {
      probe.max_ratio = ratio;
      probe.worst_t = t;
    }
  }
  return probe;
}

double integrate_against_arcsine(const dist::ArcsineInterval& interval,
                                 const std::function<double(double)>& h) {
  // Substituting p = sin^2(theta) flattens the density: the measure becomes
  // 2 C_{a,b} d theta on (asin sqrt a, asin sqrt b).
  const double lo = std::asin(std::sqrt(interval.a()));
  const double hi = std::asin(std::sqrt(interval.b()));
  const auto integrand = [&h](double theta) {
    const double s = std::sin(theta);
    return h(s * s);
  };
  return 2.0 * interval.normalizer() * integrate_validated(integrand, lo, hi);
}

}  // namespace fpt::fourier
