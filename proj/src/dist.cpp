#include "dist.hpp"

#include <cmath>
#include <stdexcept>

namespace fpt::dist {

ArcsineInterval::ArcsineInterval(double a, double b) : a_(a), b_(b) {
  if (!(a >= 0.0 && a < b && b <= 1.0)) {
    throw std::invalid_argument("ArcsineInterval requires 0 <= a < b <= 1");
  }
  angle_lo_ = std::asin(std::sqrt(a));
  angle_hi_ = std::asin(std::sqrt(b));
  normalizer_ = 1.0 / (2.0 * (angle_hi_ - angle_lo_));
}

double ArcsineInterval::sample(Rng& rng) const {
  const double angle = angle_lo_ + (angle_hi_ - angle_lo_) * rng.uniform_open01();
  const double s = std::sin(angle);
  double p = s * s;
  // sin^2 can round onto an endpoint when the interval touches 0 or 1; nudge
  // back inside so the support stays strictly open.
  if (p <= a_) p = std::nextafter(a_, 1.0);
  if (p >= b_) p = std::nextafter(b_, 0.0);
  return p;
}

double ArcsineInterval::cdf(double p) const {
  if (!(p >= a_ && p <= b_)) {
    throw std::invalid_argument("cdf argument outside [a, b]");
  }
  return (2.0 * std::asin(std::sqrt(p)) - 2.0 * angle_lo_) * normalizer_;
}

BiasMixture::BiasMixture(double alpha, double zeta)
    : alpha_(alpha), zeta_(zeta), interior_(alpha, 1.0 - alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("BiasMixture requires alpha in (0, 1/2)");
  }
  if (!(zeta > 0.0 && zeta <= 0.5)) {
    throw std::invalid_argument("BiasMixture requires zeta in (0, 1/2]");
  }
}

BiasSample BiasMixture::sample(Rng& rng) const {
  const double u = rng.uniform01();
  if (u < zeta_) return {0.0, BiasKind::kSpecial0};
  if (u < 2.0 * zeta_) return {1.0, BiasKind::kSpecial1};
  return {interior_.sample(rng), BiasKind::kInterior};
}

double phi(double p, int c) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("phi requires p in [0, 1]");
  }
  if (c != 1 && c != -1) {
    throw std::invalid_argument("phi requires c in {-1, +1}");
  }
  if (p == 0.0 || p == 1.0) return 0.0;
  return c == 1 ? std::sqrt((1.0 - p) / p) : -std::sqrt(p / (1.0 - p));
}

}  // namespace fpt::dist
