#include "infsep/boundary_layer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "infsep/errors.hpp"

namespace infsep {
namespace {

constexpr std::array<double, 8> kGl8X = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                         -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGl8W = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                         0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};

double denom(double v, double q, double p2) {
  const double v2 = v * v;
  return 1 + q * v2 + p2 * v2 * v2;
}

// Radius scale of the nearest complex singularity of 1/denom.
double singular_scale(double q, double p2) { return std::max({1.0, std::sqrt(std::abs(q)), std::sqrt(std::sqrt(std::abs(p2)))}); }

}  // namespace

double layer_p2_limit(double rho, double q) {
  const double s = std::numbers::pi / (4 * rho);
  const double r = (s * s - q) / 2;
  return r > 0 ? r * r : 0.0;
}

double layer_f(double u, double q, double p2) {
  if (u <= 0) return 0;
  const int panels = 1 + static_cast<int>(2 * u * singular_scale(q, p2));
  const double w = u / panels;
  double sum = 0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * w;
    for (std::size_t i = 0; i < kGl8X.size(); ++i) sum += kGl8W[i] / denom(mid + 0.5 * w * kGl8X[i], q, p2);
  }
  return 0.5 * w * sum;
}

double layer_u(double rho, double q, double p2) {
  if (!(rho > 0)) throw DomainError("layer distance must be positive");
  // Bracket [lo, hi] with F(lo) <= rho < F(hi); hi may stop at a zero of
  // denom, where F diverges.
  double lo = 0, hi = rho;
  bool hiIsPole = false;
  while (layer_f(hi, q, p2) <= rho) {
    lo = hi;
    hi *= 2;
    if (denom(hi, q, p2) <= 0) {
      double a = lo, b = hi;
      for (int k = 0; k < 200 && b - a > 1e-15 * b; ++k) {
        const double m = 0.5 * (a + b);
        (denom(m, q, p2) > 0 ? a : b) = m;
      }
      hi = b;
      hiIsPole = true;
      break;
    }
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  double u = std::clamp(rho, lo, hi);
  if (hiIsPole && u >= hi) u = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = layer_f(u, q, p2) - rho;
    if (f > 0)
      hi = u;
    else
      lo = u;
    double next = u - f * denom(u, q, p2);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 * u) return next;
    u = next;
    if (hi - lo <= 1e-15 * hi) break;
  }
  return u;
}

double layer_slope(double rho, double q, double p2) { return 1.0 / layer_u(rho, q, p2); }

double layer_increment(double rho0, double rho1, const LayerCoefficients& c) {
  if (!(rho0 > 0 && rho1 > 0)) throw DomainError("layer distances must be positive");
  if (rho0 == rho1) return 0;
  const double p2 = std::min(c.p2, layer_p2_limit(std::max(rho0, rho1), c.q));
  // Y - 1/s is smooth; the logarithm carries the singular part.
  const double mid = 0.5 * (rho0 + rho1), half = 0.5 * (rho1 - rho0);
  double rem = 0;
  for (std::size_t i = 0; i < kGl8X.size(); ++i) {
    const double s = mid + half * kGl8X[i];
    const double u = layer_u(s, c.q, p2);
    rem += kGl8W[i] * (std::isinf(u) ? -1.0 / s : (s - u) / (s * u));
  }
  return (std::log(rho1 / rho0) + half * rem) / c.gamma;
}

double layer_increment_dp2(double rho0, double rho1, const LayerCoefficients& c) {
  const double limit = layer_p2_limit(std::max(rho0, rho1), c.q);
  if (c.p2 >= limit) return 0;
  const double dp = 1e-6 * std::max(1.0, std::abs(c.p2));
  LayerCoefficients a = c, b = c;
  a.p2 = c.p2 - dp;
  b.p2 = std::min(c.p2 + dp, limit);
  return (layer_increment(rho0, rho1, b) - layer_increment(rho0, rho1, a)) / (b.p2 - a.p2);
}

}  // namespace infsep
