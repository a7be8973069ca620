#pragma once
// Closed-form exponents and ergodic constants for separable infinity-harmonic
// functions u = r^{-beta} psi(sigma) on cones over spherical caps, annuli and
// circle arcs.
//
// All ergodic constants share one algebraic shape. Along a geodesic profile the
// slope Y = psi'/psi obeys
//   Y^2 Y' = -(Y^2 + A^2)(Y^2 + B^2),  A^2 + B^2 = gamma (2 gamma + c),
//   A^2 B^2 = lambda gamma^3,
// with c = +1 (singular) or -1 (regular). Integrating between the two ends of
// the profile gives A + B = s, where
//   s = pi / alpha        on an interval of length alpha blown up at both ends,
//   s = pi / (2 alpha)    on a cap of opening alpha (Y = 0 at the pole),
// so lambda = (s^2 - gamma (2 gamma + c))^2 / (4 gamma^3).
// A and B form a complex-conjugate pair when s^2 > 2 gamma (2 gamma + c); the
// formula for lambda is unchanged there.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "infsep/errors.hpp"

namespace infsep {

enum class Case : int { Singular = 1, Regular = -1 };

inline constexpr int case_sign(Case c) { return static_cast<int>(c); }

template <typename Scalar = double>
struct CapGeometry {
  Scalar alpha;
};

template <typename Scalar = double>
struct AnnulusGeometry {
  Scalar kappa;
  Scalar alpha;
  Scalar nu;  // (alpha - kappa) / 2
};

template <typename Scalar = double>
AnnulusGeometry<Scalar> make_annulus(Scalar kappa, Scalar alpha) {
  if (!(kappa >= 0 && kappa < alpha && alpha < std::numbers::pi_v<Scalar>))
    throw DomainError("annulus requires 0 <= kappa < alpha < pi");
  return {kappa, alpha, (alpha - kappa) / 2};
}

template <typename Scalar = double>
struct ClosedFormLambda {
  std::complex<Scalar> A;
  std::complex<Scalar> B;
  Scalar lambda;
  Scalar gamma;
  Scalar sum;  // A + B
  Case kind;
  bool realRoots;
};

template <typename Scalar = double>
Scalar beta_circle(int k) {
  if (k < 1) throw DomainError("beta_circle requires k >= 1");
  const Scalar kk = k;
  return kk * kk / (2 * kk + 1);
}

template <typename Scalar = double>
Scalar mu_circle(int k) {
  if (k < 1) throw DomainError("mu_circle requires k >= 1");
  const Scalar kk = k;
  return kk * kk / (2 * kk - 1);
}

template <typename Scalar>
Scalar beta_cap(const CapGeometry<Scalar>& g) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(g.alpha > 0 && g.alpha <= pi)) throw DomainError("beta_cap requires 0 < alpha <= pi");
  return pi * pi / (4 * g.alpha * (pi + g.alpha));
}

template <typename Scalar>
Scalar mu_cap(const CapGeometry<Scalar>& g) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(g.alpha > 0 && g.alpha < pi)) throw DomainError("mu_cap requires 0 < alpha < pi");
  return pi * pi / (4 * g.alpha * (pi - g.alpha));
}

template <typename Scalar>
Scalar beta_annulus(const AnnulusGeometry<Scalar>& g) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  return pi * pi / (4 * g.nu * (pi + g.nu));
}

template <typename Scalar>
Scalar mu_annulus(const AnnulusGeometry<Scalar>& g) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(g.nu < pi)) throw DomainError("mu_annulus requires nu < pi");
  return pi * pi / (4 * g.nu * (pi - g.nu));
}

// lambda from the endpoint sum s = A + B. s^2 == q is the lambda = 0 edge and
// is accepted; a deficit beyond roundoff is a branch error.
template <typename Scalar>
ClosedFormLambda<Scalar> lambda_from_sum(Scalar s, Scalar gamma, Case kind) {
  if (!(gamma > 0)) throw DomainError("gamma must be positive");
  const Scalar q = gamma * (2 * gamma + case_sign(kind));
  Scalar d = s * s - q;
  const Scalar slack = 8 * std::numeric_limits<Scalar>::epsilon() * std::abs(q);
  if (d < -slack) throw BranchError("closed form outside the root regime: (A+B)^2 < gamma(2 gamma +/- 1)");
  if (d < 0) d = 0;
  ClosedFormLambda<Scalar> r;
  r.gamma = gamma;
  r.kind = kind;
  r.sum = s;
  r.lambda = d * d / (4 * gamma * gamma * gamma);
  // A, B are the roots of t^2 - s t + d/2.
  const Scalar disc = 2 * q - s * s;
  r.realRoots = disc >= 0;
  const std::complex<Scalar> root = std::sqrt(std::complex<Scalar>(disc, 0));
  r.A = (std::complex<Scalar>(s, 0) + root) / Scalar(2);
  r.B = (std::complex<Scalar>(s, 0) - root) / Scalar(2);
  return r;
}

template <typename Scalar>
ClosedFormLambda<Scalar> lambda_interval(Scalar alpha, Scalar gamma, Case kind = Case::Singular) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(alpha > 0 && alpha <= pi)) throw DomainError("lambda_interval requires 0 < alpha <= pi");
  return lambda_from_sum(pi / alpha, gamma, kind);
}

template <typename Scalar>
ClosedFormLambda<Scalar> lambda_cap(Scalar alpha, Scalar gamma, Case kind) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(alpha > 0 && alpha <= pi)) throw DomainError("lambda_cap requires 0 < alpha <= pi");
  return lambda_from_sum(pi / (2 * alpha), gamma, kind);
}

template <typename Scalar>
Scalar lambda_punctured_sphere(Scalar gamma) {
  return lambda_from_sum(Scalar(1) / 2, gamma, Case::Singular).lambda;
}

// Solves lambda_cap(alpha, g, singular) = g + 1: with s = pi/(2 alpha) the
// identity reduces to s = sqrt(g)(sqrt(g+1) + sqrt(g)), i.e. g = s^2 / (2s + 1).
template <typename Scalar>
Scalar beta_from_lambda_cap(Scalar alpha) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(alpha > 0 && alpha <= pi)) throw DomainError("beta_from_lambda_cap requires 0 < alpha <= pi");
  const Scalar s = pi / (2 * alpha);
  return s * s / (2 * s + 1);
}

// Regular analogue: lambda_cap(alpha, m, regular) = m - 1 on the branch
// s = m + sqrt(m^2 - m), i.e. m = s^2 / (2s - 1); requires s >= 1.
template <typename Scalar>
Scalar mu_from_lambda_cap(Scalar alpha) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (!(alpha > 0 && alpha <= pi / 2))
    throw BranchError("regular cap identity holds only for 0 < alpha <= pi/2");
  const Scalar s = pi / (2 * alpha);
  return s * s / (2 * s - 1);
}

}  // namespace infsep
