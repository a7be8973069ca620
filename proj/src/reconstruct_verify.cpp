#include "infsep/reconstruct_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "infsep/errors.hpp"

namespace infsep {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Three-point derivative weights on a nonuniform grid.
struct Weights {
  double m, c, p;
};

Weights first_weights(double hl, double hr) {
  return {-hr / (hl * (hl + hr)), (hr - hl) / (hl * hr), hl / (hr * (hl + hr))};
}

Weights second_weights(double hl, double hr) {
  return {2 / (hl * (hl + hr)), -2 / (hl * hr), 2 / (hr * (hl + hr))};
}

// d psi at every sample: analytic when given, one-sided at the ends.
Eigen::VectorXd slopes(const SeparableSolution& s) {
  const Eigen::Index n = s.sigma.size();
  if (s.dpsi.size() == n) return s.dpsi;
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == 0) {
      d(i) = (s.psi(1) - s.psi(0)) / (s.sigma(1) - s.sigma(0));
    } else if (i == n - 1) {
      d(i) = (s.psi(i) - s.psi(i - 1)) / (s.sigma(i) - s.sigma(i - 1));
    } else {
      const Weights w = first_weights(s.sigma(i) - s.sigma(i - 1), s.sigma(i + 1) - s.sigma(i));
      d(i) = w.m * s.psi(i - 1) + w.c * s.psi(i) + w.p * s.psi(i + 1);
    }
  }
  return d;
}

std::vector<double> critical_points(const SeparableSolution& s) {
  std::vector<double> out{s.sigma(s.sigma0Index)};
  const Eigen::VectorXd d = slopes(s);
  for (Eigen::Index i = 0; i + 1 < d.size(); ++i) {
    if (std::isfinite(d(i)) && std::isfinite(d(i + 1)) && d(i) * d(i + 1) < 0) {
      // Linear zero of the slope between the two samples.
      const double t = d(i) / (d(i) - d(i + 1));
      out.push_back(s.sigma(i) + t * (s.sigma(i + 1) - s.sigma(i)));
    }
  }
  return out;
}

bool in_smooth_region(double x, double lo, double hi, const std::vector<double>& crit, double radius) {
  if (x - lo < radius || hi - x < radius) return false;
  for (double c : crit)
    if (std::abs(x - c) < radius) return false;
  return true;
}

}  // namespace

double SeparableSolution::psi_at(double s) const {
  if (exactPsi) return exactPsi(s);
  const Eigen::Index n = sigma.size();
  if (s <= sigma(0)) return psi(0);
  if (s >= sigma(n - 1)) return psi(n - 1);
  const auto it = std::upper_bound(sigma.data(), sigma.data() + n, s);
  const Eigen::Index j = (it - sigma.data()) - 1;
  auto slope = [&](Eigen::Index i) {
    if (dpsi.size() == n && std::isfinite(dpsi(i))) return dpsi(i);
    if (i == 0) return (psi(1) - psi(0)) / (sigma(1) - sigma(0));
    if (i == n - 1) return (psi(i) - psi(i - 1)) / (sigma(i) - sigma(i - 1));
    const Weights w = first_weights(sigma(i) - sigma(i - 1), sigma(i + 1) - sigma(i));
    return w.m * psi(i - 1) + w.c * psi(i) + w.p * psi(i + 1);
  };
  const double h = sigma(j + 1) - sigma(j);
  const double t = (s - sigma(j)) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * psi(j) + (t3 - 2 * t2 + t) * h * slope(j) + (-2 * t3 + 3 * t2) * psi(j + 1) +
         (t3 - t2) * h * slope(j + 1);
}

double SeparableSolution::spacing() const {
  double h = 0;
  for (Eigen::Index i = 0; i + 1 < sigma.size(); ++i) h = std::max(h, sigma(i + 1) - sigma(i));
  return h;
}

SeparableSolution reconstruct_samples(const SphericalDomain& dom, const Eigen::VectorXd& sigma,
                                      const Eigen::VectorXd& w, double gamma, int caseSign, int sigma0Index) {
  if (!(gamma > 0)) throw DomainError("gamma must be positive");
  if (caseSign != 1 && caseSign != -1) throw CaseError("case sign must be +1 or -1");
  if (sigma.size() != w.size() || sigma.size() < 3) throw DomainError("need at least three matching samples");
  if (sigma0Index < 0 || sigma0Index >= w.size()) throw DomainError("sigma0 index out of range");
  SeparableSolution s;
  s.beta = caseSign * gamma;
  s.domain = dom;
  s.sigma = sigma;
  s.sigma0Index = sigma0Index;
  // ln psi = -gamma (w - w(sigma0)); exp only after the shift.
  s.psi = (-gamma * (w.array() - w(sigma0Index))).exp().matrix();
  return s;
}

SeparableSolution reconstruct(const SphericalDomain& dom, const SolveResult& w, double gamma, int caseSign) {
  if (w.coords.cols() != 1) throw SchemeError("reconstruct expects a one-dimensional solve");
  if (!w.converged) throw ConvergenceError("reconstruct needs a converged solve", w.residualNorm, -1);
  return reconstruct_samples(dom, w.coords.col(0), w.w, gamma, caseSign, w.sigma0Index);
}

SeparableSolution from_profile(const Profile& p) {
  const SphericalDomain dom =
      p.arc.criticalAtStart ? SphericalDomain::cap(p.arc.length) : SphericalDomain::arc(p.arc.length, true);
  return from_profile(p, dom);
}

SeparableSolution from_profile(const Profile& p, const SphericalDomain& dom) {
  SeparableSolution s;
  s.beta = p.beta;
  s.domain = dom;
  s.sigma = p.sigma;
  s.psi = p.psi;
  s.sigma0Index = 0;
  for (Eigen::Index i = 1; i < p.sigma.size(); ++i)
    if (std::abs(p.sigma(i) - p.sigma0) < std::abs(p.sigma(s.sigma0Index) - p.sigma0)) s.sigma0Index = static_cast<int>(i);

  const double b = p.beta;
  const double c2 = b * (b + 1);
  const Eigen::Index n = p.sigma.size();
  s.dpsi.resize(n);
  s.d2psi.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = p.y(i);
    if (!std::isfinite(y) || y == 0) {
      s.dpsi(i) = y == 0 ? 0 : kNaN;
      s.d2psi(i) = kNaN;
      continue;
    }
    const double y2 = y * y;
    const double yp = -(y2 + b * b) * (y2 + c2) / y2;
    s.dpsi(i) = y * p.psi(i);
    s.d2psi(i) = (yp + y2) * p.psi(i);
  }

  if (p.arches == 1 && (b > 0 || b <= -1)) {
    const ImplicitRelation rel = make_relation(b, p.sigma0);
    const double ell = branch_length(b);
    s.exactPsi = [rel, ell, b](double x) {
      if (std::abs(x - rel.alphaCrit) >= ell) return 0.0;
      return std::exp(log_psi_from_y(b, invert_y(rel, x)));
    };
  }
  return s;
}

std::vector<std::uint8_t> smooth_region(const SeparableSolution& sol, double radius) {
  const Eigen::Index n = sol.sigma.size();
  const std::vector<double> crit = critical_points(sol);
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 1; i + 1 < n; ++i)
    keep[static_cast<std::size_t>(i)] = in_smooth_region(sol.sigma(i), sol.sigma(0), sol.sigma(n - 1), crit, radius);
  return keep;
}

ResidualReport spherical_residual(const SeparableSolution& sol, double exclusionFactor, double minRadius) {
  const Eigen::Index n = sol.sigma.size();
  if (n < 3) throw DomainError("spherical residual needs at least three samples");
  ResidualReport rep;
  rep.exclusionRadius = std::max(exclusionFactor * sol.spacing(), minRadius);
  rep.included = smooth_region(sol, rep.exclusionRadius);
  rep.residual = Eigen::VectorXd::Constant(n, kNaN);
  const double b = sol.beta;
  const double k2 = b * (2 * b + 1), k3 = b * b * b * (b + 1);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!rep.included[static_cast<std::size_t>(i)]) continue;
    const double hl = sol.sigma(i) - sol.sigma(i - 1), hr = sol.sigma(i + 1) - sol.sigma(i);
    const Weights w1 = first_weights(hl, hr), w2 = second_weights(hl, hr);
    const double f0 = sol.psi(i - 1), f1 = sol.psi(i), f2 = sol.psi(i + 1);
    const double d1 = w1.m * f0 + w1.c * f1 + w1.p * f2;
    const double d2 = w2.m * f0 + w2.c * f1 + w2.p * f2;
    const double t1 = d1 * d1 * d2, t2 = k2 * d1 * d1 * f1, t3 = k3 * f1 * f1 * f1;
    const double r = t1 + t2 + t3;
    rep.residual(i) = r;
    ++rep.count;
    rep.maxAbs = std::max(rep.maxAbs, std::abs(r));
    const double mag = std::abs(t1) + std::abs(t2) + std::abs(t3);
    if (mag > 0) rep.maxScaled = std::max(rep.maxScaled, std::abs(r) / mag);
  }
  return rep;
}

double ambient_infinity_laplacian(const std::function<double(const Eigen::VectorXd&)>& u, const Eigen::VectorXd& x,
                                  double relStep) {
  const Eigen::Index N = x.size();
  const double h = relStep * std::max(x.norm(), std::numeric_limits<double>::min());
  // Fourth-order centered weights on offsets -2..2.
  constexpr double d1w[5] = {1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12};
  constexpr double d2w[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  const double u0 = u(x);
  Eigen::VectorXd g(N);
  Eigen::MatrixXd H(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    double gi = 0, hii = 0;
    for (int a = -2; a <= 2; ++a) {
      const double f = a == 0 ? u0 : u(x + a * h * Eigen::VectorXd::Unit(N, i));
      gi += d1w[a + 2] * f;
      hii += d2w[a + 2] * f;
    }
    g(i) = gi / h;
    H(i, i) = hii / (h * h);
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      double hij = 0;
      for (int a = -2; a <= 2; ++a) {
        if (a == 0) continue;
        for (int c = -2; c <= 2; ++c) {
          if (c == 0) continue;
          hij += d1w[a + 2] * d1w[c + 2] *
                 u(x + a * h * Eigen::VectorXd::Unit(N, i) + c * h * Eigen::VectorXd::Unit(N, j));
        }
      }
      H(i, j) = H(j, i) = hij / (h * h);
    }
  }
  return g.dot(H * g);
}

AmbientReport ambient_residual(const std::function<double(const Eigen::VectorXd&)>& u,
                               const std::vector<Eigen::VectorXd>& points, double relStep) {
  AmbientReport rep;
  for (const Eigen::VectorXd& x : points) {
    const double v = ambient_infinity_laplacian(u, x, relStep);
    if (!std::isfinite(v)) {
      ++rep.rejected;
      continue;
    }
    rep.values.push_back(v);
    ++rep.evaluated;
    rep.maxAbs = std::max(rep.maxAbs, std::abs(v));
    rep.maxNormalized = rep.maxAbs;
  }
  return rep;
}

AmbientReport ambient_residual(const SeparableSolution& sol, const std::vector<Eigen::VectorXd>& points,
                               double relStep, double exclusionFactor) {
  const bool planar = sol.domain.is_arc();
  if (sol.domain.is_general()) throw DomainError("ambient residual needs a rotationally reduced profile");
  const Eigen::Index dim = planar ? 2 : 3;
  auto angle = [planar](const Eigen::VectorXd& x) {
    if (planar) {
      const double a = std::atan2(x(1), x(0));
      return a < 0 ? a + 2 * std::numbers::pi : a;
    }
    return std::acos(std::clamp(x(2) / x.norm(), -1.0, 1.0));
  };
  const double beta = sol.beta;
  auto u = [&](const Eigen::VectorXd& x) { return std::pow(x.norm(), -beta) * sol.psi_at(angle(x)); };

  const double radius = exclusionFactor * sol.spacing();
  const std::vector<double> crit = critical_points(sol);
  const Eigen::Index n = sol.sigma.size();
  AmbientReport rep;
  for (const Eigen::VectorXd& x : points) {
    const double r = x.norm();
    if (x.size() != dim || !(r > 0) ||
        !in_smooth_region(angle(x), sol.sigma(0), sol.sigma(n - 1), crit, radius)) {
      ++rep.rejected;
      continue;
    }
    const double v = ambient_infinity_laplacian(u, x, relStep);
    rep.values.push_back(v);
    ++rep.evaluated;
    rep.maxAbs = std::max(rep.maxAbs, std::abs(v));
    rep.maxNormalized = std::max(rep.maxNormalized, std::abs(v) * std::pow(r, 3 * beta + 4));
  }
  return rep;
}

ComparisonReport comparison_check(const SeparableSolution& sol, double betaK, double tol, double exclusionFactor) {
  const double beta = sol.beta;
  if (beta == 0) throw DomainError("beta must be nonzero");
  ComparisonReport rep;
  rep.theta = betaK / beta;
  const double th = rep.theta;
  const Eigen::Index n = sol.sigma.size();
  const Eigen::VectorXd d1 = slopes(sol);
  const std::vector<std::uint8_t> keep = smooth_region(sol, exclusionFactor * sol.spacing());
  const double k2 = betaK * (2 * betaK + 1), k3 = betaK * betaK * betaK * (betaK + 1);
  rep.minScaled = std::numeric_limits<double>::infinity();
  rep.maxScaled = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    const double p = sol.psi(i);
    const double dp = d1(i);
    double ddp;
    if (sol.d2psi.size() == n && std::isfinite(sol.d2psi(i))) {
      ddp = sol.d2psi(i);
    } else {
      const Weights w = second_weights(sol.sigma(i) - sol.sigma(i - 1), sol.sigma(i + 1) - sol.sigma(i));
      ddp = w.m * sol.psi(i - 1) + w.c * p + w.p * sol.psi(i + 1);
    }
    if (!(p > 0) || !std::isfinite(dp) || !std::isfinite(ddp)) continue;
    const double phi = std::pow(p, th);
    const double dphi = th * std::pow(p, th - 1) * dp;
    const double ddphi = th * std::pow(p, th - 2) * ((th - 1) * dp * dp + p * ddp);
    // L_k carries the sign that makes it positive on strict subsolutions.
    const double L = -(dphi * dphi * ddphi + k2 * dphi * dphi * phi + k3 * phi * phi * phi);
    const double q = dp * dp + beta * beta * p * p;
    const double scale = std::abs(th * th * th) * std::pow(p, 3 * th - 4) * q * q;
    const double closed = th * th * th * std::pow(p, 3 * th - 4) * (beta - betaK) / beta * q * q;
    if (!(scale > 0)) continue;
    ++rep.count;
    rep.minScaled = std::min(rep.minScaled, L / scale);
    rep.maxScaled = std::max(rep.maxScaled, L / scale);
    rep.identityError = std::max(rep.identityError, std::abs(L - closed) / scale);
  }
  if (rep.count == 0) throw DomainError("comparison check found no interior nodes");
  rep.positive = rep.minScaled > -tol;
  return rep;
}

HarnackReport harnack_ratio_check(const SeparableSolution& psi1, const SeparableSolution& psi2, double margin) {
  HarnackReport rep;
  rep.supRatio = 0;
  rep.infRatio = std::numeric_limits<double>::infinity();
  const Eigen::Index n = psi1.sigma.size();
  const double lo = std::max(psi1.sigma(0), psi2.sigma(0)) + margin;
  const double hi = std::min(psi1.sigma(n - 1), psi2.sigma(psi2.sigma.size() - 1)) - margin;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = psi1.sigma(i);
    if (x < lo || x > hi) continue;
    const double a = psi1.psi(i), b = psi2.psi_at(x);
    if (!(a > 0 && b > 0)) continue;
    const double r = a / b;
    rep.supRatio = std::max(rep.supRatio, r);
    rep.infRatio = std::min(rep.infRatio, r);
    ++rep.count;
  }
  if (rep.count == 0) throw DomainError("no common interior nodes for the ratio check");
  rep.bound = rep.supRatio / rep.infRatio;
  return rep;
}

}  // namespace infsep
