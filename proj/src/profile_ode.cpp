#include "infsep/profile_ode.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "dopri.hpp"
#include "infsep/errors.hpp"

namespace infsep {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_unit_regular(double beta) { return std::abs(beta + 1) < 1e-14; }

void require_arctan(double beta) {
  if (beta == 0) throw DomainError("beta must be nonzero");
  if (beta > -1 && beta < 0 && !is_unit_regular(beta))
    throw CaseError("beta in (-1, 0) has no arctan relation");
}

// Samples of one half arch: Y and ln psi at distances t from the critical point.
struct HalfArch {
  std::vector<double> y;
  std::vector<double> logPsi;
  double length = 0;
};

using Dopri2 = detail::Dopri<2>;
using Vec2 = Dopri2::Vec;

// Final stretch in u = 1/Y with u as the independent variable: returns the
// remaining distance to the zero of psi.
double tail_length(double beta, double u0) {
  const double b2 = beta * beta, c2 = beta * (beta + 1);
  Dopri2 ode;
  auto f = [&](double u, const Vec2&) {
    Vec2 d;
    d(0) = 1.0 / ((1 + b2 * u * u) * (1 + c2 * u * u));
    d(1) = 0;
    return d;
  };
  double u = u0, h = 1e-3;
  Vec2 s(0, 0);
  if (!ode.advance(f, u, s, 0.0, h, [](double, const Vec2&) { return false; }))
    throw ConvergenceError("tail integration failed", std::abs(u), 0);
  return s(0);
}

// Phase 1 integrates z = Y^3 (smooth through Y = 0); phase 2 integrates
// u = 1/Y and chi = ln psi - ln|u| once |Y| >= 1. Both are regular, so the
// 1/3-power kink and the zero of psi need no special stencil.
HalfArch integrate_half(double beta, const std::vector<double>& ts, bool wantLength) {
  const double b2 = beta * beta, c2 = beta * (beta + 1);
  const bool unit = is_unit_regular(beta);
  Dopri2 ode;
  HalfArch out;
  out.y.reserve(ts.size());
  out.logPsi.reserve(ts.size());

  auto phase1 = [&](double, const Vec2& s) {
    Vec2 d;
    if (unit) {
      d(0) = -(s(0) * s(0) + 1);
      d(1) = s(0);
    } else {
      const double y = std::cbrt(s(0));
      d(0) = -3 * (y * y + b2) * (y * y + c2);
      d(1) = y;
    }
    return d;
  };
  auto slope1 = [&](const Vec2& s) { return unit ? s(0) : std::cbrt(s(0)); };
  auto phase2 = [&](double, const Vec2& s) {
    const double u = s(0);
    Vec2 d;
    d(0) = (1 + b2 * u * u) * (1 + c2 * u * u);
    d(1) = -(b2 + c2) * u - b2 * c2 * u * u * u;
    return d;
  };

  double t = 0, h = 1e-6;
  Vec2 s(0, 0);
  std::size_t idx = 0;
  auto leaves1 = [&](double, const Vec2& st) { return slope1(st) <= -1; };
  bool inPhase2 = false;
  const double tMax = 8 * kPi;
  for (; idx < ts.size() && !inPhase2; ++idx) {
    if (!ode.advance(phase1, t, s, ts[idx], h, leaves1))
      throw ConvergenceError("profile integration failed near the critical point", t, 0);
    if (t < ts[idx]) {
      inPhase2 = true;
      break;
    }
    out.y.push_back(slope1(s));
    out.logPsi.push_back(s(1));
  }
  if (!inPhase2 && wantLength) {
    if (!ode.advance(phase1, t, s, tMax, h, leaves1))
      throw ConvergenceError("profile integration failed near the critical point", t, 0);
    if (slope1(s) > -1) throw PeriodError("psi has no zero on this branch");
    inPhase2 = true;
  }
  if (!inPhase2) return out;

  const double y1 = slope1(s);
  Vec2 v(1.0 / y1, s(1) - std::log(std::abs(1.0 / y1)));
  auto crossed = [](double, const Vec2& st) { return st(0) >= 0; };
  for (; idx < ts.size(); ++idx) {
    if (!ode.advance(phase2, t, v, ts[idx], h, crossed))
      throw ConvergenceError("profile integration failed near the zero of psi", t, 0);
    if (v(0) >= 0) throw PeriodError("arc is longer than the branch of this exponent");
    out.y.push_back(1.0 / v(0));
    out.logPsi.push_back(v(1) + std::log(std::abs(v(0))));
  }
  if (wantLength) out.length = t + tail_length(beta, v(0));
  return out;
}

}  // namespace

ImplicitRelation make_relation(double beta, double alphaCrit) {
  if (beta == 0) throw DomainError("beta must be nonzero");
  const bool logForm = beta > -1 && beta < 0;
  return {beta, alphaCrit, logForm ? RelationKind::LogForm : RelationKind::Arctan};
}

double branch_length(double beta) {
  require_arctan(beta);
  if (is_unit_regular(beta)) return kPi / 2;
  const double c = std::sqrt(beta * (beta + 1));
  const double sgn = beta > 0 ? 1.0 : -1.0;
  return kPi / 2 * std::abs(sgn - (beta + 1) / c);
}

double relation_value(double beta, double y) {
  require_arctan(beta);
  if (is_unit_regular(beta)) return std::atan(y / beta);
  const double c = std::sqrt(beta * (beta + 1));
  const double k = (beta + 1) / c;
  const double m = std::min(std::abs(beta), c);
  if (std::abs(y) < 0.1 * m) {
    // The linear terms cancel; sum the odd series from y^3.
    const double yb = y / beta, yc = y / c;
    const double yb2 = yb * yb, yc2 = yc * yc;
    double pb = yb * yb2, pc = yc * yc2, sum = 0, sign = -1;
    for (int j = 1; j < 40; ++j) {
      const double term = sign * (pb - k * pc) / (2 * j + 1);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      pb *= yb2;
      pc *= yc2;
      sign = -sign;
    }
    return sum;
  }
  return std::atan(y / beta) - k * std::atan(y / c);
}

double invert_y(const ImplicitRelation& rel, double sigma) {
  if (rel.kind == RelationKind::LogForm) throw CaseError("invert_y needs the arctan relation");
  const double beta = rel.beta;
  const double d = sigma - rel.alphaCrit;
  const double ell = branch_length(beta);
  if (std::abs(d) > ell * (1 + 1e-13)) throw BranchError("sigma outside the monotone branch");
  if (std::abs(d) >= ell) return d < 0 ? kInf : -kInf;
  if (d == 0) return 0;

  // F is decreasing in Y; bracket on theta = atan(Y).
  auto g = [&](double th) { return relation_value(beta, std::tan(th)) - d; };
  double lo = -kPi / 2, hi = kPi / 2;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  const double b2 = beta * beta, c2 = beta * (beta + 1);
  double th = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gv = g(th);
    if (gv == 0) break;
    (gv > 0 ? lo : hi) = th;
    const double y = std::tan(th);
    const double dg = -y * y * (1 + y * y) / ((y * y + b2) * (y * y + c2));
    double next = dg != 0 ? th - gv / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - th) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(th)) ||
        hi - lo <= 4 * std::numeric_limits<double>::epsilon()) {
      th = next;
      break;
    }
    th = next;
  }
  return std::tan(th);
}

double log_psi_from_y(double beta, double y) {
  require_arctan(beta);
  if (std::isinf(y)) return -kInf;
  const double t = y * y;
  double r = 0.5 * beta * std::log1p(t / (beta * beta));
  if (!is_unit_regular(beta)) r -= 0.5 * (beta + 1) * std::log1p(t / (beta * (beta + 1)));
  return r;
}

double critical_constant(double beta) { return std::pow(3.0, 4.0 / 3.0) / 4 * beta * std::cbrt(beta + 1); }

SeriesValue series_near_critical(double beta, double delta) {
  const double cd = std::cbrt(delta);
  return {-beta * std::cbrt(3 * beta + 3) * cd, 1 - critical_constant(beta) * cd * cd * cd * cd};
}

double direct_branch_length(double beta) {
  if (beta == 0) throw DomainError("beta must be nonzero");
  return integrate_half(beta, {}, true).length;
}

Profile build_profile(double beta, const ProfileArc& arc, ProfileMethod method, int n) {
  if (n < 3) throw DomainError("profile needs at least 3 nodes");
  if (!(arc.length > 0)) throw DomainError("arc length must be positive");
  if (beta == 0) throw DomainError("beta must be nonzero");

  const double L = arc.length;
  const double half = arc.criticalAtStart ? L : L / 2;
  const double sc = arc.criticalAtStart ? 0 : L / 2;
  Profile p;
  p.beta = beta;
  p.arc = arc;
  p.sigma0 = sc;
  p.sigma = Eigen::VectorXd::LinSpaced(n, 0, L);
  p.psi.resize(n);
  p.y.resize(n);

  auto is_zero_end = [&](int i) { return i == n - 1 || (!arc.criticalAtStart && i == 0); };

  if (method == ProfileMethod::Implicit) {
    const ImplicitRelation rel = make_relation(beta, sc);
    if (rel.kind == RelationKind::LogForm)
      throw CaseError("beta in (-1, 0) is supported by direct integration only");
    const double ell = branch_length(beta);
    if (std::abs(ell - half) > 1e-9 * std::max(1.0, half))
      throw PeriodError("arc length does not match the branch length of this exponent");
    for (int i = 0; i < n; ++i) {
      if (is_zero_end(i)) {
        p.y(i) = p.sigma(i) < sc ? kInf : -kInf;
        p.psi(i) = 0;
        continue;
      }
      const double sig = std::clamp(p.sigma(i), sc - ell, sc + ell);
      p.y(i) = invert_y(rel, sig);
      p.psi(i) = std::exp(log_psi_from_y(beta, p.y(i)));
    }
    return p;
  }

  // Direct: integrate the right half and mirror (Y is odd about the critical point).
  std::vector<double> ts;
  std::vector<int> nodes;
  for (int i = 0; i < n; ++i) {
    if (is_zero_end(i)) continue;
    ts.push_back(std::abs(p.sigma(i) - sc));
    nodes.push_back(i);
  }
  std::vector<int> order(ts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return ts[a] < ts[b]; });
  std::vector<double> sorted(ts.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = ts[order[i]];
  const HalfArch h = integrate_half(beta, sorted, true);
  if (std::abs(h.length - half) > 1e-8 * std::max(1.0, half))
    throw PeriodError("direct integration reaches the zero of psi away from the arc end");
  for (std::size_t j = 0; j < order.size(); ++j) {
    const int i = nodes[order[j]];
    const double sgn = p.sigma(i) < sc ? -1.0 : 1.0;
    p.y(i) = sgn * h.y[j];
    p.psi(i) = std::exp(h.logPsi[j]);
  }
  for (int i = 0; i < n; ++i) {
    if (!is_zero_end(i)) continue;
    p.y(i) = p.sigma(i) < sc ? kInf : -kInf;
    p.psi(i) = 0;
  }
  return p;
}

double shoot_exponent(const ProfileArc& arc, bool singular, double tol) {
  const double target = arc.criticalAtStart ? arc.length : arc.length / 2;
  if (!(target > 0)) throw DomainError("arc length must be positive");
  // Branch length decreases in |beta| on both branches.
  if (!singular && target > kPi / 2 * (1 + 1e-12)) throw BracketError("regular branches are at most pi/2 long");
  auto excess = [&](double m) {
    const double beta = singular ? m : -m;
    try {
      return direct_branch_length(beta) - target;
    } catch (const PeriodError&) {
      return std::numeric_limits<double>::max();
    }
  };
  double lo = singular ? 1.0 : 1.0 + 1e-9, hi = 2.0;
  double flo = excess(lo);
  for (int i = 0; i < 60 && flo < 0; ++i) {
    if (!singular) throw BracketError("no regular exponent fits this arc");
    hi = lo;
    lo /= 4;
    flo = excess(lo);
  }
  for (int i = 0; i < 60 && excess(hi) > 0; ++i) {
    lo = hi;
    hi *= 4;
  }
  if (excess(lo) < 0 || excess(hi) > 0) throw BracketError("no exponent fits this arc");
  for (int it = 0; it < 200 && hi - lo > tol * lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0 ? lo : hi) = mid;
  }
  const double m = 0.5 * (lo + hi);
  return singular ? m : -m;
}

Profile antiperiodic_extend(const Profile& p, int k) {
  if (k < 1) throw DomainError("k must be positive");
  const double arch = kPi / k;
  std::vector<double> s, psi, y;
  const Eigen::Index n = p.sigma.size();
  if (p.arc.criticalAtStart) {
    const double L = p.arc.length;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      s.push_back(L - p.sigma(i));
      psi.push_back(p.psi(i));
      y.push_back(-p.y(i));
    }
    for (Eigen::Index i = 1; i < n; ++i) {
      s.push_back(L + p.sigma(i));
      psi.push_back(p.psi(i));
      y.push_back(p.y(i));
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      s.push_back(p.sigma(i));
      psi.push_back(p.psi(i));
      y.push_back(p.y(i));
    }
  }
  if (std::abs(s.back() - arch) > 1e-9) throw PeriodError("arch length is not pi/k");
  const std::size_t m = s.size();
  Profile out;
  out.beta = p.beta;
  out.arc = {2 * kPi, false};
  out.arches = 2 * k;
  const Eigen::Index total = static_cast<Eigen::Index>(2 * k * (m - 1) + 1);
  out.sigma.resize(total);
  out.psi.resize(total);
  out.y.resize(total);
  Eigen::Index j = 0;
  for (int a = 0; a < 2 * k; ++a) {
    const double sgn = a % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t i = a == 0 ? 0 : 1; i < m; ++i, ++j) {
      out.sigma(j) = s[i] + a * arch;
      out.psi(j) = sgn * psi[i];
      out.y(j) = y[i];
    }
  }
  out.sigma0 = arch / 2;
  return out;
}

double quartic_alpha_pi(double sigma) {
  if (sigma <= 0) return kInf;
  if (sigma >= kPi) return 0;
  const double sn = std::sin(sigma), cs = std::cos(sigma);
  // Monic form of 3 s Z^4 - 8 c Z^3 - 6 s Z^2 - s.
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  comp(1, 0) = comp(2, 1) = comp(3, 2) = 1;
  comp(0, 3) = 1.0 / 3.0;
  comp(1, 3) = 0;
  comp(2, 3) = 2;
  comp(3, 3) = 8 * cs / (3 * sn);
  const Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
  auto poly = [&](double z) { return ((3 * sn * z - 8 * cs) * z - 6 * sn) * z * z - sn; };
  auto dpoly = [&](double z) { return ((12 * sn * z - 24 * cs) * z - 12 * sn) * z; };
  double best = kInf, bestY = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < 4; ++i) {
    const std::complex<double> r = es.eigenvalues()(i);
    if (r.real() <= 0 || std::abs(r.imag()) > 1e-6 * (1 + std::abs(r.real()))) continue;
    double z = r.real();
    for (int it = 0; it < 50; ++it) {
      const double dp = dpoly(z);
      if (dp == 0) break;
      const double step = poly(z) / dp;
      z -= step;
      if (std::abs(step) <= 1e-16 * std::abs(z)) break;
    }
    const double y = 3 * z / 8;
    const double res = std::abs(relation_value(0.125, y) - (sigma - kPi));
    if (res < best) {
      best = res;
      bestY = y;
    }
  }
  if (!std::isfinite(bestY)) throw ConvergenceError("quartic has no admissible root", best, 0);
  return bestY;
}

}  // namespace infsep
