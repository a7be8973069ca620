#include "infsep/ergodic_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "infsep/errors.hpp"

namespace infsep {
namespace {

constexpr double kPi = std::numbers::pi;

// Largest ball radius of the domain (half length for two-ended arcs).
double inner_scale(const SphericalDomain& dom) {
  if (const auto* a = std::get_if<ArcDomain>(&dom.kind)) return a->bothEnds ? a->length / 2 : a->length;
  return inradius(dom).radius;
}

struct Level {
  double estimate = 0;
  double epsError = 0;
  bool monotone = true;
  SolveResult last;
};

template <typename Solve>
Level run_schedule(const ErgodicConfig& cfg, double gamma, double h, std::vector<ErgodicStage>& stages,
                   const Solve& solve) {
  if (cfg.stages < 3) throw DomainError("the eps schedule needs at least three stages");
  if (!(cfg.eps0 > 0)) throw DomainError("eps0 must be positive");
  const double quad = 2 * gamma + case_sign(cfg.kind);
  const double delta = monotone_delta(quad, h, cfg.deltaSafety);
  std::vector<double> v;
  Eigen::VectorXd w;
  Level lv;
  double epsPrev = 0;
  for (int k = 0; k < cfg.stages; ++k) {
    const double eps = cfg.eps0 * std::ldexp(1.0, -k);
    const HamiltonianSpec ham = HamiltonianSpec::make(gamma, cfg.kind, eps, delta);
    SolveOptions opt;
    opt.newton = cfg.newton;
    Eigen::VectorXd warm;
    if (k > 0) {
      // eps w ~ lambda: shift by lambda (1/eps - 1/eps_prev).
      warm = w;
      warm.array() += v.back() * (1 / eps - 1 / epsPrev);
      opt.warmStart = &warm;
    }
    try {
      lv.last = solve(ham, opt);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(std::string(e.what()) + " at stage " + std::to_string(k), e.lastResidual, k);
    }
    w = lv.last.w;
    epsPrev = eps;
    v.push_back(eps * lv.last.value_at_sigma0());
    stages.push_back({eps, delta, h, v.back()});
  }
  const std::size_t K = v.size() - 1;
  lv.estimate = 2 * v[K] - v[K - 1];
  lv.epsError = std::abs(lv.estimate - (2 * v[K - 1] - v[K - 2]));
  const double d1 = v[K] - v[K - 1], d2 = v[K - 1] - v[K - 2];
  lv.monotone = d1 * d2 >= 0;
  return lv;
}

}  // namespace

double effective_rho0(const SphericalDomain& dom, double gamma, const ErgodicConfig& cfg) {
  double r = std::min(cfg.rho0, inner_scale(dom) / 4);
  // The layer profile flattens within pi / (2 sqrt q); keep the cut well inside.
  const double q = gamma * (2 * gamma + case_sign(cfg.kind));
  if (q > 0) r = std::min(r, kPi / (8 * std::sqrt(q)));
  return r;
}

ErgodicRun estimate_lambda(const SphericalDomain& dom, double gamma, const ErgodicConfig& cfg) {
  if (!(gamma > 0)) throw DomainError("gamma must be positive");
  ErgodicRun run;
  run.gamma = gamma;
  run.domain = dom.describe();
  run.twoD = dom.is_general() || (cfg.force2d && !dom.is_arc());
  run.rho0 = effective_rho0(dom, gamma, cfg);
  const int levels = cfg.refine ? 2 : 1;
  std::vector<Level> lv;
  for (int l = 0; l < levels; ++l) {
    if (run.twoD) {
      Grid2DOptions go;
      go.dtheta = cfg.dtheta / (1 << l);
      go.nphi = cfg.nphi;
      go.rho0 = run.rho0;
      const Grid2D grid = make_grid_2d(dom, go);
      lv.push_back(run_schedule(cfg, gamma, go.dtheta, run.stages, [&](const HamiltonianSpec& ham, const SolveOptions& o) {
        return solve_2d(dom, ham, grid, BoundaryPolicy::barrier(), o);
      }));
    } else {
      const Grid1D grid = make_grid_1d(dom, (cfg.n1d - 1) * (1 << l) + 1, run.rho0, cfg.stretch);
      lv.push_back(run_schedule(cfg, gamma, grid.h, run.stages, [&](const HamiltonianSpec& ham, const SolveOptions& o) {
        return solve_1d(dom, ham, grid, BoundaryPolicy::barrier(), o);
      }));
    }
    run.levelEstimates.push_back(lv.back().estimate);
    run.monotoneTail = run.monotoneTail && lv.back().monotone;
  }
  if (levels == 2) {
    run.lambdaEstimate = (4 * lv[1].estimate - lv[0].estimate) / 3;
    run.extrapolationError = lv[1].epsError + std::abs(lv[1].estimate - lv[0].estimate) / 3;
  } else {
    run.lambdaEstimate = lv[0].estimate;
    run.extrapolationError = lv[0].epsError;
  }
  run.finest = std::move(lv.back().last);
  return run;
}

Bracket bracket_from_caps(const SphericalDomain& dom, Case kind) {
  double ai, ae;
  if (const auto* a = std::get_if<ArcDomain>(&dom.kind)) {
    // An arc blown up at both ends has the one-dimensional problem of a cap of
    // half its length; with one end, of a cap of its full length.
    ai = ae = a->bothEnds ? a->length / 2 : a->length;
  } else {
    if (const auto* g = std::get_if<GeneralS2Domain>(&dom.kind); g && g->mask.count() == 0)
      throw DomainError("empty domain");
    ai = inradius(dom).radius;
    ae = circumradius(dom).radius;
  }
  if (!(ai > 0)) throw DomainError("domain has empty interior");
  ae = std::max(ae, ai);
  Bracket b;
  if (kind == Case::Singular) {
    b.lo = beta_cap(CapGeometry<double>{std::min(ae, kPi)});
    b.hi = beta_cap(CapGeometry<double>{ai});
  } else {
    if (ae >= kPi / 2) {
      b.lo = 0.05;
      b.hi = 20;
      b.fallback = true;
      return b;
    }
    b.lo = mu_cap(CapGeometry<double>{ae});
    b.hi = mu_cap(CapGeometry<double>{ai});
  }
  if (b.hi - b.lo <= 1e-12 * b.hi) {
    const double m = b.lo;
    b.lo = 0.75 * m;
    b.hi = 1.25 * m;
    b.widened = true;
  }
  return b;
}

EigenResult find_exponent(const SphericalDomain& dom, Case kind, const EigenConfig& cfg, const Bracket* userBracket) {
  EigenResult res;
  res.caseSign = case_sign(kind);
  ErgodicConfig ec = cfg.ergodic;
  ec.kind = kind;
  res.initial = userBracket ? *userBracket : bracket_from_caps(dom, kind);
  auto g = [&](double gamma) {
    const double v = estimate_lambda(dom, gamma, ec).lambdaEstimate - gamma - res.caseSign;
    res.evaluations.emplace_back(gamma, v);
    return v;
  };

  double lo = res.initial.lo, hi = res.initial.hi;
  double glo, ghi;
  if (res.initial.fallback) {
    // Expand outward from the geometric middle of the default bracket so the
    // steep large-gamma end is reached only when needed.
    const double mid = std::sqrt(lo * hi);
    const double gm = g(mid);
    const double floorLo = lo, ceilHi = hi;
    if (gm > 0) {
      lo = mid;
      glo = gm;
      hi = mid;
      ghi = gm;
      while (ghi > 0) {
        if (hi >= ceilHi) throw BracketError("no sign change of lambda(g) - g - c in the default bracket");
        lo = hi;
        glo = ghi;
        hi = std::min(ceilHi, hi * 1.5);
        ghi = g(hi);
      }
    } else {
      hi = mid;
      ghi = gm;
      lo = mid;
      glo = gm;
      while (glo <= 0) {
        if (lo <= floorLo) throw BracketError("no sign change of lambda(g) - g - c in the default bracket");
        hi = lo;
        ghi = glo;
        lo = std::max(floorLo, lo / 1.5);
        glo = g(lo);
      }
    }
  } else {
    glo = g(lo);
    ghi = g(hi);
    for (int k = 0; k < cfg.maxWidenings && (glo <= 0 || ghi >= 0); ++k) {
      res.bracketHistory.emplace_back(lo, hi);
      if (glo <= 0) {
        hi = lo;
        ghi = glo;
        lo = std::max(cfg.floor, lo / 1.5);
        glo = g(lo);
      } else {
        lo = hi;
        glo = ghi;
        hi = std::min(cfg.ceiling, hi * 1.5);
        ghi = g(hi);
      }
    }
    if (glo <= 0 || ghi >= 0) throw BracketError("no sign change of lambda(g) - g - c on the bracket");
  }
  res.bracketHistory.emplace_back(lo, hi);
  while (hi - lo > cfg.relTol * hi) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm > 0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
    res.bracketHistory.emplace_back(lo, hi);
  }
  // Secant point inside the final bracket.
  res.exponent = lo + glo * (hi - lo) / (glo - ghi);
  const ErgodicRun at = estimate_lambda(dom, res.exponent, ec);
  res.lambdaAt = at.lambdaEstimate;
  res.residual = at.lambdaEstimate - res.exponent - res.caseSign;
  return res;
}

InsideOutside inside_outside_exponents(const SphereMask& mask, Case kind, const EigenConfig& cfg) {
  InsideOutside io;
  io.inside = find_exponent(SphericalDomain::general(mask.eroded()), kind, cfg);
  io.outside = find_exponent(SphericalDomain::general(mask.dilated()), kind, cfg);
  return io;
}

}  // namespace infsep
