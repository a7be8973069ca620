#include "infsep/viscosity.hpp"

#include <unsupported/Eigen/AutoDiff>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "infsep/boundary_layer.hpp"
#include "infsep/errors.hpp"

namespace infsep {

HamiltonianSpec HamiltonianSpec::make(double gamma, Case kind, double eps, double delta) {
  if (!(gamma > 0)) throw DomainError("gamma must be positive");
  if (!(eps >= 0) || !(delta >= 0)) throw DomainError("eps and delta must be non-negative");
  const int c = case_sign(kind);
  return {gamma, 2 * gamma + c, eps, delta, c};
}

std::string BoundaryPolicy::name() const {
  switch (kind) {
    case BoundaryKind::BarrierMatched:
      return "barrier_matched";
    case BoundaryKind::LargeConstant:
      return "large_constant";
    case BoundaryKind::Dirichlet:
      return "dirichlet";
  }
  return "unknown";
}

double Grid1D::curvature(double xi) const {
  return red.curvatureFactor == 0 ? 0.0 : red.curvatureFactor * std::cos(xi) / std::sin(xi);
}

double monotone_delta(double quad, double h, double safety) { return safety * quad * quad * h * h / 4; }

Grid1D make_grid_1d(const SphericalDomain& dom, int n, double rho0, double stretch) {
  if (n < 8) throw DomainError("1D grid needs at least 8 nodes");
  if (!(stretch >= 0)) throw DomainError("grid stretch must be non-negative");
  Grid1D g;
  g.red = reduce_1d(dom);
  g.rho0 = rho0;
  const Reduction1D& r = g.red;
  const double lo = r.blowA ? r.a + rho0 : r.a;
  const double hi = r.blowB ? r.b - rho0 : r.b;
  if (!(rho0 > 0 && lo < hi)) throw DomainError("cutoff rho0 leaves no interior");
  g.x.resize(n);
  const double tk = std::tanh(stretch);
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    double t;  // in [0, 1], fine where blow-up ends are
    if (stretch == 0)
      t = s;
    else if (r.blowA && r.blowB)
      t = 0.5 * (1 + std::tanh(stretch * (2 * s - 1)) / tk);
    else if (r.blowB)
      t = std::tanh(stretch * s) / tk;
    else if (r.blowA)
      t = 1 - std::tanh(stretch * (1 - s)) / tk;
    else
      t = s;
    g.x(i) = lo + (hi - lo) * t;
  }
  g.x(0) = lo;
  g.x(n - 1) = hi;
  g.h = (g.x.tail(n - 1) - g.x.head(n - 1)).maxCoeff();
  if (g.h > rho0) throw DomainError("grid spacing exceeds the cutoff rho0; increase n");
  g.rho.resize(n);
  for (int i = 0; i < n; ++i) {
    double d = std::numeric_limits<double>::infinity();
    if (r.blowA) d = std::min(d, g.x(i) - r.a);
    if (r.blowB) d = std::min(d, r.b - g.x(i));
    g.rho(i) = d;
  }
  Eigen::Index best = 0;
  (g.x.array() - r.sigma0).abs().minCoeff(&best);
  g.sigma0Index = static_cast<int>(best);
  return g;
}

namespace {

using Deriv3 = Eigen::Matrix<double, 3, 1>;
using AD3 = Eigen::AutoDiffScalar<Deriv3>;

// Interior row; wm, w0, wp are the left, centre and right values.
template <typename T>
T interior_row(const T& wm, const T& w0, const T& wp, double hm, double hp, double curv, const HamiltonianSpec& ham) {
  const double dx = 0.5 * (hm + hp);
  const T pm = (w0 - wm) / hm;
  const T pp = (wp - w0) / hp;
  const T inf = (pp * pp * pp - pm * pm * pm) / (3 * dx);
  const T lap = (pp - pm) / dx + curv * (wp - wm) / (hm + hp);
  const T pm2 = pm * pm, pp2 = pp * pp;
  const T ham2 = 0.5 * (ham.gamma * (pp2 * pp2 + pm2 * pm2) + ham.quad * (pp2 + pm2));
  return -inf - ham.delta * lap + ham2 + ham.eps * w0;
}

// Reflecting end: ghost value mirrors the neighbour, pm = -pp.
template <typename T>
T reflecting_row(const T& w0, const T& w1, double h0, double lapFactor, const HamiltonianSpec& ham) {
  const T pp = (w1 - w0) / h0;
  const T pp2 = pp * pp;
  const T inf = 2 * pp2 * pp / (3 * h0);
  const T lap = lapFactor * 2 * pp / h0;
  return -inf - ham.delta * lap + ham.gamma * pp2 * pp2 + ham.quad * pp2 + ham.eps * w0;
}

struct Row {
  double r = 0;
  double scale = 1;
  int cols[3] = {-1, -1, -1};
  double d[3] = {0, 0, 0};
};

Row assemble_row(int i, const HamiltonianSpec& ham, const Grid1D& g, const BoundaryPolicy& policy,
                 const Eigen::VectorXd& w) {
  const int n = static_cast<int>(w.size());
  const Reduction1D& red = g.red;
  Row row;
  const bool cutA = i == 0 && red.blowA;
  const bool cutB = i == n - 1 && red.blowB;
  if (cutA || cutB) {
    const int q = cutA ? 1 : n - 2;
    const double fixed = cutA ? policy.valueA : policy.valueB;
    row.cols[0] = i;
    row.d[0] = 1;
    if (policy.kind == BoundaryKind::BarrierMatched) {
      const LayerCoefficients c{ham.gamma, ham.gamma * ham.quad, ham.gamma * ham.gamma * ham.gamma * ham.eps * w(q)};
      const double inc = layer_increment(g.rho(i), g.rho(q), c);
      row.r = w(i) - w(q) - inc;
      row.cols[1] = q;
      row.d[1] = -1 - layer_increment_dp2(g.rho(i), g.rho(q), c) * ham.gamma * ham.gamma * ham.gamma * ham.eps;
      row.scale = 1 + std::abs(inc);
    } else {
      row.r = w(i) - fixed;
      row.scale = 1 + std::abs(fixed);
    }
    return row;
  }
  if (i == 0 || i == n - 1) {
    const int nb = i == 0 ? 1 : n - 2;
    const double h0 = std::abs(g.x(nb) - g.x(i));
    const double lapFactor = 1 + red.curvatureFactor;
    const AD3 w0(w(i), 3, 0), w1(w(nb), 3, 1);
    const AD3 r = reflecting_row(w0, w1, h0, lapFactor, ham);
    row.r = r.value();
    row.cols[0] = i;
    row.cols[1] = nb;
    row.d[0] = r.derivatives()(0);
    row.d[1] = r.derivatives()(1);
    const double pp = std::abs(w(nb) - w(i)) / h0;
    row.scale = 1 + pp * pp * pp / h0 + ham.delta * lapFactor * pp / h0 + ham.gamma * pp * pp * pp * pp +
                std::abs(ham.quad) * pp * pp + ham.eps * std::abs(w(i));
    return row;
  }
  const double hm = g.x(i) - g.x(i - 1), hp = g.x(i + 1) - g.x(i);
  const AD3 wm(w(i - 1), 3, 0), w0(w(i), 3, 1), wp(w(i + 1), 3, 2);
  const AD3 r = interior_row(wm, w0, wp, hm, hp, g.curvature(g.x(i)), ham);
  row.r = r.value();
  row.cols[0] = i - 1;
  row.cols[1] = i;
  row.cols[2] = i + 1;
  for (int k = 0; k < 3; ++k) row.d[k] = r.derivatives()(k);
  const double dx = 0.5 * (hm + hp);
  const double pm = std::abs(w(i) - w(i - 1)) / hm, pp = std::abs(w(i + 1) - w(i)) / hp;
  row.scale = 1 + (pm * pm * pm + pp * pp * pp) / (3 * dx) + ham.delta * (pm + pp) / dx +
              0.5 * ham.gamma * (pm * pm * pm * pm + pp * pp * pp * pp) + 0.5 * std::abs(ham.quad) * (pm * pm + pp * pp) +
              ham.eps * std::abs(w(i));
  return row;
}

void assemble(const HamiltonianSpec& ham, const Grid1D& g, const BoundaryPolicy& policy, const Eigen::VectorXd& w,
              Eigen::VectorXd& r, Eigen::VectorXd& s, Eigen::SparseMatrix<double>* J) {
  const int n = static_cast<int>(w.size());
  r.resize(n);
  s.resize(n);
  std::vector<Eigen::Triplet<double>> trips;
  if (J) trips.reserve(3 * n);
  for (int i = 0; i < n; ++i) {
    const Row row = assemble_row(i, ham, g, policy, w);
    r(i) = row.r;
    s(i) = row.scale;
    if (J)
      for (int k = 0; k < 3; ++k)
        if (row.cols[k] >= 0) trips.emplace_back(i, row.cols[k], row.d[k]);
  }
  if (J) {
    J->resize(n, n);
    J->setFromTriplets(trips.begin(), trips.end());
  }
}

Eigen::VectorXd initial_guess(const HamiltonianSpec& ham, const Grid1D& g, const BoundaryPolicy& policy) {
  if (policy.kind == BoundaryKind::BarrierMatched) return (-g.rho.array().log() / ham.gamma).matrix();
  // Fixed cut values: start from the line through them, which has a bounded gradient.
  const Eigen::Index n = g.x.size();
  const double a = g.red.blowA ? policy.valueA : (g.red.blowB ? policy.valueB : policy.valueA);
  const double b = g.red.blowB ? policy.valueB : a;
  const double span = g.x(n - 1) - g.x(0);
  return (a + (b - a) * (g.x.array() - g.x(0)) / span).matrix();
}

}  // namespace

Eigen::VectorXd residual_1d(const HamiltonianSpec& ham, const Grid1D& grid, const BoundaryPolicy& policy,
                            const Eigen::VectorXd& w) {
  Eigen::VectorXd r, s;
  assemble(ham, grid, policy, w, r, s, nullptr);
  return r;
}

MonotonicityReport check_monotone_1d(const HamiltonianSpec& ham, const Grid1D& grid, const BoundaryPolicy& policy,
                                     const Eigen::VectorXd& w) {
  MonotonicityReport rep;
  const int n = static_cast<int>(w.size());
  for (int i = 0; i < n; ++i) {
    const Row row = assemble_row(i, ham, grid, policy, w);
    double diag = 0;
    for (int k = 0; k < 3; ++k)
      if (row.cols[k] == i) diag = row.d[k];
    if (!(diag > 0)) {
      ++rep.violations;
      rep.worst = std::max(rep.worst, 1.0);
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      if (row.cols[k] < 0 || row.cols[k] == i) continue;
      const double ratio = row.d[k] / diag;
      if (ratio > 1e-12) {
        ++rep.violations;
        rep.worst = std::max(rep.worst, ratio);
      }
    }
  }
  return rep;
}

SolveResult solve_1d(const SphericalDomain& dom, const HamiltonianSpec& ham, const Grid1D& grid,
                     const BoundaryPolicy& policy, const SolveOptions& opt) {
  (void)dom;
  const int n = static_cast<int>(grid.x.size());
  Eigen::VectorXd w = opt.warmStart ? *opt.warmStart : initial_guess(ham, grid, policy);
  if (w.size() != n) throw DomainError("warm start has the wrong size");
  const Assembler asmb = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r, Eigen::VectorXd& s,
                             Eigen::SparseMatrix<double>* J) { assemble(ham, grid, policy, v, r, s, J); };
  const NewtonReport rep = newton_solve(asmb, w, opt.newton);
  if (!rep.converged)
    throw ConvergenceError("1D Newton iteration did not converge (eps " + std::to_string(ham.eps) + ")",
                           rep.residualNorm, rep.iterations);
  if (opt.checkMonotone) {
    const MonotonicityReport m = check_monotone_1d(ham, grid, policy, w);
    if (m.violations > 0)
      throw SchemeError("1D scheme is not monotone at the solution (" + std::to_string(m.violations) +
                        " entries); raise delta or refine the grid");
  }

  SolveResult res;
  res.w = w;
  res.coords = grid.x;
  res.rho = grid.rho;
  res.h = grid.h;
  res.gradNorm.resize(n);
  res.band.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    double gmax = 0;
    if (i > 0) gmax = std::max(gmax, std::abs(w(i) - w(i - 1)) / (grid.x(i) - grid.x(i - 1)));
    if (i + 1 < n) gmax = std::max(gmax, std::abs(w(i + 1) - w(i)) / (grid.x(i + 1) - grid.x(i)));
    res.gradNorm(i) = gmax;
  }
  if (grid.red.blowA) res.band[0] = 1;
  if (grid.red.blowB) res.band[n - 1] = 1;
  res.sigma0Index = grid.sigma0Index;
  res.iterations = rep.iterations;
  res.pseudoSteps = rep.pseudoSteps;
  res.residualNorm = rep.residualNorm;
  res.converged = true;
  res.boundaryPolicyUsed = policy;
  return res;
}

GradientBoundReport gradient_bound_check(const SolveResult& res, const HamiltonianSpec& ham, double nearBand) {
  GradientBoundReport rep;
  for (Eigen::Index i = 0; i < res.w.size(); ++i) {
    if (res.band[i]) continue;
    ++rep.nodes;
    rep.maxScaledGradient = std::max(rep.maxScaledGradient, ham.gamma * res.rho(i) * res.gradNorm(i));
    if (res.rho(i) <= nearBand)
      rep.maxBarrierOffset = std::max(rep.maxBarrierOffset, std::abs(res.w(i) + std::log(res.rho(i)) / ham.gamma));
  }
  return rep;
}

}  // namespace infsep
