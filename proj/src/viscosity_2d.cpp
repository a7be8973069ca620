#include "infsep/viscosity.hpp"

#include <Eigen/Geometry>
#include <unsupported/Eigen/AutoDiff>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>
#include <vector>

#include "infsep/boundary_layer.hpp"
#include "infsep/errors.hpp"

namespace infsep {
namespace {

constexpr double kPi = std::numbers::pi;

using Deriv9 = Eigen::Matrix<double, 9, 1>;
using AD9 = Eigen::AutoDiffScalar<Deriv9>;

// Ring stencil slots: centre, theta+, theta-, phi+, phi-, (+,+), (+,-), (-,+), (-,-).
enum Slot { C = 0, TP, TM, FP, FM, PP, PM, MP, MM };

template <typename T>
T ring_row(const T* v, double theta, double dth, double dph, const HamiltonianSpec& ham) {
  const double s = std::sin(theta), co = std::cos(theta);
  const double sp = std::sin(theta + dth / 2), sm = std::sin(theta - dth / 2);
  const T ptp = (v[TP] - v[C]) / dth, ptm = (v[C] - v[TM]) / dth;
  const T pfp = (v[FP] - v[C]) / dph, pfm = (v[C] - v[FM]) / dph;
  const T wt = (v[TP] - v[TM]) / (2 * dth);
  const T wf = (v[FP] - v[FM]) / (2 * dph);
  const T wtf = (v[PP] - v[PM] - v[MP] + v[MM]) / (4 * dth * dph);
  const double s2 = s * s;
  const T inf = (ptp * ptp * ptp - ptm * ptm * ptm) / (3 * dth) + (pfp * pfp * pfp - pfm * pfm * pfm) / (3 * dph * s2 * s2) +
                2 * wt * wf * wtf / s2 - co * wt * wf * wf / (s2 * s);
  const T lap = (sp * ptp - sm * ptm) / (s * dth) + (pfp - pfm) / (dph * s2);
  const T tang = 0.5 * (pfp * pfp + pfm * pfm) / s2;
  const T gp = ptp * ptp + tang, gm = ptm * ptm + tang;
  const T h = 0.5 * (ham.gamma * (gp * gp + gm * gm) + ham.quad * (gp + gm));
  return -inf - ham.delta * lap + h + ham.eps * v[C];
}

// Pole row from the nphi/2 lines through the pole: v[0] is the pole and
// v[1 + k] the first-ring node at longitude k. The infinity Laplacian is the
// line average of the conservative 1D differences, which reproduces the
// reflecting 1D row on radial functions and so pins the level of a
// C^{1,1/3} critical point at the pole; |grad w|^2 is twice the line average.
template <typename T>
T pole_row(const std::vector<T>& v, int nphi, double dth, const HamiltonianSpec& ham) {
  const int lines = nphi / 2;
  const T& P = v[0];
  T inf = T(0), lap = T(0), g2 = T(0);
  for (int k = 0; k < lines; ++k) {
    const T pp = (v[1 + k] - P) / dth;
    const T pm = (P - v[1 + k + lines]) / dth;
    inf += (pp * pp * pp - pm * pm * pm) / (3 * dth);
    lap += (pp - pm) / dth;
    g2 += pp * pp + pm * pm;
  }
  inf /= lines;
  lap *= 2.0 / lines;
  g2 /= lines;
  return -inf - ham.delta * lap + ham.gamma * g2 * g2 + ham.quad * g2 + ham.eps * P;
}

struct Closure {
  int corner[4];
  double weight[4];
  double rhoCorner[4];
  double rhoQ;
};

struct Layout {
  std::vector<std::vector<int>> stencil;  // active nodes; -1 entries never occur
  std::vector<Closure> closure;             // band nodes
  std::vector<int> rowOf;                   // unknown id -> index into stencil or closure
};

}  // namespace

int Grid2D::node(int j, int k) const {
  if (j == 0) return 0;
  k = ((k % nphi) + nphi) % nphi;
  return index[static_cast<std::size_t>(j - 1) * nphi + k];
}

namespace {

Eigen::Vector3d grid_point(const Eigen::Matrix3d& frame, double theta, double phi) {
  return std::cos(theta) * frame.col(2) + std::sin(theta) * (std::cos(phi) * frame.col(0) + std::sin(phi) * frame.col(1));
}

std::vector<int> stencil_of(const Grid2D& g, int j, int k) {
  if (j == 0) {
    std::vector<int> st{0};
    for (int kk = 0; kk < g.nphi; ++kk) st.push_back(g.node(1, kk));
    return st;
  }
  return {g.node(j, k),         g.node(j + 1, k),     g.node(j - 1, k),     g.node(j, k + 1),    g.node(j, k - 1),
          g.node(j + 1, k + 1), g.node(j + 1, k - 1), g.node(j - 1, k + 1), g.node(j - 1, k - 1)};
}

// Raw stencil positions (ring, slot) before unknown ids exist.
std::vector<std::pair<int, int>> stencil_positions(int nphi, int j, int k) {
  if (j == 0) {
    std::vector<std::pair<int, int>> st{{0, 0}};
    for (int kk = 0; kk < nphi; ++kk) st.emplace_back(1, kk);
    return st;
  }
  auto w = [nphi](int kk) { return ((kk % nphi) + nphi) % nphi; };
  return {{j, w(k)},
           {j + 1, w(k)},
           {j - 1, w(k)},
           {j, w(k + 1)},
           {j, w(k - 1)},
           {j + 1, w(k + 1)},
           {j + 1, w(k - 1)},
           {j - 1, w(k + 1)},
           {j - 1, w(k - 1)}};
}

int threads_from_env() {
  const char* s = std::getenv("INFSEP_THREADS");
  if (!s) return 1;
  const int n = std::atoi(s);
  return std::clamp(n, 1, 256);
}

template <typename F>
void parallel_rows(int n, const F& f) {
  const int t = std::min(threads_from_env(), std::max(1, n / 2048));
  if (t <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int p = 0; p < t; ++p)
    pool.emplace_back([&, p] {
      for (int i = p; i < n; i += t) f(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

Grid2D make_grid_2d(const SphericalDomain& dom, const Grid2DOptions& opt) {
  if (dom.is_arc()) throw DomainError("2D grids need a subset of S^2");
  if (!(opt.dtheta > 0 && opt.dtheta < 0.5)) throw DomainError("dtheta must lie in (0, 0.5)");
  if (!(opt.rho0 > 2 * opt.dtheta)) throw DomainError("rho0 must exceed two grid spacings");
  Grid2D g;
  g.center = opt.center ? opt.center->normalized() : inradius(dom).center;
  g.frame.col(2) = g.center;
  g.frame.col(0) = g.center.unitOrthogonal();
  g.frame.col(1) = g.center.cross(g.frame.col(0));
  g.dtheta = opt.dtheta;
  g.rho0 = opt.rho0;
  int nphi = opt.nphi;
  if (nphi <= 0) nphi = static_cast<int>(std::ceil(2 * kPi / (0.7 * opt.rho0)));
  nphi = std::max(16, 8 * ((nphi + 7) / 8));
  g.nphi = nphi;
  g.nrings = static_cast<int>(std::floor((kPi - 1e-9) / opt.dtheta));
  if (g.nrings * opt.dtheta >= kPi) --g.nrings;
  const double dph = 2 * kPi / nphi;

  // Candidate positions: pole then rings.
  const std::size_t total = 1 + static_cast<std::size_t>(g.nrings) * nphi;
  std::vector<Eigen::Vector3d> pts(total);
  pts[0] = g.center;
  for (int j = 1; j <= g.nrings; ++j)
    for (int k = 0; k < nphi; ++k) pts[1 + static_cast<std::size_t>(j - 1) * nphi + k] = grid_point(g.frame, j * opt.dtheta, k * dph);
  std::vector<std::uint8_t> inside(total);
  for (std::size_t i = 0; i < total; ++i) inside[i] = domain_contains(dom, pts[i]) ? 1 : 0;
  std::vector<Eigen::Vector3d> insidePts;
  std::vector<std::size_t> insideIdx;
  for (std::size_t i = 0; i < total; ++i)
    if (inside[i]) {
      insidePts.push_back(pts[i]);
      insideIdx.push_back(i);
    }
  const std::vector<BoundaryDistance> bd = boundary_distances(dom, insidePts);
  std::vector<double> rho(total, -1.0);
  std::vector<Eigen::Vector3d> foot(total, Eigen::Vector3d::Zero());
  for (std::size_t m = 0; m < insideIdx.size(); ++m) {
    rho[insideIdx[m]] = bd[m].rho;
    foot[insideIdx[m]] = bd[m].foot;
  }
  auto flat = [nphi](int j, int k) -> std::size_t { return j == 0 ? 0 : 1 + static_cast<std::size_t>(j - 1) * nphi + k; };
  if (!(rho[0] >= opt.rho0)) throw DomainError("grid center is closer than rho0 to the boundary");

  std::vector<std::uint8_t> needed(total, 0), active(total, 0);
  for (std::size_t i = 0; i < total; ++i) active[i] = inside[i] && rho[i] >= opt.rho0;
  for (int j = 0; j <= g.nrings; ++j) {
    for (int k = 0; k < (j == 0 ? 1 : nphi); ++k) {
      if (!active[flat(j, k)]) continue;
      for (const auto& [jj, kk] : stencil_positions(nphi, j, k)) {
        if (jj > g.nrings) throw DomainError("active region reaches the antipode of the grid center");
        const std::size_t f = flat(jj, kk);
        if (!inside[f]) throw DomainError("stencil leaves the domain; refine dtheta/nphi or raise rho0");
        needed[f] = 1;
      }
    }
  }
  g.index.assign(static_cast<std::size_t>(g.nrings) * nphi, -1);
  int id = 0;
  std::vector<Eigen::Vector3d> upts;
  for (int j = 0; j <= g.nrings; ++j)
    for (int k = 0; k < (j == 0 ? 1 : nphi); ++k) {
      const std::size_t f = flat(j, k);
      if (!needed[f]) continue;
      if (j > 0) g.index[static_cast<std::size_t>(j - 1) * nphi + k] = id;
      ++id;
      upts.push_back(pts[f]);
      g.rho.conservativeResize(id);
      g.rho(id - 1) = rho[f];
      g.feet.push_back(foot[f]);
      g.band.push_back(active[f] ? 0 : 1);
      g.ring.push_back(j);
      g.slot.push_back(k);
    }
  g.points.resize(id, 3);
  for (int i = 0; i < id; ++i) g.points.row(i) = upts[i].transpose();
  return g;
}

namespace {

Layout build_layout(const SphericalDomain& dom, const Grid2D& g) {
  Layout L;
  const int n = g.size();
  L.rowOf.assign(n, -1);
  const double dph = 2 * kPi / g.nphi;
  for (int i = 0; i < n; ++i) {
    if (!g.band[i]) {
      L.rowOf[i] = static_cast<int>(L.stencil.size());
      L.stencil.push_back(stencil_of(g, g.ring[i], g.slot[i]));
      continue;
    }
    const Eigen::Vector3d b = g.points.row(i).transpose();
    const Eigen::Vector3d f = g.feet[i];
    Eigen::Vector3d t = b - b.dot(f) * f;
    if (t.norm() < 1e-14) throw SchemeError("cut node coincides with its boundary foot");
    t.normalize();
    bool ok = false;
    Closure cl{};
    for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
      const double target = g.rho0 + (1 + attempt) * g.dtheta;
      const Eigen::Vector3d q = std::cos(target) * f + std::sin(target) * t;
      const double theta = geodesic_angle(g.center, q);
      double phi = std::atan2(q.dot(g.frame.col(1)), q.dot(g.frame.col(0)));
      if (phi < 0) phi += 2 * kPi;
      const int j0 = static_cast<int>(std::floor(theta / g.dtheta));
      const int k0 = static_cast<int>(std::floor(phi / dph));
      if (j0 + 1 > g.nrings) continue;
      const double a = theta / g.dtheta - j0, c = phi / dph - k0;
      const int ids[4] = {g.node(j0, k0), g.node(j0, k0 + 1), g.node(j0 + 1, k0), g.node(j0 + 1, k0 + 1)};
      const double wts[4] = {(1 - a) * (1 - c), (1 - a) * c, a * (1 - c), a * c};
      ok = true;
      for (int m = 0; m < 4; ++m) {
        if (ids[m] < 0 || (ids[m] == i && wts[m] > 0)) ok = false;
        cl.corner[m] = ids[m];
        cl.weight[m] = wts[m];
        if (ids[m] >= 0) cl.rhoCorner[m] = g.rho(ids[m]);
      }
      if (ok) cl.rhoQ = boundary_distance(dom, q).rho;
    }
    if (!ok) throw SchemeError("no interpolation cell for a cut-node closure");
    L.rowOf[i] = static_cast<int>(L.closure.size());
    L.closure.push_back(cl);
  }
  return L;
}

struct Row2 {
  double r = 0;
  double scale = 1;
  std::vector<int> cols;
  std::vector<double> d;
};

Row2 row_2d(int i, const HamiltonianSpec& ham, const Grid2D& g, const Layout& L, const BoundaryPolicy& policy,
            const Eigen::VectorXd& w) {
  Row2 row;
  if (g.band[i]) {
    const Closure& cl = L.closure[L.rowOf[i]];
    row.cols.push_back(i);
    row.d.push_back(1);
    if (policy.kind != BoundaryKind::BarrierMatched) {
      row.r = w(i) - policy.valueA;
      row.scale = 1 + std::abs(policy.valueA);
      return row;
    }
    double vq = 0;
    for (int m = 0; m < 4; ++m) vq += cl.weight[m] * (w(cl.corner[m]) + std::log(cl.rhoCorner[m]) / ham.gamma);
    const double wq = vq - std::log(cl.rhoQ) / ham.gamma;
    const double g3 = ham.gamma * ham.gamma * ham.gamma;
    const LayerCoefficients c{ham.gamma, ham.gamma * ham.quad, g3 * ham.eps * wq};
    const double inc = layer_increment(g.rho(i), cl.rhoQ, c);
    const double dinc = layer_increment_dp2(g.rho(i), cl.rhoQ, c) * g3 * ham.eps;
    row.r = w(i) - wq - inc;
    for (int m = 0; m < 4; ++m) {
      row.cols.push_back(cl.corner[m]);
      row.d.push_back(-cl.weight[m] * (1 + dinc));
    }
    row.scale = 1 + std::abs(inc);
    return row;
  }
  const auto& st = L.stencil[L.rowOf[i]];
  const int m9 = static_cast<int>(st.size());
  if (g.ring[i] == 0) {
    using ADX = Eigen::AutoDiffScalar<Eigen::VectorXd>;
    std::vector<ADX> v(m9);
    for (int m = 0; m < m9; ++m) v[m] = ADX(w(st[m]), m9, m);
    const ADX r = pole_row(v, g.nphi, g.dtheta, ham);
    row.r = r.value();
    row.d.assign(r.derivatives().data(), r.derivatives().data() + m9);
  } else {
    AD9 v[9];
    for (int m = 0; m < 9; ++m) v[m] = AD9(w(st[m]), 9, m);
    const AD9 r = ring_row(v, g.ring[i] * g.dtheta, g.dtheta, 2 * kPi / g.nphi, ham);
    row.r = r.value();
    row.d.assign(r.derivatives().data(), r.derivatives().data() + 9);
  }
  row.cols = st;
  const double dph = 2 * kPi / g.nphi;
  double mag = 0;
  for (int m = 1; m < m9; ++m) mag = std::max(mag, std::abs(w(st[m]) - w(i)));
  const double p = mag / std::min(g.dtheta, g.ring[i] == 0 ? g.dtheta : dph * std::sin(g.ring[i] * g.dtheta));
  row.scale = 1 + p * p * p / g.dtheta + ham.delta * p / g.dtheta + ham.gamma * p * p * p * p +
              std::abs(ham.quad) * p * p + ham.eps * std::abs(w(i));
  return row;
}

}  // namespace

SolveResult solve_2d(const SphericalDomain& dom, const HamiltonianSpec& ham, const Grid2D& grid,
                     const BoundaryPolicy& policy, const SolveOptions& opt) {
  const Layout L = build_layout(dom, grid);
  const int n = grid.size();
  Eigen::VectorXd w;
  if (opt.warmStart) {
    w = *opt.warmStart;
    if (w.size() != n) throw DomainError("warm start has the wrong size");
  } else {
    w = (-grid.rho.array().log() / ham.gamma).matrix();
    if (policy.kind != BoundaryKind::BarrierMatched) w.array() += policy.valueA - w.maxCoeff();
  }
  std::vector<Row2> rows(n);
  const Assembler asmb = [&](const Eigen::VectorXd& v, Eigen::VectorXd& r, Eigen::VectorXd& s,
                             Eigen::SparseMatrix<double>* J) {
    parallel_rows(n, [&](int i) { rows[i] = row_2d(i, ham, grid, L, policy, v); });
    r.resize(n);
    s.resize(n);
    std::vector<Eigen::Triplet<double>> trips;
    if (J) trips.reserve(static_cast<std::size_t>(9) * n);
    for (int i = 0; i < n; ++i) {
      r(i) = rows[i].r;
      s(i) = rows[i].scale;
      if (J)
        for (std::size_t m = 0; m < rows[i].cols.size(); ++m) trips.emplace_back(i, rows[i].cols[m], rows[i].d[m]);
    }
    if (J) {
      J->resize(n, n);
      J->setFromTriplets(trips.begin(), trips.end());
    }
  };
  const NewtonReport rep = newton_solve(asmb, w, opt.newton);
  if (!rep.converged)
    throw ConvergenceError("2D Newton iteration did not converge (eps " + std::to_string(ham.eps) + ")",
                           rep.residualNorm, rep.iterations);

  SolveResult res;
  res.w = w;
  res.coords = grid.points;
  res.rho = grid.rho;
  res.h = grid.dtheta;
  res.band = grid.band;
  res.gradNorm = Eigen::VectorXd::Zero(n);
  const double dph = 2 * kPi / grid.nphi;
  for (int i = 0; i < n; ++i) {
    if (grid.band[i]) continue;
    const auto& st = L.stencil[L.rowOf[i]];
    if (grid.ring[i] == 0) {
      double gmax = 0;
      for (std::size_t m = 1; m < st.size(); ++m) gmax = std::max(gmax, std::abs(w(st[m]) - w(i)) / grid.dtheta);
      res.gradNorm(i) = gmax;
    } else {
      const double s = std::sin(grid.ring[i] * grid.dtheta);
      const double gt = std::max(std::abs(w(st[TP]) - w(i)), std::abs(w(i) - w(st[TM]))) / grid.dtheta;
      const double gf = std::max(std::abs(w(st[FP]) - w(i)), std::abs(w(i) - w(st[FM]))) / (dph * s);
      res.gradNorm(i) = std::hypot(gt, gf);
    }
  }
  res.sigma0Index = 0;
  res.iterations = rep.iterations;
  res.pseudoSteps = rep.pseudoSteps;
  res.residualNorm = rep.residualNorm;
  res.converged = true;
  res.boundaryPolicyUsed = policy;
  return res;
}

}  // namespace infsep
