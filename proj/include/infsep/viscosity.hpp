#pragma once
// Regularised boundary blow-up problem
//   -delta Lap w - Lap_inf w + gamma |grad w|^4 + quad |grad w|^2 + eps w = 0
// on a spherical domain, with w -> +inf at the boundary.
//
// Discretisation (1D): conservative one-sided fluxes for the infinity
// Laplacian, (p+^3 - p-^3) / (3 dx), which is monotone for every gradient;
// the Hamiltonian is the average of its one-sided values. The scheme is
// monotone when delta >= quad^2 dx^2 / 4 and 2 gamma |p| dx <= 1.
//
// The domain is cut at distance rho0 from the blow-up boundary. The cut node is
// closed by the exact local boundary-layer profile (BarrierMatched), which
// carries the -(1/gamma) ln rho singularity with an O(rho0^2) relative error,
// or by fixed values (LargeConstant, Dirichlet).

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infsep/closed_forms.hpp"
#include "infsep/domain.hpp"
#include "infsep/newton.hpp"

namespace infsep {

struct HamiltonianSpec {
  double gamma = 1;
  double quad = 3;
  double eps = 0;
  double delta = 0;
  int caseSign = 1;

  static HamiltonianSpec make(double gamma, Case kind, double eps, double delta);
};

// Nodes on [a + rho0, b - rho0] (blow-up ends) or reaching a reflecting end,
// clustered toward the blow-up ends by a tanh map of strength `stretch` (0 gives a uniform grid).
struct Grid1D {
  Reduction1D red;
  Eigen::VectorXd x;
  Eigen::VectorXd rho;  // distance to the nearest blow-up end
  double h = 0;         // largest spacing
  double rho0 = 0;
  int sigma0Index = 0;

  double curvature(double xi) const;  // (N-2) cot x, or 0 on arcs
};

Grid1D make_grid_1d(const SphericalDomain& dom, int n, double rho0, double stretch = 2.0);

// Smallest viscosity that keeps the scheme monotone on the given grid, times
// a safety factor.
double monotone_delta(double quad, double h, double safety = 1.25);

enum class BoundaryKind { BarrierMatched, LargeConstant, Dirichlet };

struct BoundaryPolicy {
  BoundaryKind kind = BoundaryKind::BarrierMatched;
  double valueA = 0;  // LargeConstant uses valueA at every cut node
  double valueB = 0;

  static BoundaryPolicy barrier() { return {}; }
  static BoundaryPolicy large_constant(double k) { return {BoundaryKind::LargeConstant, k, k}; }
  static BoundaryPolicy dirichlet(double a, double b) { return {BoundaryKind::Dirichlet, a, b}; }
  std::string name() const;
};

struct SolveResult {
  Eigen::VectorXd w;
  Eigen::MatrixXd coords;  // n x 1 positions (1D) or n x 3 unit vectors (2D)
  Eigen::VectorXd rho;
  Eigen::VectorXd gradNorm;         // discrete |grad w|
  std::vector<std::uint8_t> band;   // 1 on cut nodes closed by the boundary policy
  int sigma0Index = 0;
  int iterations = 0;
  int pseudoSteps = 0;
  double residualNorm = 0;
  bool converged = false;
  BoundaryPolicy boundaryPolicyUsed;
  double h = 0;

  double value_at_sigma0() const { return w(sigma0Index); }
};

struct SolveOptions {
  NewtonOptions newton;
  bool checkMonotone = true;
  const Eigen::VectorXd* warmStart = nullptr;
};

SolveResult solve_1d(const SphericalDomain& dom, const HamiltonianSpec& ham, const Grid1D& grid,
                     const BoundaryPolicy& policy, const SolveOptions& opt = {});

struct MonotonicityReport {
  int violations = 0;
  double worst = 0;  // largest positive off-diagonal / diagonal ratio
};

// Sign structure of the discrete Jacobian at state w: the residual must be
// non-increasing in every neighbour value and increasing in the centre.
MonotonicityReport check_monotone_1d(const HamiltonianSpec& ham, const Grid1D& grid, const BoundaryPolicy& policy,
                                     const Eigen::VectorXd& w);

// Residual of the 1D scheme, exposed for property tests.
Eigen::VectorXd residual_1d(const HamiltonianSpec& ham, const Grid1D& grid, const BoundaryPolicy& policy,
                            const Eigen::VectorXd& w);

struct Grid2DOptions {
  double dtheta = 0.01;
  int nphi = 0;  // 0: chosen from rho0; always a multiple of 8
  double rho0 = 0.1;
  std::optional<Eigen::Vector3d> center;  // default: incenter
};

// Rotated latitude-longitude grid: a pole node at the center plus rings at
// polar distance j dtheta. Active nodes have rho >= rho0; cut nodes are the
// inside nodes with rho < rho0 that appear in an active stencil.
struct Grid2D {
  Eigen::Vector3d center;
  Eigen::Matrix3d frame;  // columns e1, e2, center
  double dtheta = 0;
  int nrings = 0;
  int nphi = 0;
  double rho0 = 0;
  std::vector<int> index;  // (ring-1)*nphi + k -> unknown id or -1; pole is id 0
  Eigen::MatrixXd points;  // unknown id -> unit vector
  Eigen::VectorXd rho;
  std::vector<Eigen::Vector3d> feet;
  std::vector<std::uint8_t> band;
  std::vector<int> ring;   // 0 for the pole
  std::vector<int> slot;   // longitude slot k

  int size() const { return static_cast<int>(rho.size()); }
  int node(int j, int k) const;
};

Grid2D make_grid_2d(const SphericalDomain& dom, const Grid2DOptions& opt);

SolveResult solve_2d(const SphericalDomain& dom, const HamiltonianSpec& ham, const Grid2D& grid,
                     const BoundaryPolicy& policy, const SolveOptions& opt = {});

struct GradientBoundReport {
  double maxScaledGradient = 0;  // max over interior nodes of gamma rho |grad w|
  double maxBarrierOffset = 0;   // max over near-boundary nodes of |w + ln(rho)/gamma|
  int nodes = 0;
};

// Near-boundary nodes are those with rho <= nearBand.
GradientBoundReport gradient_bound_check(const SolveResult& res, const HamiltonianSpec& ham, double nearBand = 0.3);

}  // namespace infsep
