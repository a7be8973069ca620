#pragma once
// Separable solutions u(r, sigma) = r^{-beta} psi(sigma) rebuilt from the
// transformed unknown (psi = exp(-gamma w)), and checks on them:
//   spherical   psi'^2 psi'' + beta(2beta+1) psi'^2 psi + beta^3(beta+1) psi^3 = 0
//   ambient     Delta_inf u = sum u_i u_j u_ij = 0 in R^N
//   comparison  phi = psi^theta, theta = beta_k / beta, has L_k phi > 0 for
//               beta_k < beta (L_k defined below)
//   Harnack     sup / inf of psi1 / psi2
// Residual statistics skip 5h-neighbourhoods of the sample ends and of the
// critical points of psi, where profiles are only C^{1,1/3}.

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "infsep/domain.hpp"
#include "infsep/profile_ode.hpp"
#include "infsep/viscosity.hpp"

namespace infsep {

struct SeparableSolution {
  double beta = 0;  // signed: +gamma singular, -gamma regular
  SphericalDomain domain;
  Eigen::VectorXd sigma;  // profile coordinate (polar angle or arc length), increasing
  Eigen::VectorXd psi;    // psi(sigma0) = 1
  int sigma0Index = 0;
  // Optional analytic data; empty / null when only samples are known.
  Eigen::VectorXd dpsi;
  Eigen::VectorXd d2psi;
  std::function<double(double)> exactPsi;

  double psi_at(double s) const;  // exact when available, else cubic Hermite
  double spacing() const;         // largest sample spacing
};

// Inverse transform of a 1D solve. Works in log space so huge w never
// overflows before normalisation. Throws SchemeError for 2D results.
SeparableSolution reconstruct(const SphericalDomain& dom, const SolveResult& w, double gamma, int caseSign);

// Same transform on raw samples (w on increasing sigma).
SeparableSolution reconstruct_samples(const SphericalDomain& dom, const Eigen::VectorXd& sigma,
                                      const Eigen::VectorXd& w, double gamma, int caseSign, int sigma0Index);

// Wraps a profile. Single-arch implicit-relation profiles also get exact psi
// and analytic derivatives. Default domain: cap for criticalAtStart, else arc.
SeparableSolution from_profile(const Profile& p);
SeparableSolution from_profile(const Profile& p, const SphericalDomain& dom);

// Nodes kept by residual statistics: distance >= radius from the sample ends
// and from every critical point of psi.
std::vector<std::uint8_t> smooth_region(const SeparableSolution& sol, double radius);

struct ResidualReport {
  Eigen::VectorXd residual;  // NaN where not evaluated
  std::vector<std::uint8_t> included;
  int count = 0;
  double maxAbs = 0;
  double maxScaled = 0;  // relative to the sum of the term magnitudes
  double exclusionRadius = 0;
};

// Finite-difference residual on the samples (nonuniform three-point formulas).
// The exclusion radius is max(exclusionFactor h, minRadius); a fixed minRadius
// keeps the evaluated region independent of h in refinement studies.
ResidualReport spherical_residual(const SeparableSolution& sol, double exclusionFactor = 5, double minRadius = 0);

struct AmbientReport {
  int evaluated = 0;
  int rejected = 0;
  double maxAbs = 0;
  // |Delta_inf u| r^{3 beta + 4}: the r-independent angular residual.
  double maxNormalized = 0;
  std::vector<double> values;  // per evaluated point
};

// Delta_inf of an arbitrary function by 5-point centered differences per axis
// with step relStep * |x|.
double ambient_infinity_laplacian(const std::function<double(const Eigen::VectorXd&)>& u, const Eigen::VectorXd& x,
                                  double relStep = 1e-3);

AmbientReport ambient_residual(const std::function<double(const Eigen::VectorXd&)>& u,
                               const std::vector<Eigen::VectorXd>& points, double relStep = 1e-3);

// Points live in R^2 for arcs (sigma = polar angle) and R^3 otherwise
// (sigma = angle from e_z). Samples within the exclusion zones are rejected.
AmbientReport ambient_residual(const SeparableSolution& sol, const std::vector<Eigen::VectorXd>& points,
                               double relStep = 1e-3, double exclusionFactor = 5);

// L_k phi = -(phi'^2 phi'' + beta_k(2 beta_k+1) phi'^2 phi + beta_k^3(beta_k+1) phi^3),
// which equals theta^3 psi^{3 theta - 4} (beta - beta_k)/beta (psi'^2 + beta^2 psi^2)^2
// for phi = psi^theta when psi solves the beta equation.
struct ComparisonReport {
  double theta = 0;
  double minScaled = 0;       // min of L_k phi / scale over included nodes
  double maxScaled = 0;
  double identityError = 0;   // max |L_k phi - closed form| / scale
  int count = 0;
  bool positive = false;      // minScaled > -tol
};

// scale = theta^3 psi^{3 theta - 4} (psi'^2 + beta^2 psi^2)^2, the magnitude of
// the closed-form value (beta - beta_k)/beta * scale.
ComparisonReport comparison_check(const SeparableSolution& sol, double betaK, double tol = 1e-10,
                                  double exclusionFactor = 5);

struct HarnackReport {
  double supRatio = 0;
  double infRatio = 0;
  double bound = 0;  // supRatio / infRatio
  int count = 0;
};

// psi2 is evaluated at the samples of psi1; nodes closer than margin to the
// sample ends are skipped because both fields vanish there.
HarnackReport harnack_ratio_check(const SeparableSolution& psi1, const SeparableSolution& psi2, double margin);

}  // namespace infsep
