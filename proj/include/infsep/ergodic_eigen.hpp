#pragma once
// Ergodic constants from vanishing-absorption continuation, and exponents from
// the selection rule lambda(g) = g + c (c = +1 singular, -1 regular).
//
// lambda(gamma, S) = lim eps w_eps(sigma0). Each grid level runs the schedule
// eps_k = eps0 2^{-k} with warm starts and extrapolates 2 v_K - v_{K-1}; with
// refine set, two grid levels (h, h/2) are combined as (4 L_{h/2} - L_h) / 3.

#include <string>
#include <vector>

#include "infsep/closed_forms.hpp"
#include "infsep/domain.hpp"
#include "infsep/viscosity.hpp"

namespace infsep {

struct ErgodicConfig {
  Case kind = Case::Singular;
  double eps0 = 0.1;
  int stages = 6;
  double rho0 = 0.2;  // upper bound; reduced on small domains and steep layers
  double deltaSafety = 1.25;
  bool refine = true;
  // 1D grids
  int n1d = 800;
  double stretch = 2.0;
  // 2D grids (rasters, or any S^2 domain when force2d is set)
  double dtheta = 0.01;
  int nphi = 0;
  bool force2d = false;
  NewtonOptions newton;
};

struct ErgodicStage {
  double eps;
  double delta;
  double h;
  double value;  // eps w(sigma0)
};

struct ErgodicRun {
  double gamma = 0;
  std::string domain;
  std::vector<ErgodicStage> stages;
  std::vector<double> levelEstimates;  // one extrapolated value per grid level
  double lambdaEstimate = 0;
  double extrapolationError = 0;
  bool monotoneTail = true;
  bool twoD = false;
  double rho0 = 0;
  SolveResult finest;  // last stage on the finest grid
};

// Cutoff actually used for a domain, gamma and case.
double effective_rho0(const SphericalDomain& dom, double gamma, const ErgodicConfig& cfg);

ErgodicRun estimate_lambda(const SphericalDomain& dom, double gamma, const ErgodicConfig& cfg = {});

struct Bracket {
  double lo = 0;
  double hi = 0;
  bool fallback = false;  // regular default bracket in use
  bool widened = false;   // collapsed cap bracket widened by 25% each side
};

// Exponent bracket from inscribed and circumscribed caps.
Bracket bracket_from_caps(const SphericalDomain& dom, Case kind = Case::Singular);

struct EigenConfig {
  ErgodicConfig ergodic;
  double relTol = 1e-4;  // bisection stops when (hi - lo) <= relTol * hi
  int maxWidenings = 8;
  double floor = 0.05;   // search limits for bracket widening
  double ceiling = 20;
};

struct EigenResult {
  double exponent = 0;
  int caseSign = 1;
  std::vector<std::pair<double, double>> bracketHistory;
  std::vector<std::pair<double, double>> evaluations;  // (gamma, g(gamma))
  double residual = 0;  // lambda(exponent) - exponent - caseSign
  double lambdaAt = 0;
  Bracket initial;
};

EigenResult find_exponent(const SphericalDomain& dom, Case kind, const EigenConfig& cfg = {},
                          const Bracket* userBracket = nullptr);

struct InsideOutside {
  EigenResult inside;   // eroded mask
  EigenResult outside;  // dilated mask
};

// Exponents of the one-cell eroded and dilated rasters. Both are reported;
// equality is not asserted.
InsideOutside inside_outside_exponents(const SphereMask& mask, Case kind, const EigenConfig& cfg = {});

}  // namespace infsep
