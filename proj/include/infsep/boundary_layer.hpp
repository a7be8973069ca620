#pragma once
// Local boundary-layer profile of the transformed equation.
//
// Near the boundary, with rho the distance to it, the slope Y = -gamma w_rho of
// a flat one-dimensional solution obeys
//   Y^2 Y_rho = -(Y^4 + q Y^2 + p2),  q = gamma quad,  p2 = gamma^3 lambda,
// where lambda stands for the local value of eps w. In u = 1/Y this is
// u_rho = 1 + q u^2 + p2 u^4, u(0) = 0, i.e. F(u) = rho with
//   F(u) = int_0^u dv / (1 + q v^2 + p2 v^4).
// The profile fixes w between two distances exactly up to curvature and
// viscosity corrections of relative order rho^2.

namespace infsep {

struct LayerCoefficients {
  double gamma;
  double q;   // gamma * quad
  double p2;  // gamma^3 * (local eps w)
};

// Largest p2 for which F reaches rho with margin; larger values are clamped.
double layer_p2_limit(double rho, double q);

// F(u) and the inverse u(rho) on the branch starting at u = 0.
double layer_f(double u, double q, double p2);
double layer_u(double rho, double q, double p2);

// Y(rho) = 1 / u(rho).
double layer_slope(double rho, double q, double p2);

// w(rho0) - w(rho1) = (1/gamma) int_{rho0}^{rho1} Y ds for rho0 < rho1.
double layer_increment(double rho0, double rho1, const LayerCoefficients& c);

// Derivative of layer_increment with respect to p2.
double layer_increment_dp2(double rho0, double rho1, const LayerCoefficients& c);

}  // namespace infsep
