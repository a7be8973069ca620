#pragma once
// One-dimensional profiles psi(sigma) of separable solutions.
//
// The slope Y = psi'/psi satisfies -Y^2 Y' = (Y^2 + beta^2)(Y^2 + c^2) with
// c^2 = beta (beta + 1). Between a critical point (Y = 0) and a zero of psi
// (|Y| = inf) the relation
//   F(Y) = atan(Y/beta) - ((beta+1)/c) atan(Y/c) = sigma - alphaCrit
// holds, and psi itself has the primitive
//   ln psi = (beta/2) ln(1 + Y^2/beta^2) - ((beta+1)/2) ln(1 + Y^2/c^2),
// normalised to psi = 1 at the critical point. Negative beta encodes the
// regular exponent mu = -beta.

#include <Eigen/Core>

namespace infsep {

enum class RelationKind { Arctan, LogForm };

struct ImplicitRelation {
  double beta;
  double alphaCrit;
  RelationKind kind;
};

// kind is Arctan for beta > 0 or beta <= -1 and LogForm for -1 < beta < 0.
ImplicitRelation make_relation(double beta, double alphaCrit);

// Distance from a critical point to the adjacent zero of psi. Arctan kind only.
double branch_length(double beta);

// F(Y); accurate near Y = 0 where the leading terms cancel.
double relation_value(double beta, double y);

double invert_y(const ImplicitRelation& rel, double sigma);

// ln psi relative to the critical point, as a function of Y.
double log_psi_from_y(double beta, double y);

struct SeriesValue {
  double y;
  double psiRatio;  // psi / psi(alphaCrit)
};

// C(beta) = (3^{4/3}/4) beta (beta+1)^{1/3}.
double critical_constant(double beta);

SeriesValue series_near_critical(double beta, double delta);

// An arc (0, length). criticalAtStart places the critical point at sigma = 0
// and the single zero at sigma = length (cap reduction); otherwise psi vanishes
// at both ends with the critical point at the midpoint.
struct ProfileArc {
  double length;
  bool criticalAtStart = false;
};

enum class ProfileMethod { Implicit, Direct };

struct Profile {
  double beta = 0;
  ProfileArc arc{};
  Eigen::VectorXd sigma;
  Eigen::VectorXd psi;
  Eigen::VectorXd y;  // +-inf at zeros of psi
  double sigma0 = 0;  // psi(sigma0) = 1
  int arches = 1;
};

// Uniform grid of n nodes including both ends.
Profile build_profile(double beta, const ProfileArc& arc, ProfileMethod method, int n = 2001);

// Direct integration of the slope equation from the critical point; returns
// the distance at which psi vanishes.
double direct_branch_length(double beta);

// Exponent whose profile fits the arc, found by shooting on the direct
// integrator. Searches beta > 0 (singular) or beta < -1 (regular).
double shoot_exponent(const ProfileArc& arc, bool singular, double tol = 1e-12);

// Extends a single arch of length pi/k (or a half arch of length pi/(2k) with
// criticalAtStart) to a (pi/k)-anti-periodic profile on [0, 2 pi].
Profile antiperiodic_extend(const Profile& p, int k);

// beta = 1/8 slope from the quartic -8Z^3 / (1 + 6Z^2 - 3Z^4) = tan sigma,
// Z = 8Y/3, on the branch Y: +inf (sigma = 0) -> 0 (sigma = pi).
double quartic_alpha_pi(double sigma);

}  // namespace infsep
