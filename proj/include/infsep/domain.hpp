#pragma once
// Spherical domains S and geodesic distance to their boundary.
//
// Analytic kinds live on the unit sphere with axis e_z: caps and annuli are
// bands of polar angle around e_z, the punctured sphere removes -e_z.
// GeneralS2 is a raster over latitude-longitude cells; its boundary is the set
// of cell edges separating inside from outside cells, and distances to it are
// exact geodesic distances to those edges.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace infsep {

struct SphereMask {
  int nlat = 0;  // rows of colatitude, north to south
  int nlon = 0;  // columns of longitude, eastward from 0
  std::vector<std::uint8_t> inside;

  bool cell(int i, int j) const { return inside[static_cast<std::size_t>(i) * nlon + j] != 0; }
  bool contains(const Eigen::Vector3d& x) const;
  int count() const;

  static SphereMask from_predicate(int nlat, int nlon, const std::function<bool(const Eigen::Vector3d&)>& pred);
  // Text format: "nlat nlon" then nlat rows of nlon characters '0' or '1'.
  static SphereMask parse(const std::string& text);
  std::string serialize() const;
  // One-cell erosion / dilation in the 8-neighbourhood (longitude periodic).
  SphereMask eroded() const;
  SphereMask dilated() const;
};

struct ArcDomain {
  double length;
  bool bothEnds = true;
};
struct CapDomain {
  double alpha;
};
struct AnnulusDomain {
  double kappa;
  double alpha;
};
struct PuncturedCapDomain {
  double alpha;
};
struct PuncturedSphereDomain {};
struct GeneralS2Domain {
  SphereMask mask;
};

using DomainKind =
    std::variant<ArcDomain, CapDomain, AnnulusDomain, PuncturedCapDomain, PuncturedSphereDomain, GeneralS2Domain>;

struct SphericalDomain {
  DomainKind kind;
  int dimensionN = 3;

  static SphericalDomain arc(double length, bool bothEnds = true);
  static SphericalDomain cap(double alpha);
  static SphericalDomain annulus(double kappa, double alpha);
  static SphericalDomain punctured_cap(double alpha);
  static SphericalDomain punctured_sphere();
  static SphericalDomain general(SphereMask mask);

  bool is_general() const { return std::holds_alternative<GeneralS2Domain>(kind); }
  bool is_arc() const { return std::holds_alternative<ArcDomain>(kind); }
  std::string describe() const;
};

// Geodesic reduction of a rotationally symmetric domain to an interval
// [a, b] of polar angle (or arc length). Blow-up ends carry the boundary
// layer; the other ends are reflecting (Neumann) points.
struct Reduction1D {
  double a = 0;
  double b = 0;
  bool blowA = false;
  bool blowB = true;
  // Coefficient of cot(x) in the Laplace-Beltrami operator: N - 2 on spheres,
  // 0 on circle arcs.
  double curvatureFactor = 0;
  double sigma0 = 0;
};

Reduction1D reduce_1d(const SphericalDomain& dom);

// Unit vector with colatitude theta and longitude phi.
Eigen::Vector3d sphere_point(double theta, double phi);
double geodesic_angle(const Eigen::Vector3d& u, const Eigen::Vector3d& v);

// Membership and distance to the boundary on S^2 (not defined for arcs).
bool domain_contains(const SphericalDomain& dom, const Eigen::Vector3d& x);

struct BoundaryDistance {
  double rho;             // geodesic distance to the boundary
  Eigen::Vector3d foot;   // nearest boundary point
};

BoundaryDistance boundary_distance(const SphericalDomain& dom, const Eigen::Vector3d& x);
// Batched form; rasters extract their boundary edges once.
std::vector<BoundaryDistance> boundary_distances(const SphericalDomain& dom, const std::vector<Eigen::Vector3d>& xs);

struct InscribedCap {
  Eigen::Vector3d center;
  double radius;
};

// Largest cap inside the domain (center is an incenter).
InscribedCap inradius(const SphericalDomain& dom);
// A smallest (up to search resolution) cap containing the domain.
InscribedCap circumradius(const SphericalDomain& dom);

}  // namespace infsep
