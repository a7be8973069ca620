#include "infsep/domain.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "infsep/errors.hpp"

namespace infsep {

namespace {

constexpr double kPi = std::numbers::pi;

struct Polar {
  double theta;
  double phi;  // in [0, 2 pi)
};

Polar to_polar(const Eigen::Vector3d& x) {
  const double theta = std::atan2(std::hypot(x.x(), x.y()), x.z());
  double phi = std::atan2(x.y(), x.x());
  if (phi < 0) phi += 2 * kPi;
  if (phi >= 2 * kPi) phi = 0;
  return {theta, phi};
}

struct CellIndex {
  int i;
  int j;
};

CellIndex cell_of(const SphereMask& m, const Eigen::Vector3d& x) {
  const Polar p = to_polar(x);
  const int i = std::clamp(static_cast<int>(std::floor(p.theta / kPi * m.nlat)), 0, m.nlat - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.phi / (2 * kPi) * m.nlon)), 0, m.nlon - 1);
  return {i, j};
}

// Nearest point of the minor great-circle arc [a, b].
BoundaryDistance distance_to_arc(const Eigen::Vector3d& x, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d n = a.cross(b).normalized();
  const Eigen::Vector3d p = x - x.dot(n) * n;
  const double pn = p.norm();
  if (pn > 1e-14) {
    const Eigen::Vector3d ph = p / pn;
    if (a.cross(ph).dot(n) >= 0 && ph.cross(b).dot(n) >= 0)
      return {std::atan2(std::abs(x.dot(n)), pn), ph};
  }
  const double da = geodesic_angle(x, a);
  const double db = geodesic_angle(x, b);
  return da <= db ? BoundaryDistance{da, a} : BoundaryDistance{db, b};
}

// Nearest point of the parallel at colatitude theta between longitudes
// [phiA, phiB] (phiB > phiA, span below pi).
BoundaryDistance distance_to_parallel(const Eigen::Vector3d& x, double theta, double phiA, double phiB) {
  const Polar p = to_polar(x);
  double rel = p.phi - phiA;
  rel -= 2 * kPi * std::floor(rel / (2 * kPi));
  if (rel <= phiB - phiA) return {std::abs(p.theta - theta), sphere_point(theta, p.phi)};
  const Eigen::Vector3d ea = sphere_point(theta, phiA);
  const Eigen::Vector3d eb = sphere_point(theta, phiB);
  const double da = geodesic_angle(x, ea);
  const double db = geodesic_angle(x, eb);
  return da <= db ? BoundaryDistance{da, ea} : BoundaryDistance{db, eb};
}

struct MaskEdge {
  bool meridian;
  double theta0, theta1;  // meridian: colatitude span; parallel: colatitude in theta0
  double phi0, phi1;      // parallel: longitude span; meridian: longitude in phi0
};

std::vector<MaskEdge> mask_edges(const SphereMask& m) {
  const double dth = kPi / m.nlat;
  const double dph = 2 * kPi / m.nlon;
  std::vector<MaskEdge> edges;
  for (int i = 0; i < m.nlat; ++i) {
    for (int j = 0; j < m.nlon; ++j) {
      const bool in = m.cell(i, j);
      if (in != m.cell(i, (j + 1) % m.nlon)) edges.push_back({true, i * dth, (i + 1) * dth, (j + 1) * dph, 0});
      if (i + 1 < m.nlat && in != m.cell(i + 1, j)) edges.push_back({false, (i + 1) * dth, 0, j * dph, (j + 1) * dph});
    }
  }
  if (edges.empty()) throw DomainError("mask has no boundary");
  return edges;
}

BoundaryDistance edges_distance(const std::vector<MaskEdge>& edges, const Eigen::Vector3d& x) {
  BoundaryDistance best{std::numeric_limits<double>::infinity(), Eigen::Vector3d::Zero()};
  for (const MaskEdge& e : edges) {
    const BoundaryDistance d =
        e.meridian ? distance_to_arc(x, sphere_point(e.theta0, e.phi0), sphere_point(e.theta1, e.phi0))
                   : distance_to_parallel(x, e.theta0, e.phi0, e.phi1);
    if (d.rho < best.rho) best = d;
  }
  return best;
}

BoundaryDistance mask_distance(const SphereMask& m, const Eigen::Vector3d& x) { return edges_distance(mask_edges(m), x); }

void require_unit(const Eigen::Vector3d& x) {
  if (!(std::abs(x.norm() - 1) < 1e-9)) throw DomainError("point is not on the unit sphere");
}

// Maximises f over the sphere starting at c by a shrinking compass search in
// the tangent plane.
template <typename F>
Eigen::Vector3d pattern_search(Eigen::Vector3d c, double step, double minStep, const F& f) {
  double fc = f(c);
  while (step > minStep) {
    Eigen::Vector3d t1 = c.unitOrthogonal();
    Eigen::Vector3d t2 = c.cross(t1);
    bool improved = false;
    for (const Eigen::Vector3d& d : {t1, Eigen::Vector3d(-t1), t2, Eigen::Vector3d(-t2)}) {
      const Eigen::Vector3d trial = (c * std::cos(step) + d * std::sin(step)).normalized();
      const double ft = f(trial);
      if (ft > fc) {
        c = trial;
        fc = ft;
        improved = true;
        break;
      }
    }
    if (!improved) step /= 2;
  }
  return c;
}

}  // namespace

Eigen::Vector3d sphere_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

double geodesic_angle(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

bool SphereMask::contains(const Eigen::Vector3d& x) const {
  const CellIndex c = cell_of(*this, x);
  return cell(c.i, c.j);
}

int SphereMask::count() const { return static_cast<int>(std::count(inside.begin(), inside.end(), 1)); }

SphereMask SphereMask::from_predicate(int nlat, int nlon, const std::function<bool(const Eigen::Vector3d&)>& pred) {
  if (nlat < 2 || nlon < 4) throw DomainError("mask resolution too small");
  SphereMask m{nlat, nlon, std::vector<std::uint8_t>(static_cast<std::size_t>(nlat) * nlon, 0)};
  for (int i = 0; i < nlat; ++i)
    for (int j = 0; j < nlon; ++j)
      m.inside[static_cast<std::size_t>(i) * nlon + j] =
          pred(sphere_point((i + 0.5) * kPi / nlat, (j + 0.5) * 2 * kPi / nlon)) ? 1 : 0;
  return m;
}

SphereMask SphereMask::parse(const std::string& text) {
  std::istringstream in(text);
  SphereMask m;
  if (!(in >> m.nlat >> m.nlon) || m.nlat < 2 || m.nlon < 4) throw DomainError("mask header must be 'nlat nlon'");
  m.inside.reserve(static_cast<std::size_t>(m.nlat) * m.nlon);
  for (int i = 0; i < m.nlat; ++i) {
    std::string row;
    if (!(in >> row) || static_cast<int>(row.size()) != m.nlon) throw DomainError("mask row has wrong length");
    for (char ch : row) {
      if (ch != '0' && ch != '1') throw DomainError("mask rows contain only '0' and '1'");
      m.inside.push_back(ch == '1' ? 1 : 0);
    }
  }
  return m;
}

std::string SphereMask::serialize() const {
  std::string s = std::to_string(nlat) + " " + std::to_string(nlon) + "\n";
  for (int i = 0; i < nlat; ++i) {
    for (int j = 0; j < nlon; ++j) s += cell(i, j) ? '1' : '0';
    s += '\n';
  }
  return s;
}

namespace {

SphereMask morph(const SphereMask& m, bool erode) {
  SphereMask out = m;
  for (int i = 0; i < m.nlat; ++i) {
    for (int j = 0; j < m.nlon; ++j) {
      bool v = m.cell(i, j);
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const int ii = i + di;
          if (ii < 0 || ii >= m.nlat) continue;
          const bool nb = m.cell(ii, (j + dj + m.nlon) % m.nlon);
          v = erode ? (v && nb) : (v || nb);
        }
      }
      out.inside[static_cast<std::size_t>(i) * m.nlon + j] = v ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

SphereMask SphereMask::eroded() const { return morph(*this, true); }
SphereMask SphereMask::dilated() const { return morph(*this, false); }

SphericalDomain SphericalDomain::arc(double length, bool bothEnds) {
  if (!(length > 0 && length <= 2 * kPi)) throw DomainError("arc length must lie in (0, 2 pi]");
  return {ArcDomain{length, bothEnds}, 2};
}

SphericalDomain SphericalDomain::cap(double alpha) {
  if (!(alpha > 0 && alpha <= kPi)) throw DomainError("cap requires 0 < alpha <= pi");
  if (alpha == kPi) return punctured_sphere();
  return {CapDomain{alpha}, 3};
}

SphericalDomain SphericalDomain::annulus(double kappa, double alpha) {
  if (!(kappa >= 0 && kappa < alpha && alpha < kPi)) throw DomainError("annulus requires 0 <= kappa < alpha < pi");
  if (kappa == 0) return punctured_cap(alpha);
  return {AnnulusDomain{kappa, alpha}, 3};
}

SphericalDomain SphericalDomain::punctured_cap(double alpha) {
  if (!(alpha > 0 && alpha < kPi)) throw DomainError("punctured cap requires 0 < alpha < pi");
  return {PuncturedCapDomain{alpha}, 3};
}

SphericalDomain SphericalDomain::punctured_sphere() { return {PuncturedSphereDomain{}, 3}; }

SphericalDomain SphericalDomain::general(SphereMask mask) {
  if (mask.count() == 0) throw DomainError("mask interior is empty");
  if (mask.count() == static_cast<int>(mask.inside.size())) throw DomainError("mask has no boundary");
  return {GeneralS2Domain{std::move(mask)}, 3};
}

std::string SphericalDomain::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ArcDomain>)
          os << "arc(" << k.length << (k.bothEnds ? ", both ends)" : ", one end)");
        else if constexpr (std::is_same_v<K, CapDomain>)
          os << "cap(" << k.alpha << ")";
        else if constexpr (std::is_same_v<K, AnnulusDomain>)
          os << "annulus(" << k.kappa << ", " << k.alpha << ")";
        else if constexpr (std::is_same_v<K, PuncturedCapDomain>)
          os << "punctured_cap(" << k.alpha << ")";
        else if constexpr (std::is_same_v<K, PuncturedSphereDomain>)
          os << "punctured_sphere";
        else
          os << "mask(" << k.mask.nlat << "x" << k.mask.nlon << ", " << k.mask.count() << " cells)";
      },
      kind);
  return os.str();
}

Reduction1D reduce_1d(const SphericalDomain& dom) {
  const double curv = dom.dimensionN - 2.0;
  return std::visit(
      [&](const auto& k) -> Reduction1D {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ArcDomain>) {
          if (k.bothEnds) return {0, k.length, true, true, 0, k.length / 2};
          return {0, k.length, false, true, 0, 0};
        } else if constexpr (std::is_same_v<K, CapDomain>) {
          return {0, k.alpha, false, true, curv, 0};
        } else if constexpr (std::is_same_v<K, AnnulusDomain>) {
          return {k.kappa, k.alpha, true, true, curv, (k.kappa + k.alpha) / 2};
        } else if constexpr (std::is_same_v<K, PuncturedCapDomain>) {
          return {0, k.alpha, true, true, curv, k.alpha / 2};
        } else if constexpr (std::is_same_v<K, PuncturedSphereDomain>) {
          return {0, kPi, false, true, curv, 0};
        } else {
          throw DomainError("a raster mask has no one-dimensional reduction");
        }
      },
      dom.kind);
}

bool domain_contains(const SphericalDomain& dom, const Eigen::Vector3d& x) {
  require_unit(x);
  const double theta = geodesic_angle(Eigen::Vector3d::UnitZ(), x);
  return std::visit(
      [&](const auto& k) -> bool {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ArcDomain>)
          throw DomainError("arcs are not subsets of S^2");
        else if constexpr (std::is_same_v<K, CapDomain>)
          return theta < k.alpha;
        else if constexpr (std::is_same_v<K, AnnulusDomain>)
          return theta > k.kappa && theta < k.alpha;
        else if constexpr (std::is_same_v<K, PuncturedCapDomain>)
          return theta > 0 && theta < k.alpha;
        else if constexpr (std::is_same_v<K, PuncturedSphereDomain>)
          return theta < kPi;
        else
          return k.mask.contains(x);
      },
      dom.kind);
}

BoundaryDistance boundary_distance(const SphericalDomain& dom, const Eigen::Vector3d& x) {
  require_unit(x);
  const Polar p = to_polar(x);
  const Eigen::Vector3d north = Eigen::Vector3d::UnitZ();
  return std::visit(
      [&](const auto& k) -> BoundaryDistance {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ArcDomain>) {
          throw DomainError("arcs are not subsets of S^2");
        } else if constexpr (std::is_same_v<K, CapDomain>) {
          return {std::abs(k.alpha - p.theta), sphere_point(k.alpha, p.phi)};
        } else if constexpr (std::is_same_v<K, AnnulusDomain>) {
          const double di = std::abs(p.theta - k.kappa);
          const double de = std::abs(k.alpha - p.theta);
          return di <= de ? BoundaryDistance{di, sphere_point(k.kappa, p.phi)}
                          : BoundaryDistance{de, sphere_point(k.alpha, p.phi)};
        } else if constexpr (std::is_same_v<K, PuncturedCapDomain>) {
          const double de = std::abs(k.alpha - p.theta);
          return p.theta <= de ? BoundaryDistance{p.theta, north} : BoundaryDistance{de, sphere_point(k.alpha, p.phi)};
        } else if constexpr (std::is_same_v<K, PuncturedSphereDomain>) {
          return {kPi - p.theta, -north};
        } else {
          return mask_distance(k.mask, x);
        }
      },
      dom.kind);
}

InscribedCap inradius(const SphericalDomain& dom) {
  const Eigen::Vector3d north = Eigen::Vector3d::UnitZ();
  return std::visit(
      [&](const auto& k) -> InscribedCap {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ArcDomain>) {
          throw DomainError("inradius is defined for subsets of S^2");
        } else if constexpr (std::is_same_v<K, CapDomain>) {
          return {north, k.alpha};
        } else if constexpr (std::is_same_v<K, AnnulusDomain>) {
          return {sphere_point((k.kappa + k.alpha) / 2, 0), (k.alpha - k.kappa) / 2};
        } else if constexpr (std::is_same_v<K, PuncturedCapDomain>) {
          return {sphere_point(k.alpha / 2, 0), k.alpha / 2};
        } else if constexpr (std::is_same_v<K, PuncturedSphereDomain>) {
          return {north, kPi};
        } else {
          const SphereMask& m = k.mask;
          const std::vector<MaskEdge> edges = mask_edges(m);
          Eigen::Vector3d best = north;
          double bestRho = -1;
          for (int i = 0; i < m.nlat; ++i) {
            for (int j = 0; j < m.nlon; ++j) {
              if (!m.cell(i, j)) continue;
              const Eigen::Vector3d c = sphere_point((i + 0.5) * kPi / m.nlat, (j + 0.5) * 2 * kPi / m.nlon);
              const double r = edges_distance(edges, c).rho;
              if (r > bestRho) {
                bestRho = r;
                best = c;
              }
            }
          }
          auto score = [&](const Eigen::Vector3d& c) { return m.contains(c) ? edges_distance(edges, c).rho : -1.0; };
          best = pattern_search(best, kPi / m.nlat, 1e-6, score);
          return {best, score(best)};
        }
      },
      dom.kind);
}

InscribedCap circumradius(const SphericalDomain& dom) {
  const Eigen::Vector3d north = Eigen::Vector3d::UnitZ();
  return std::visit(
      [&](const auto& k) -> InscribedCap {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ArcDomain>) {
          throw DomainError("circumradius is defined for subsets of S^2");
        } else if constexpr (std::is_same_v<K, CapDomain>) {
          return {north, k.alpha};
        } else if constexpr (std::is_same_v<K, AnnulusDomain>) {
          // Either the outer cap or the cap around the antipode excluding the hole.
          if (k.alpha <= kPi - k.kappa) return {north, k.alpha};
          return {-north, kPi - k.kappa};
        } else if constexpr (std::is_same_v<K, PuncturedCapDomain>) {
          return {north, k.alpha};
        } else if constexpr (std::is_same_v<K, PuncturedSphereDomain>) {
          return {north, kPi};
        } else {
          const SphereMask& m = k.mask;
          const double dth = kPi / m.nlat;
          const double dph = 2 * kPi / m.nlon;
          // Samples on the boundary of every inside cell; sampleGap bounds the
          // distance from any cell point to the nearest sample.
          constexpr int kPerEdge = 4;
          std::vector<Eigen::Vector3d> pts;
          for (int i = 0; i < m.nlat; ++i)
            for (int j = 0; j < m.nlon; ++j) {
              if (!m.cell(i, j)) continue;
              for (int s = 0; s <= kPerEdge; ++s) {
                const double t = static_cast<double>(s) / kPerEdge;
                pts.push_back(sphere_point(i * dth, (j + t) * dph));
                pts.push_back(sphere_point((i + 1) * dth, (j + t) * dph));
                pts.push_back(sphere_point((i + t) * dth, j * dph));
                pts.push_back(sphere_point((i + t) * dth, (j + 1) * dph));
              }
            }
          const double sampleGap = std::max(dth, dph) / kPerEdge;
          auto reach = [&](const Eigen::Vector3d& c) {
            double r = 0;
            for (const auto& q : pts) r = std::max(r, geodesic_angle(c, q));
            return r;
          };
          Eigen::Vector3d c = inradius(dom).center;
          c = pattern_search(c, 0.25, 1e-6, [&](const Eigen::Vector3d& x) { return -reach(x); });
          return {c, std::min(kPi, reach(c) + sampleGap)};
        }
      },
      dom.kind);
}

std::vector<BoundaryDistance> boundary_distances(const SphericalDomain& dom, const std::vector<Eigen::Vector3d>& xs) {
  std::vector<BoundaryDistance> out;
  out.reserve(xs.size());
  if (const auto* g = std::get_if<GeneralS2Domain>(&dom.kind)) {
    const std::vector<MaskEdge> edges = mask_edges(g->mask);
    for (const auto& x : xs) {
      require_unit(x);
      out.push_back(edges_distance(edges, x));
    }
  } else {
    for (const auto& x : xs) out.push_back(boundary_distance(dom, x));
  }
  return out;
}

}  // namespace infsep
