#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infsep/ergodic_eigen.hpp"
#include "infsep/errors.hpp"
#include "infsep/reconstruct_verify.hpp"

using namespace infsep;
namespace {
constexpr double pi = std::numbers::pi;

SeparableSolution half_sphere_profile(int n) {
  return from_profile(build_profile(1.0 / 3, {pi / 2, true}, ProfileMethod::Implicit, n));
}

std::vector<Eigen::VectorXd> cone_points(std::uint64_t seed, int count, double thetaMax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < count; ++i) {
    const double r = 0.5 + 2 * U(rng), t = thetaMax * U(rng), p = 2 * pi * U(rng);
    Eigen::VectorXd x(3);
    x << r * std::sin(t) * std::cos(p), r * std::sin(t) * std::sin(p), r * std::cos(t);
    pts.push_back(x);
  }
  return pts;
}
}  // namespace

TEST_CASE("inverse transform of the pure barrier is the distance") {
  const Eigen::VectorXd rho = Eigen::VectorXd::LinSpaced(50, 0.01, 1.0);
  const double g = 0.7;
  const Eigen::VectorXd w = -(rho.array().log() / g).matrix();
  const SeparableSolution s = reconstruct_samples(SphericalDomain::arc(2.0), rho, w, g, 1, 49);
  for (Eigen::Index i = 0; i < rho.size(); ++i) CHECK(s.psi(i) == doctest::Approx(rho(i)).epsilon(1e-12));
  CHECK(s.beta == g);
}

TEST_CASE("transform round trip and order reversal") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> P(0.01, 1), G(0.1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const double g = G(rng);
    Eigen::VectorXd psi(40), sigma = Eigen::VectorXd::LinSpaced(40, 0, 1);
    for (Eigen::Index i = 0; i < 40; ++i) psi(i) = P(rng);
    psi(7) = 1.0;
    const Eigen::VectorXd w = -(psi.array().log() / g).matrix();
    const SeparableSolution s = reconstruct_samples(SphericalDomain::cap(1.0), sigma, w, g, -1, 7);
    CHECK(s.beta == -g);
    for (Eigen::Index i = 0; i < 40; ++i) {
      CHECK(std::abs(s.psi(i) - psi(i)) <= 1e-12);
      for (Eigen::Index j = 0; j < 40; ++j)
        if (w(i) < w(j)) CHECK(s.psi(i) >= s.psi(j));
    }
  }
}

TEST_CASE("huge transformed values do not overflow") {
  const Eigen::VectorXd sigma = Eigen::VectorXd::LinSpaced(5, 0, 1);
  Eigen::VectorXd w(5);
  w << 1e6, 1e6 + 1, 1e6 + 2, 1e6 + 3, 1e6 + 50;
  const SeparableSolution s = reconstruct_samples(SphericalDomain::cap(1.0), sigma, w, 2.0, 1, 0);
  CHECK(s.psi(0) == 1.0);
  CHECK(s.psi(1) == doctest::Approx(std::exp(-2.0)));
  CHECK(s.psi.allFinite());
}

TEST_CASE("reconstructed ergodic solution matches the closed-form profile") {
  const auto dom = SphericalDomain::cap(pi / 2);
  ErgodicConfig c;
  c.refine = false;
  const ErgodicRun run = estimate_lambda(dom, 1.0 / 3, c);
  const SeparableSolution sol = reconstruct(dom, run.finest, 1.0 / 3, 1);
  const SeparableSolution ref = half_sphere_profile(2001);
  double err = 0;
  for (Eigen::Index i = 0; i < sol.sigma.size(); ++i) err = std::max(err, std::abs(sol.psi(i) - ref.psi_at(sol.sigma(i))));
  CHECK(err <= 5e-3);
  const HarnackReport h = harnack_ratio_check(sol, ref, 0.2);
  CHECK(h.bound <= 1 + 1e-2);
}

TEST_CASE("sine profile has a vanishing spherical residual") {
  const SeparableSolution s = from_profile(build_profile(-1.0, {pi, false}, ProfileMethod::Implicit, 4001));
  const ResidualReport r = spherical_residual(s);
  // Exact samples; what remains is the h^2/12 truncation of the difference quotients.
  CHECK(r.maxAbs <= 1e-7);
  CHECK(r.count > 3900);
}

TEST_CASE("spherical residual converges at second order away from the kink") {
  double prev = 0;
  for (int n : {501, 1001, 2001}) {
    const ResidualReport r = spherical_residual(half_sphere_profile(n), 5, 0.1);
    if (prev > 0) CHECK(prev / r.maxAbs > 3.5);
    prev = r.maxAbs;
  }
}

TEST_CASE("exponent one eighth has the expected equation coefficients") {
  const double b = 0.125;
  CHECK(b * b * b * (b + 1) == doctest::Approx(9.0 / 4096).epsilon(1e-15));
  CHECK(b * (2 * b + 1) == doctest::Approx(5.0 / 32).epsilon(1e-15));
  const SeparableSolution s = from_profile(build_profile(b, {pi, true}, ProfileMethod::Implicit, 2001));
  CHECK(spherical_residual(s, 5, 0.2).maxScaled < 1e-4);
}

TEST_CASE("ambient residual of the Aronsson function") {
  auto u = [](const Eigen::VectorXd& x) { return std::pow(std::abs(x(0)), 4.0 / 3) - std::pow(std::abs(x(1)), 4.0 / 3); };
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 24; ++i) {
    const double t = 0.1 + i * (2 * pi / 24);
    if (std::abs(std::cos(t)) < 0.1 || std::abs(std::sin(t)) < 0.1) continue;
    Eigen::VectorXd x(2);
    x << std::cos(t), std::sin(t);
    pts.push_back(x);
  }
  const AmbientReport r = ambient_residual(u, pts);
  CHECK(r.evaluated == static_cast<int>(pts.size()));
  CHECK(r.maxAbs <= 1e-6);
}

TEST_CASE("ambient residual of the half-space solution") {
  const SeparableSolution s = half_sphere_profile(2001);
  const AmbientReport r = ambient_residual(s, cone_points(62, 60, pi / 2));
  CHECK(r.evaluated > 40);
  CHECK(r.maxNormalized <= 1e-5);
}

TEST_CASE("normalised ambient residual does not depend on the radius") {
  // Interpolated samples give a nonzero residual whose angular part is fixed.
  SeparableSolution s = half_sphere_profile(201);
  s.exactPsi = nullptr;
  Eigen::VectorXd x(3);
  x << std::sin(0.7), 0.0, std::cos(0.7);
  double first = -1;
  for (double r : {0.5, 1.0, 4.0}) {
    const AmbientReport rep = ambient_residual(s, {Eigen::VectorXd(r * x)});
    REQUIRE(rep.evaluated == 1);
    const double norm = rep.maxNormalized;
    if (first < 0) first = norm;
    else CHECK(norm == doctest::Approx(first).epsilon(1e-3));
  }
}

TEST_CASE("ambient samples near the kink or the boundary are rejected") {
  const SeparableSolution s = half_sphere_profile(201);
  Eigen::VectorXd axis(3), edge(3);
  axis << 0, 0, 1;
  edge << std::sin(pi / 2 - 1e-3), 0, std::cos(pi / 2 - 1e-3);
  const AmbientReport r = ambient_residual(s, {axis, edge});
  CHECK(r.rejected == 2);
}

TEST_CASE("comparison function is a strict subsolution for smaller exponents") {
  const SeparableSolution s = half_sphere_profile(2001);
  const ComparisonReport lower = comparison_check(s, 0.125);
  CHECK(lower.positive);
  CHECK(lower.minScaled > 0);
  CHECK(lower.identityError < 1e-10);
  const ComparisonReport same = comparison_check(s, 1.0 / 3);
  CHECK(std::abs(same.minScaled) < 1e-12);
  CHECK(std::abs(same.maxScaled) < 1e-12);
  const ComparisonReport higher = comparison_check(s, 0.5);
  CHECK_FALSE(higher.positive);
  CHECK(higher.maxScaled < 0);
}

TEST_CASE("comparison positivity holds for random exponent pairs") {
  std::mt19937 rng(63);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  const SeparableSolution s = half_sphere_profile(1001);
  for (int i = 0; i < 20; ++i) {
    const ComparisonReport r = comparison_check(s, U(rng) / 3);
    CHECK(r.positive);
    CHECK(r.identityError < 1e-10);
  }
}

TEST_CASE("two-point ratio is scale invariant") {
  const SeparableSolution a = half_sphere_profile(501);
  SeparableSolution b = a;
  CHECK(harnack_ratio_check(a, b, 0.1).bound == doctest::Approx(1.0).epsilon(1e-12));
  b.psi *= 2;
  b.exactPsi = nullptr;
  CHECK(harnack_ratio_check(a, b, 0.1).bound == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary decay is linear for singular profiles") {
  const SeparableSolution s = half_sphere_profile(2001);
  const Eigen::Index n = s.sigma.size();
  double lo = 1e300, hi = 0;
  for (Eigen::Index i = n - 200; i < n - 1; ++i) {
    const double ratio = s.psi(i) / (pi / 2 - s.sigma(i));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo > 0);
  CHECK(hi / lo < 1.1);
}

TEST_CASE("2D results are not reconstructed as profiles") {
  SolveResult r;
  r.coords = Eigen::MatrixXd::Zero(3, 3);
  r.converged = true;
  CHECK_THROWS_AS(reconstruct(SphericalDomain::cap(1.0), r, 1.0, 1), SchemeError);
}
