#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "infsep/errors.hpp"
#include "infsep/viscosity.hpp"

using namespace infsep;
namespace {
constexpr double pi = std::numbers::pi;

HamiltonianSpec ham_for(double gamma, double eps, double h) {
  return HamiltonianSpec::make(gamma, Case::Singular, eps, monotone_delta(2 * gamma + 1, h));
}
}  // namespace

TEST_CASE("2D grid centred on a cap has rings of constant distance") {
  const auto dom = SphericalDomain::cap(pi / 2);
  Grid2DOptions o;
  o.dtheta = 0.02;
  o.rho0 = 0.2;
  const Grid2D g = make_grid_2d(dom, o);
  CHECK(g.nphi % 8 == 0);
  CHECK(g.center.z() == doctest::Approx(1.0));
  for (int id = 1; id < g.size(); ++id) CHECK(g.rho(id) == doctest::Approx(pi / 2 - g.ring[id] * g.dtheta).epsilon(1e-9));
  CHECK(g.rho(0) == doctest::Approx(pi / 2));
}

TEST_CASE("2D grid rejects centres inside the cut layer") {
  Grid2DOptions o;
  o.rho0 = 0.3;
  o.center = sphere_point(1.4, 0.0);
  CHECK_THROWS_AS(make_grid_2d(SphericalDomain::cap(pi / 2), o), DomainError);
  CHECK_THROWS_AS(make_grid_2d(SphericalDomain::arc(1.0), Grid2DOptions{}), DomainError);
}

TEST_CASE("2D solution on a cap is rotationally symmetric and close to 1D") {
  const auto dom = SphericalDomain::cap(pi / 2);
  Grid2DOptions o;
  o.dtheta = 0.01;
  o.rho0 = 0.2;
  const Grid2D g = make_grid_2d(dom, o);
  const HamiltonianSpec ham = ham_for(1.0 / 3, 0.1, o.dtheta);
  const SolveResult r2 = solve_2d(dom, ham, g, BoundaryPolicy::barrier());
  CHECK(r2.converged);
  for (int id = 1; id < g.size(); ++id) {
    const int ref = g.node(g.ring[id], 0);
    CHECK(std::abs(r2.w(id) - r2.w(ref)) <= 1e-8 * std::abs(r2.w(ref)));
  }
  // Uniform 1D grid with the same spacing and cut.
  const Grid1D g1 = make_grid_1d(dom, static_cast<int>(std::lround((pi / 2 - 0.2) / 0.01)) + 1, 0.2, 0.0);
  const SolveResult r1 = solve_1d(dom, ham_for(1.0 / 3, 0.1, g1.h), g1, BoundaryPolicy::barrier());
  CHECK(ham.eps * r2.value_at_sigma0() == doctest::Approx(ham.eps * r1.value_at_sigma0()).epsilon(5e-3));
}

TEST_CASE("thread count does not change the 2D solution") {
  const auto dom = SphericalDomain::cap(1.2);
  Grid2DOptions o;
  o.dtheta = 0.01;
  o.rho0 = 0.15;
  const Grid2D g = make_grid_2d(dom, o);
  const HamiltonianSpec ham = ham_for(0.5, 0.1, o.dtheta);
  setenv("INFSEP_THREADS", "1", 1);
  const SolveResult a = solve_2d(dom, ham, g, BoundaryPolicy::barrier());
  setenv("INFSEP_THREADS", "4", 1);
  const SolveResult b = solve_2d(dom, ham, g, BoundaryPolicy::barrier());
  unsetenv("INFSEP_THREADS");
  CHECK(a.w == b.w);
}

TEST_CASE("2D near-boundary behaviour follows the barrier") {
  const auto dom = SphericalDomain::cap(1.2);
  Grid2DOptions o;
  o.dtheta = 0.01;
  o.rho0 = 0.15;
  const Grid2D g = make_grid_2d(dom, o);
  const HamiltonianSpec ham = ham_for(0.5, 0.1, o.dtheta);
  const SolveResult r = solve_2d(dom, ham, g, BoundaryPolicy::barrier());
  const GradientBoundReport gb = gradient_bound_check(r, ham);
  CHECK(gb.maxScaledGradient == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::isfinite(gb.maxBarrierOffset));
}
