#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infsep/closed_forms.hpp"
#include "infsep/errors.hpp"
#include "infsep/profile_ode.hpp"

using namespace infsep;
namespace {
constexpr double pi = std::numbers::pi;

// Arc on which a single arch of exponent beta fits: cap-shaped for caps,
// two-ended otherwise.
ProfileArc arch(double beta, bool half) {
  const double ell = branch_length(beta);
  return half ? ProfileArc{ell, true} : ProfileArc{2 * ell, false};
}
}  // namespace

TEST_CASE("branch lengths reproduce the closed-form geometry") {
  CHECK(branch_length(1.0 / 3) == doctest::Approx(pi / 2).epsilon(1e-12));
  CHECK(branch_length(0.125) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(branch_length(0.8) == doctest::Approx(pi / 4).epsilon(1e-12));
  CHECK(branch_length(-4.0 / 3) == doctest::Approx(pi / 4).epsilon(1e-12));
  CHECK(branch_length(-1.0) == doctest::Approx(pi / 2).epsilon(1e-12));
}

TEST_CASE("implicit and direct profiles agree") {
  for (double beta : {1.0 / 3, 0.8, 0.125, -4.0 / 3}) {
    for (bool half : {true, false}) {
      const ProfileArc arc = arch(beta, half);
      const Profile a = build_profile(beta, arc, ProfileMethod::Implicit, 801);
      const Profile b = build_profile(beta, arc, ProfileMethod::Direct, 801);
      CHECK((a.psi - b.psi).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
  }
}

TEST_CASE("regular exponent one gives the sine profile") {
  const Profile p = build_profile(-1.0, {pi, false}, ProfileMethod::Implicit, 1001);
  for (Eigen::Index i = 0; i < p.sigma.size(); ++i) CHECK(std::abs(p.psi(i) - std::sin(p.sigma(i))) <= 1e-10);
}

TEST_CASE("psi is positive inside, vanishes at the zero ends and peaks at the critical point") {
  for (double beta : {1.0 / 3, 0.125, 0.8, -4.0 / 3}) {
    const Profile p = build_profile(beta, arch(beta, false), ProfileMethod::Implicit, 401);
    const Eigen::Index n = p.sigma.size();
    CHECK(p.psi(0) == 0.0);
    CHECK(p.psi(n - 1) == 0.0);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      CHECK(p.psi(i) > 0);
      CHECK(p.psi(i) <= 1 + 1e-14);
    }
    CHECK(p.psi(n / 2) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("profile is symmetric about its critical point") {
  const Profile p = build_profile(0.8, arch(0.8, false), ProfileMethod::Implicit, 501);
  const Eigen::Index n = p.sigma.size();
  for (Eigen::Index i = 0; i < n; ++i) CHECK(std::abs(p.psi(i) - p.psi(n - 1 - i)) <= 1e-12);
}

TEST_CASE("inversion is the inverse of the relation") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> B(0.05, 3), U(-0.999, 0.999);
  for (int i = 0; i < 200; ++i) {
    const double beta = B(rng);
    const ImplicitRelation rel = make_relation(beta, 0.0);
    const double sig = U(rng) * branch_length(beta);
    const double y = invert_y(rel, sig);
    CHECK(relation_value(beta, y) == doctest::Approx(sig).epsilon(1e-9));
  }
}

TEST_CASE("near the critical point 1 - psi follows the four-thirds power law") {
  for (double beta : {1.0 / 3, 0.125, 0.8}) {
    const ImplicitRelation rel = make_relation(beta, 0.0);
    auto gap = [&](double d) { return 1 - std::exp(log_psi_from_y(beta, invert_y(rel, d))); };
    const double d1 = 1e-4, d2 = 1e-3;
    const double slope = std::log(gap(d2) / gap(d1)) / std::log(d2 / d1);
    CHECK(slope == doctest::Approx(4.0 / 3).epsilon(0.02));
    const double c = gap(d1) / std::pow(d1, 4.0 / 3);
    CHECK(c == doctest::Approx(critical_constant(beta)).epsilon(0.02));
    const SeriesValue s = series_near_critical(beta, d1);
    CHECK(1 - s.psiRatio == doctest::Approx(gap(d1)).epsilon(0.02));
  }
}

TEST_CASE("quartic slope equals the inverted relation at exponent one eighth") {
  const ImplicitRelation rel = make_relation(0.125, pi);
  for (int i = 1; i <= 100; ++i) {
    const double s = pi * i / 101;
    const double yq = quartic_alpha_pi(s), yi = invert_y(rel, s);
    CHECK(std::abs(yq - yi) <= 1e-8 * std::max(1.0, std::abs(yi)));
  }
}

TEST_CASE("shooting recovers the cap and circle exponents") {
  CHECK(shoot_exponent({pi / 2, true}, true) == doctest::Approx(1.0 / 3).epsilon(1e-9));
  CHECK(shoot_exponent({pi / 2, false}, true) == doctest::Approx(beta_circle(2)).epsilon(1e-9));
  CHECK(shoot_exponent({pi / 2, false}, false) == doctest::Approx(-mu_circle(2)).epsilon(1e-9));
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> A(0.2, pi);
  for (int i = 0; i < 10; ++i) {
    const double a = A(rng);
    CHECK(shoot_exponent({a, true}, true) == doctest::Approx(beta_cap(CapGeometry<double>{a})).epsilon(1e-8));
  }
}

TEST_CASE("antiperiodic extension flips sign every arch") {
  const Profile p = build_profile(beta_circle(3), {pi / 3, false}, ProfileMethod::Implicit, 201);
  const Profile e = antiperiodic_extend(p, 3);
  CHECK(e.arches == 6);
  CHECK(e.sigma(e.sigma.size() - 1) == doctest::Approx(2 * pi));
  const double T = pi / 3;
  for (double s : {0.2, 0.5, 0.9}) {
    auto at = [&](double x) {
      const Eigen::Index i = static_cast<Eigen::Index>(std::lround(x / (e.sigma(1) - e.sigma(0))));
      return e.psi(i);
    };
    CHECK(at(s + T) == doctest::Approx(-at(s)).epsilon(1e-9));
  }
}

TEST_CASE("mismatched arc and exponent are rejected") {
  CHECK_THROWS_AS(build_profile(1.0 / 3, {1.0, true}, ProfileMethod::Implicit), PeriodError);
  CHECK_THROWS_AS(build_profile(0.0, {1.0, true}, ProfileMethod::Implicit), DomainError);
  CHECK_THROWS_AS(build_profile(-0.5, {1.0, true}, ProfileMethod::Implicit), CaseError);
}
