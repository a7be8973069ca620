#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infsep/closed_forms.hpp"

using namespace infsep;
namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("circle exponents match the rational formulas") {
  for (int k = 1; k <= 10; ++k) {
    const long num = static_cast<long>(k) * k;
    CHECK(beta_circle(k) == doctest::Approx(double(num) / double(2 * k + 1)).epsilon(1e-15));
    CHECK(mu_circle(k) == doctest::Approx(double(num) / double(2 * k - 1)).epsilon(1e-15));
  }
  CHECK(beta_circle(1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(beta_circle(2) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(mu_circle(2) == doctest::Approx(4.0 / 3).epsilon(1e-15));
  CHECK_THROWS_AS(beta_circle(0), DomainError);
  CHECK_THROWS_AS(mu_circle(-1), DomainError);
}

TEST_CASE("cap exponents at the half sphere and the punctured sphere") {
  CHECK(std::abs(beta_cap(CapGeometry<double>{pi}) - 0.125) <= 1e-15);
  CHECK(std::abs(beta_cap(CapGeometry<double>{pi / 2}) - 1.0 / 3) <= 1e-15);
  CHECK(std::abs(mu_cap(CapGeometry<double>{pi / 2}) - 1.0) <= 1e-15);
  CHECK_THROWS_AS(beta_cap(CapGeometry<double>{0.0}), DomainError);
  CHECK_THROWS_AS(beta_cap(CapGeometry<double>{4.0}), DomainError);
  CHECK_THROWS_AS(mu_cap(CapGeometry<double>{pi}), DomainError);
}

TEST_CASE("interval and cap constants at hand-computed points") {
  // s = 1, q = 5/32: lambda = (27/32)^2 / (4/512) = 729/8.
  CHECK(lambda_interval(pi, 0.125).lambda == doctest::Approx(729.0 / 8).epsilon(1e-13));
  // s = 1, q = 1/3 (2/3 + 1) = 5/9: lambda = (4/9)^2 / (4/27) = 4/3.
  CHECK(lambda_cap(pi / 2, 1.0 / 3, Case::Singular).lambda == doctest::Approx(4.0 / 3).epsilon(1e-13));
  // Regular, s = 1, q = 1 (2 - 1) = 1: lambda = 0 = mu - 1.
  CHECK(std::abs(lambda_cap(pi / 2, 1.0, Case::Regular).lambda) <= 1e-15);
  CHECK(std::abs(lambda_punctured_sphere(0.125) - 1.125) <= 1e-12);
}

TEST_CASE("selection identity holds on the cap family") {
  for (int i = 1; i <= 100; ++i) {
    const double a = pi * i / 100;
    const double b = beta_cap(CapGeometry<double>{a});
    const double lam = lambda_cap(a, b, Case::Singular).lambda;
    CHECK(std::abs(lam - (b + 1)) <= 1e-12 * (b + 1));
  }
  for (int i = 1; i <= 100; ++i) {
    const double a = 0.5 * pi * i / 100;
    const double m = mu_cap(CapGeometry<double>{a});
    const double lam = lambda_cap(a, m, Case::Regular).lambda;
    CHECK(std::abs(lam - (m - 1)) <= 1e-12 * std::max(1.0, m));
  }
}

TEST_CASE("exponents from the selection identity agree with the cap formulas") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> A(0.05, pi);
  for (int i = 0; i < 200; ++i) {
    const double a = A(rng);
    CHECK(beta_from_lambda_cap(a) == doctest::Approx(beta_cap(CapGeometry<double>{a})).epsilon(1e-13));
    if (a <= pi / 2) CHECK(mu_from_lambda_cap(a) == doctest::Approx(mu_cap(CapGeometry<double>{a})).epsilon(1e-13));
  }
  CHECK_THROWS_AS(mu_from_lambda_cap(2.0), BranchError);
}

TEST_CASE("endpoint sum of the factored roots equals the geometric value") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> A(0.1, pi), G(0.05, 3);
  for (int i = 0; i < 200; ++i) {
    const double a = A(rng), g = G(rng);
    for (Case c : {Case::Singular, Case::Regular}) {
      try {
        const auto r = lambda_cap(a, g, c);
        CHECK(std::abs((r.A + r.B).real() - pi / (2 * a)) <= 1e-12 * pi / (2 * a));
        CHECK(std::abs((r.A + r.B).imag()) <= 1e-12);
        // A^2 B^2 = lambda gamma^3 and A^2 + B^2 = q.
        const auto ab = r.A * r.B;
        CHECK(std::abs(std::norm(ab) - r.lambda * g * g * g) <= 1e-10 * std::max(1.0, r.lambda * g * g * g));
        const auto sq = r.A * r.A + r.B * r.B;
        CHECK(std::abs(sq.real() - g * (2 * g + case_sign(c))) <= 1e-10 * std::max(1.0, g * g));
      } catch (const BranchError&) {
        CHECK(pi * pi / (4 * a * a) < g * (2 * g + case_sign(c)));
      }
    }
  }
}

TEST_CASE("cap exponents are the circle exponents on arcs of length pi/(2k)") {
  for (int k = 1; k <= 10; ++k) {
    CHECK(beta_cap(CapGeometry<double>{pi / (2 * k)}) == doctest::Approx(beta_circle(k)).epsilon(1e-14));
    CHECK(mu_cap(CapGeometry<double>{pi / (2 * k)}) == doctest::Approx(mu_circle(k)).epsilon(1e-14));
  }
}

TEST_CASE("annulus exponents are cap exponents of the half width") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double k = 2.5 * U(rng), a = k + (pi - k) * (0.05 + 0.9 * U(rng));
    const auto geo = make_annulus(k, a);
    CHECK(beta_annulus(geo) == doctest::Approx(beta_cap(CapGeometry<double>{(a - k) / 2})).epsilon(1e-14));
  }
  CHECK_THROWS_AS(make_annulus(1.0, 0.5), DomainError);
}

TEST_CASE("singular cap exponent decreases with the opening") {
  std::mt19937 rng(14);
  std::uniform_real_distribution<double> A(0.01, pi);
  for (int i = 0; i < 300; ++i) {
    double a = A(rng), b = A(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 1e-9) continue;
    CHECK(beta_cap(CapGeometry<double>{a}) > beta_cap(CapGeometry<double>{b}));
  }
}

TEST_CASE("lambda is decreasing in gamma inside the root regime") {
  for (double a : {pi / 4, pi / 2, 3 * pi / 4}) {
    double prev = lambda_cap(a, 0.01, Case::Singular).lambda;
    const double gmax = 0.9 * (std::sqrt(1 + 8 * std::pow(pi / (2 * a), 2)) - 1) / 4;
    for (double g = 0.02; g < gmax; g += 0.01) {
      const double cur = lambda_cap(a, g, Case::Singular).lambda;
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("branch error below the root regime and at the edge") {
  // s^2 = q exactly is the lambda = 0 edge and is accepted.
  CHECK(lambda_from_sum(std::sqrt(3.0), 1.0, Case::Singular).lambda == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(lambda_from_sum(1.0, 1.0, Case::Singular), BranchError);
  CHECK_THROWS_AS(lambda_from_sum(1.0, -1.0, Case::Singular), DomainError);
}

TEST_CASE("long double evaluation agrees with double") {
  for (int i = 1; i <= 20; ++i) {
    const long double a = std::numbers::pi_v<long double> * i / 20;
    const double bd = beta_cap(CapGeometry<double>{static_cast<double>(a)});
    const long double bl = beta_cap(CapGeometry<long double>{a});
    CHECK(std::abs(static_cast<double>(bl) - bd) <= 4e-16 * bd);
  }
}
