// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "infsep/closed_forms.hpp"
#include "infsep/ergodic_eigen.hpp"
#include "infsep/profile_ode.hpp"
#include "infsep/reconstruct_verify.hpp"
#include "infsep/viscosity.hpp"

using namespace infsep;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome closed_form_exactness() {
  double worst = 0;
  for (int k = 1; k <= 10; ++k) {
    worst = std::max(worst, std::abs(beta_circle(k) - double(k * k) / double(2 * k + 1)));
    worst = std::max(worst, std::abs(mu_circle(k) - double(k * k) / double(2 * k - 1)));
  }
  worst = std::max(worst, std::abs(beta_cap(CapGeometry<double>{pi}) - 0.125));
  worst = std::max(worst, std::abs(beta_cap(CapGeometry<double>{pi / 2}) - 1.0 / 3));
  return {worst <= 1e-15, fmt("max abs error %.2e", worst)};
}

Outcome ergodic_identity() {
  double ws = 0, wr = 0;
  for (int i = 1; i <= 100; ++i) {
    const double a = pi * i / 100;
    const double b = beta_cap(CapGeometry<double>{a});
    ws = std::max(ws, rel(lambda_cap(a, b, Case::Singular).lambda, b + 1));
    const double ar = 0.5 * pi * i / 100;
    const double m = mu_cap(CapGeometry<double>{ar});
    wr = std::max(wr, std::abs(lambda_cap(ar, m, Case::Regular).lambda - (m - 1)) / std::max(1.0, m));
  }
  return {ws <= 1e-12 && wr <= 1e-12, fmt("singular %.2e", ws) + fmt(", regular %.2e", wr)};
}

Outcome punctured_sphere() {
  const double e = rel(lambda_punctured_sphere(0.125), 1.125);
  return {e <= 1e-12, fmt("relative error %.2e", e)};
}

Outcome numerical_ergodic() {
  bool ok = true;
  std::string d;
  struct Case4 {
    SphericalDomain dom;
    double gamma, exact;
    const char* name;
  };
  for (const Case4& c : {Case4{SphericalDomain::arc(pi), 0.125, 91.125, "Arc(pi)"},
                         Case4{SphericalDomain::cap(pi / 2), 1.0 / 3, 4.0 / 3, "Cap(pi/2)"}}) {
    const auto t0 = std::chrono::steady_clock::now();
    const ErgodicRun run = estimate_lambda(c.dom, c.gamma);
    const double t = seconds_since(t0), e = rel(run.lambdaEstimate, c.exact);
    ok = ok && e <= 1e-3 && t <= 30;
    d += std::string(d.empty() ? "" : "; ") + c.name + fmt(" lambda %.6f", run.lambdaEstimate) + fmt(" rel %.1e", e) +
         fmt(" in %.2fs", t);
  }
  return {ok, d};
}

std::vector<std::pair<double, double>> exponents_by_alpha;

Outcome eigen_recovery() {
  bool ok = true;
  double worst = 0, slowest = 0;
  for (double a : {pi / 4, pi / 2, 3 * pi / 4, pi}) {
    const auto t0 = std::chrono::steady_clock::now();
    const EigenResult r = find_exponent(SphericalDomain::cap(a), Case::Singular);
    slowest = std::max(slowest, seconds_since(t0));
    const double e = rel(r.exponent, pi * pi / (4 * a * (pi + a)));
    worst = std::max(worst, e);
    exponents_by_alpha.emplace_back(a, r.exponent);
  }
  for (double a : {pi / 4, pi / 2}) {
    const auto t0 = std::chrono::steady_clock::now();
    const EigenResult r = find_exponent(SphericalDomain::cap(a), Case::Regular);
    slowest = std::max(slowest, seconds_since(t0));
    worst = std::max(worst, rel(r.exponent, pi * pi / (4 * a * (pi - a))));
  }
  ok = worst <= 1e-3 && slowest <= 300;
  return {ok, fmt("worst rel %.1e", worst) + fmt(", slowest %.1fs", slowest)};
}

Outcome profile_cross_validation() {
  double worstProfile = 0;
  for (double beta : {1.0 / 3, 0.8, 0.125, -4.0 / 3}) {
    for (bool half : {true, false}) {
      const double ell = branch_length(beta);
      const ProfileArc arc = half ? ProfileArc{ell, true} : ProfileArc{2 * ell, false};
      const Profile a = build_profile(beta, arc, ProfileMethod::Implicit, 1001);
      const Profile b = build_profile(beta, arc, ProfileMethod::Direct, 1001);
      worstProfile = std::max(worstProfile, (a.psi - b.psi).lpNorm<Eigen::Infinity>());
    }
  }
  const Profile s = build_profile(-1.0, {pi, false}, ProfileMethod::Implicit, 1001);
  double sinErr = 0;
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) sinErr = std::max(sinErr, std::abs(s.psi(i) - std::sin(s.sigma(i))));

  // Least-squares fit of ln(1 - psi) against ln(delta) near the critical point.
  // Corrections to the leading term scale like delta^(2/3), below 0.3% on this window.
  double worstExp = 0, worstC = 0;
  for (double beta : {1.0 / 3, 0.8, 0.125}) {
    const ImplicitRelation rel0 = make_relation(beta, 0.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = 40;
    for (int i = 0; i < m; ++i) {
      const double d = 1e-6 * std::pow(100.0, i / double(m - 1));
      const double x = std::log(d), y = std::log(1 - std::exp(log_psi_from_y(beta, invert_y(rel0, d))));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double c = std::exp((sy - slope * sx) / m);
    worstExp = std::max(worstExp, std::abs(slope - 4.0 / 3));
    worstC = std::max(worstC, rel(c, std::pow(3.0, 4.0 / 3) / 4 * beta * std::cbrt(beta + 1)));
  }
  const bool ok = worstProfile <= 1e-6 && sinErr <= 1e-10 && worstExp <= 0.02 && worstC <= 0.02;
  return {ok, fmt("implicit vs direct %.1e", worstProfile) + fmt(", sine %.1e", sinErr) +
                  fmt(", exponent off by %.3f", worstExp) + fmt(", constant rel %.3f", worstC)};
}

Outcome quartic_special_case() {
  const ImplicitRelation r = make_relation(0.125, pi);
  double worst = 0;
  for (int i = 1; i <= 100; ++i) {
    const double s = pi * i / 101;
    const double yi = invert_y(r, s);
    worst = std::max(worst, std::abs(quartic_alpha_pi(s) - yi) / std::max(1.0, std::abs(yi)));
  }
  return {worst <= 1e-8, fmt("max difference %.1e", worst)};
}

Outcome monotonicity_suite() {
  ErgodicConfig c;
  c.refine = false;
  bool gammaOk = true, inclusionOk = true, alphaOk = true;
  for (const SphericalDomain& d : {SphericalDomain::cap(pi / 2), SphericalDomain::arc(2.0)}) {
    const double a = estimate_lambda(d, 0.2, c).lambdaEstimate, b = estimate_lambda(d, 0.3, c).lambdaEstimate,
                 e = estimate_lambda(d, 0.4, c).lambdaEstimate;
    gammaOk = gammaOk && a > b && b > e;
  }
  double prev = 1e300;
  for (double a : {0.6, 0.9, 1.3, 1.8, 2.4}) {
    const double lam = estimate_lambda(SphericalDomain::cap(a), 0.3, c).lambdaEstimate;
    inclusionOk = inclusionOk && lam < prev;
    prev = lam;
  }
  for (std::size_t i = 1; i < exponents_by_alpha.size(); ++i)
    alphaOk = alphaOk && exponents_by_alpha[i].second < exponents_by_alpha[i - 1].second;
  if (exponents_by_alpha.size() < 2) alphaOk = false;

  // Ordered, compatible Dirichlet data produce ordered discrete solutions.
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> D(0, 20), J(-2.5, 2.5), Inc(0, 2.5);
  const auto dom = SphericalDomain::arc(2.0);
  const Grid1D g = make_grid_1d(dom, 201, 0.1);
  const HamiltonianSpec ham = HamiltonianSpec::make(0.5, Case::Singular, 0.2, monotone_delta(2.0, g.h));
  int ordered = 0;
  for (int t = 0; t < 50; ++t) {
    const double a1 = D(rng), b1 = a1 + J(rng), a2 = a1 + Inc(rng), b2 = b1 + Inc(rng);
    const SolveResult lo = solve_1d(dom, ham, g, BoundaryPolicy::dirichlet(a1, b1));
    const SolveResult hi = solve_1d(dom, ham, g, BoundaryPolicy::dirichlet(a2, b2));
    if ((hi.w - lo.w).minCoeff() >= -1e-9) ++ordered;
  }
  const bool ok = gammaOk && inclusionOk && alphaOk && ordered == 50;
  return {ok, std::string("gamma ") + (gammaOk ? "ok" : "violated") + ", inclusion " + (inclusionOk ? "ok" : "violated") +
                  ", alpha " + (alphaOk ? "ok" : "violated") + ", comparison " + std::to_string(ordered) + "/50"};
}

Outcome two_d_machinery() {
  const auto t0 = std::chrono::steady_clock::now();
  const SphereMask m = SphereMask::from_predicate(64, 128, [](const Eigen::Vector3d& p) { return p.z() > 0; });
  const ErgodicRun r2 = estimate_lambda(SphericalDomain::general(m), 1.0 / 3);
  const double t = seconds_since(t0);
  const ErgodicRun r1 = estimate_lambda(SphericalDomain::cap(pi / 2), 1.0 / 3);
  const double e = rel(r2.lambdaEstimate, r1.lambdaEstimate);
  return {e <= 5e-3 && t <= 600, fmt("2D %.6f", r2.lambdaEstimate) + fmt(" vs 1D %.6f", r1.lambdaEstimate) +
                                     fmt(", rel %.1e", e) + fmt(", %.1fs", t)};
}

Outcome barrier_asymptotics() {
  const double gamma = 1.0 / 3, eps = 0.1;
  const auto dom = SphericalDomain::cap(pi / 2);
  std::vector<GradientBoundReport> reps;
  for (int n : {201, 401, 801}) {
    const Grid1D g = make_grid_1d(dom, n, 0.2);
    const HamiltonianSpec ham = HamiltonianSpec::make(gamma, Case::Singular, eps, monotone_delta(2 * gamma + 1, g.h));
    reps.push_back(gradient_bound_check(solve_1d(dom, ham, g, BoundaryPolicy::barrier()), ham));
  }
  for (double dt : {0.02, 0.01}) {
    Grid2DOptions o;
    o.dtheta = dt;
    o.rho0 = 0.2;
    const HamiltonianSpec ham = HamiltonianSpec::make(gamma, Case::Singular, eps, monotone_delta(2 * gamma + 1, dt));
    reps.push_back(gradient_bound_check(solve_2d(dom, ham, make_grid_2d(dom, o), BoundaryPolicy::barrier()), ham));
  }
  double offLo = 1e300, offHi = 0, gLo = 1e300, gHi = 0;
  for (const auto& r : reps) {
    offLo = std::min(offLo, r.maxBarrierOffset);
    offHi = std::max(offHi, r.maxBarrierOffset);
    gLo = std::min(gLo, r.maxScaledGradient);
    gHi = std::max(gHi, r.maxScaledGradient);
  }
  const bool ok = std::isfinite(offHi) && std::isfinite(gHi) && offHi <= 1.25 * offLo && gHi <= 1.25 * gLo;
  return {ok, fmt("barrier offset in [%.4f", offLo) + fmt(", %.4f]", offHi) + fmt(", scaled gradient in [%.4f", gLo) +
                  fmt(", %.4f]", gHi)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"closed-form exactness", closed_form_exactness},
      {"ergodic identity", ergodic_identity},
      {"punctured-sphere consistency", punctured_sphere},
      {"numerical ergodic solver vs closed form", numerical_ergodic},
      {"eigen recovery", eigen_recovery},
      {"profile cross-validation", profile_cross_validation},
      {"quartic special case", quartic_special_case},
      {"monotonicity suite", monotonicity_suite},
      {"2D machinery", two_d_machinery},
      {"barrier and gradient bounds", barrier_asymptotics},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%2zu] %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
