// infsep: closed forms, profiles, ergodic constants, exponents and verification
// reports for separable infinity-harmonic functions on cones.
//
// Exit codes: 0 success, 1 numerical failure (no convergence, no bracket),
// 2 usage error (bad flags, invalid geometry or configuration).

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>

#include "infsep/closed_forms.hpp"
#include "infsep/ergodic_eigen.hpp"
#include "infsep/errors.hpp"
#include "infsep/io.hpp"
#include "infsep/profile_ode.hpp"
#include "infsep/reconstruct_verify.hpp"

namespace {

using namespace infsep;
using nlohmann::json;
constexpr double kPi = std::numbers::pi;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by the solver commands. Optionals stay empty unless given, so a
// --config file supplies everything not set on the command line.
struct Flags {
  std::string config;
  bool degrees = false;
  std::optional<double> cap, arc, puncturedCap, gamma, beta, rho0, eps0, dtheta, tol;
  std::vector<double> annulus;
  bool oneEnd = false, bothEnds = false, puncturedSphere = false, noRefine = false, force2d = false;
  std::string mask, caseName, method, out;
  std::optional<int> n, stages, nphi, profileN;
  std::optional<std::uint64_t> seed;
  std::string profilePath;
};

void add_domain_flags(CLI::App* c, Flags& f) {
  c->add_option("--cap", f.cap, "spherical cap of opening alpha");
  c->add_option("--arc", f.arc, "circle arc of the given length");
  c->add_flag("--both-ends", f.bothEnds, "arc blows up at both ends (default)");
  c->add_flag("--one-end", f.oneEnd, "arc blows up at its far end only");
  c->add_option("--annulus", f.annulus, "annulus kappa alpha")->expected(2);
  c->add_option("--punctured-cap", f.puncturedCap, "cap of opening alpha with its pole removed");
  c->add_flag("--punctured-sphere", f.puncturedSphere, "sphere minus one point");
  c->add_option("--mask", f.mask, "raster domain file ('nlat nlon' then rows of 0/1)");
  c->add_flag("--degrees", f.degrees, "angles and lengths are given in degrees");
}

void add_solver_flags(CLI::App* c, Flags& f) {
  c->add_option("--config", f.config, "JSON run configuration; flags override it");
  c->add_option("--case", f.caseName, "singular or regular")->check(CLI::IsMember({"singular", "regular"}));
  c->add_option("--n", f.n, "1D grid nodes");
  c->add_option("--rho0", f.rho0, "boundary-layer cut distance (upper bound)");
  c->add_option("--eps0", f.eps0, "first absorption value");
  c->add_option("--stages", f.stages, "absorption stages (eps halves each stage)");
  c->add_option("--dtheta", f.dtheta, "2D ring spacing");
  c->add_option("--nphi", f.nphi, "2D longitude count (multiple of 8; 0 = automatic)");
  c->add_flag("--no-refine", f.noRefine, "skip the second grid level");
  c->add_flag("--force-2d", f.force2d, "solve S^2 domains on the 2D grid");
  c->add_option("--out", f.out, "output directory");
  c->add_option("--seed", f.seed, "seed for sampled checks");
}

RunConfig resolve(const std::string& command, const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    try {
      c = config_from_json(json::parse(read_text(f.config)));
    } catch (const json::exception& e) {
      throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  c.command = command;
  const double unit = f.degrees ? kPi / 180 : 1.0;
  int domains = 0;
  if (f.cap) {
    ++domains;
    c.domain.kind = "cap";
    c.domain.alpha = *f.cap * unit;
  }
  if (f.arc) {
    ++domains;
    c.domain.kind = "arc";
    c.domain.length = *f.arc * unit;
  }
  if (!f.annulus.empty()) {
    ++domains;
    c.domain.kind = "annulus";
    c.domain.kappa = f.annulus[0] * unit;
    c.domain.alpha = f.annulus[1] * unit;
  }
  if (f.puncturedCap) {
    ++domains;
    c.domain.kind = "punctured-cap";
    c.domain.alpha = *f.puncturedCap * unit;
  }
  if (f.puncturedSphere) {
    ++domains;
    c.domain.kind = "punctured-sphere";
  }
  if (!f.mask.empty()) {
    ++domains;
    c.domain.kind = "mask";
    c.domain.maskPath = f.mask;
  }
  if (domains > 1) throw UsageError("give at most one domain");
  if (f.oneEnd && f.bothEnds) throw UsageError("--one-end and --both-ends exclude each other");
  if (f.oneEnd) c.domain.bothEnds = false;
  if (f.bothEnds) c.domain.bothEnds = true;
  if (!f.caseName.empty()) c.kind = f.caseName == "singular" ? Case::Singular : Case::Regular;
  if (f.gamma) c.gamma = *f.gamma;
  if (f.beta) c.beta = *f.beta;
  if (f.profileN) c.profileN = *f.profileN;
  if (!f.method.empty()) c.method = f.method;
  if (f.n) c.ergodic.n1d = *f.n;
  if (f.rho0) c.ergodic.rho0 = *f.rho0;
  if (f.eps0) c.ergodic.eps0 = *f.eps0;
  if (f.stages) c.ergodic.stages = *f.stages;
  if (f.dtheta) c.ergodic.dtheta = *f.dtheta;
  if (f.nphi) c.ergodic.nphi = *f.nphi;
  if (f.noRefine) c.ergodic.refine = false;
  if (f.force2d) c.ergodic.force2d = true;
  if (f.tol) c.relTol = *f.tol;
  if (!f.out.empty()) c.outDir = f.out;
  if (f.seed) c.seed = *f.seed;
  return c;
}

void emit(const RunConfig& c, const std::string& name, const json& result) {
  const std::string text = result_record(c, result).dump(2) + "\n";
  write_text(std::filesystem::path(c.outDir) / name, text);
  std::cout << text;
}

std::pair<int, int> parse_range(const std::string& s) {
  try {
    const auto dots = s.find("..");
    if (dots == std::string::npos) {
      const int k = std::stoi(s);
      return {k, k};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw UsageError("range must look like 3 or 1..5");
  }
}

// Closed-form lambda, or NaN outside the root regime.
template <typename F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const BranchError&) {
    return std::nan("");
  } catch (const DomainError&) {
    return std::nan("");
  }
}

void print_row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) std::cout << (i ? "," : "") << cells[i];
  std::cout << '\n';
}

int cmd_exact(const Flags& f, const std::string& circleK) {
  const double unit = f.degrees ? kPi / 180 : 1.0;
  const bool withGamma = f.gamma.has_value();
  const double g = withGamma ? *f.gamma : 0;
  int printed = 0;
  if (!circleK.empty()) {
    const auto [k0, k1] = parse_range(circleK);
    if (k0 < 1 || k1 < k0) throw UsageError("circle range needs 1 <= k0 <= k1");
    print_row({"k", "beta", "mu"});
    for (int k = k0; k <= k1; ++k)
      print_row({std::to_string(k), format_double(beta_circle(k)), format_double(mu_circle(k))});
    ++printed;
  }
  if (f.cap) {
    const double a = *f.cap * unit;
    const double beta = beta_cap(CapGeometry<double>{a});
    const double mu = guarded([&] { return mu_cap(CapGeometry<double>{a}); });
    std::vector<std::string> head{"alpha", "beta", "mu"}, row{format_double(a), format_double(beta), format_double(mu)};
    if (withGamma) {
      head.insert(head.end(), {"gamma", "lambda_singular", "lambda_regular"});
      row.push_back(format_double(g));
      row.push_back(format_double(guarded([&] { return lambda_cap(a, g, Case::Singular).lambda; })));
      row.push_back(format_double(guarded([&] { return lambda_cap(a, g, Case::Regular).lambda; })));
    }
    print_row(head);
    print_row(row);
    ++printed;
  }
  if (f.arc) {
    // An arc blown up at both ends behaves as a cap of half its length.
    const double L = *f.arc * unit;
    const double half = f.oneEnd ? L : L / 2;
    std::vector<std::string> head{"length", "beta", "mu"};
    std::vector<std::string> row{format_double(L), format_double(guarded([&] { return beta_cap(CapGeometry<double>{half}); })),
                                 format_double(guarded([&] { return mu_cap(CapGeometry<double>{half}); }))};
    if (withGamma) {
      head.insert(head.end(), {"gamma", "lambda_singular", "lambda_regular"});
      row.push_back(format_double(g));
      row.push_back(format_double(guarded([&] { return lambda_cap(half, g, Case::Singular).lambda; })));
      row.push_back(format_double(guarded([&] { return lambda_cap(half, g, Case::Regular).lambda; })));
    }
    print_row(head);
    print_row(row);
    ++printed;
  }
  if (!f.annulus.empty()) {
    const auto geo = make_annulus(f.annulus[0] * unit, f.annulus[1] * unit);
    print_row({"kappa", "alpha", "beta", "mu"});
    print_row({format_double(geo.kappa), format_double(geo.alpha), format_double(beta_annulus(geo)),
               format_double(guarded([&] { return mu_annulus(geo); }))});
    ++printed;
  }
  if (f.puncturedSphere) {
    std::vector<std::string> head{"beta"}, row{format_double(beta_cap(CapGeometry<double>{kPi}))};
    if (withGamma) {
      head.insert(head.end(), {"gamma", "Lambda"});
      row.push_back(format_double(g));
      row.push_back(format_double(lambda_punctured_sphere(g)));
    }
    print_row(head);
    print_row(row);
    ++printed;
  }
  if (printed == 0) throw UsageError("exact needs --circle-k, --cap, --arc, --annulus or --punctured-sphere");
  return 0;
}

ProfileArc profile_arc(const RunConfig& c) {
  if (c.domain.kind == "cap") return {c.domain.alpha, true};
  if (c.domain.kind == "arc") return c.domain.bothEnds ? ProfileArc{c.domain.length, false} : ProfileArc{c.domain.length, true};
  throw UsageError("profiles are built on caps and arcs");
}

double profile_beta(const RunConfig& c, const ProfileArc& arc) {
  if (c.beta != 0) return c.beta;
  const double half = arc.criticalAtStart ? arc.length : arc.length / 2;
  return c.kind == Case::Singular ? beta_cap(CapGeometry<double>{half}) : -mu_cap(CapGeometry<double>{half});
}

Profile make_profile(const RunConfig& c) {
  const ProfileArc arc = profile_arc(c);
  if (c.method != "implicit" && c.method != "direct") throw UsageError("method must be implicit or direct");
  return build_profile(profile_beta(c, arc), arc, c.method == "implicit" ? ProfileMethod::Implicit : ProfileMethod::Direct,
                       c.profileN);
}

int cmd_profile(const RunConfig& c) {
  const Profile p = make_profile(c);
  write_text(std::filesystem::path(c.outDir) / "profile.csv", csv_string({"sigma", "psi", "y"}, {p.sigma, p.psi, p.y}));
  json samples = {{"sigma", std::vector<double>(p.sigma.data(), p.sigma.data() + p.sigma.size())},
                  {"psi", std::vector<double>(p.psi.data(), p.psi.data() + p.psi.size())}};
  emit(c, "profile.json",
       {{"beta", p.beta},
        {"arc", {{"length", p.arc.length}, {"criticalAtStart", p.arc.criticalAtStart}}},
        {"sigma0", p.sigma0},
        {"nodes", p.sigma.size()},
        {"csv", "profile.csv"},
        {"samples", samples}});
  return 0;
}

int cmd_ergodic(const RunConfig& c) {
  if (!(c.gamma > 0)) throw UsageError("ergodic needs --gamma > 0");
  ErgodicConfig e = c.ergodic;
  e.kind = c.kind;
  const SphericalDomain dom = make_domain(c.domain);
  const ErgodicRun run = estimate_lambda(dom, c.gamma, e);
  std::vector<std::string> head;
  std::vector<Eigen::VectorXd> cols;
  const SolveResult& s = run.finest;
  static const char* axes[] = {"x", "y", "z"};
  for (Eigen::Index k = 0; k < s.coords.cols(); ++k) {
    head.push_back(s.coords.cols() == 1 ? "sigma" : axes[k]);
    cols.push_back(s.coords.col(k));
  }
  Eigen::VectorXd band(s.band.size());
  for (std::size_t i = 0; i < s.band.size(); ++i) band(static_cast<Eigen::Index>(i)) = s.band[i];
  head.insert(head.end(), {"rho", "w", "grad", "band"});
  cols.insert(cols.end(), {s.rho, s.w, s.gradNorm, band});
  const std::filesystem::path dir(c.outDir);
  write_text(dir / "ergodic_field.csv", csv_string(head, cols));
  const Eigen::Index ns = static_cast<Eigen::Index>(run.stages.size());
  Eigen::VectorXd se(ns), sd(ns), sh(ns), sv(ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    const auto& st = run.stages[static_cast<std::size_t>(i)];
    se(i) = st.eps;
    sd(i) = st.delta;
    sh(i) = st.h;
    sv(i) = st.value;
  }
  write_text(dir / "ergodic_stages.csv", csv_string({"eps", "delta", "h", "eps_w_sigma0"}, {se, sd, sh, sv}));
  json r = to_json(run);
  r["csv"] = {"ergodic_field.csv", "ergodic_stages.csv"};
  emit(c, "ergodic.json", r);
  return 0;
}

int cmd_eigen(const RunConfig& c) {
  EigenConfig ec;
  ec.ergodic = c.ergodic;
  ec.relTol = c.relTol;
  const EigenResult r = find_exponent(make_domain(c.domain), c.kind, ec);
  emit(c, "eigen.json", to_json(r));
  return 0;
}

int cmd_verify(const Flags& f) {
  if (f.profilePath.empty()) throw UsageError("verify needs --profile FILE");
  json rec;
  try {
    rec = json::parse(read_text(f.profilePath));
  } catch (const json::exception& e) {
    throw UsageError(std::string("profile record is not valid JSON: ") + e.what());
  }
  if (!rec.contains("config") || !rec.contains("result")) throw UsageError("not a profile record");
  RunConfig c = config_from_json(rec.at("config"));
  c.command = "verify";
  if (!f.out.empty()) c.outDir = f.out;
  if (f.seed) c.seed = *f.seed;

  // Rebuild the profile from its configuration and compare with the stored samples.
  const Profile p = make_profile(c);
  const auto& stored = rec.at("result").at("samples");
  const auto sig = stored.at("sigma").get<std::vector<double>>();
  const auto psi = stored.at("psi").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(sig.size()) != p.sigma.size() || psi.size() != sig.size())
    throw UsageError("stored samples do not match the recorded configuration");
  double replay = 0;
  for (std::size_t i = 0; i < sig.size(); ++i)
    replay = std::max({replay, std::abs(sig[i] - p.sigma(static_cast<Eigen::Index>(i))),
                       std::abs(psi[i] - p.psi(static_cast<Eigen::Index>(i)))});

  SeparableSolution sol = from_profile(p);
  SeparableSolution samples = sol;
  samples.dpsi.resize(0);
  samples.d2psi.resize(0);
  samples.exactPsi = nullptr;
  samples.psi = Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size()));
  const ResidualReport sph = spherical_residual(samples);

  // Ambient points at radii in [0.5, 2] over the profile's angular range.
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> U(0, 1);
  const bool planar = sol.domain.is_arc();
  const double L = p.sigma(p.sigma.size() - 1);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < c.ambientSamples; ++i) {
    const double r = 0.5 + 1.5 * U(rng), t = L * U(rng), ph = 2 * kPi * U(rng);
    Eigen::VectorXd x(planar ? 2 : 3);
    if (planar) x << r * std::cos(t), r * std::sin(t);
    else x << r * std::sin(t) * std::cos(ph), r * std::sin(t) * std::sin(ph), r * std::cos(t);
    pts.push_back(x);
  }
  const AmbientReport amb = ambient_residual(sol, pts);

  json result = {{"profile", f.profilePath},
                 {"beta", p.beta},
                 {"replayMaxDifference", replay},
                 {"spherical",
                  {{"maxAbs", sph.maxAbs}, {"maxScaled", sph.maxScaled}, {"nodes", sph.count},
                   {"exclusionRadius", sph.exclusionRadius}}},
                 {"ambient",
                  {{"evaluated", amb.evaluated}, {"rejected", amb.rejected}, {"maxAbs", amb.maxAbs},
                   {"maxNormalized", amb.maxNormalized}}}};
  if (p.beta > 0) {
    const ComparisonReport cmp = comparison_check(sol, p.beta / 2);
    result["comparison"] = {{"betaK", p.beta / 2},        {"theta", cmp.theta},
                            {"minScaled", cmp.minScaled}, {"identityError", cmp.identityError},
                            {"positive", cmp.positive}};
  }
  emit(c, "verify.json", result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separable infinity-harmonic functions on cones over spherical domains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  Flags f;
  std::string circleK;
  CLI::App* exact = app.add_subcommand("exact", "closed-form exponents and ergodic constants");
  exact->add_option("--circle-k", circleK, "k or k0..k1");
  exact->add_option("--cap", f.cap, "cap opening");
  exact->add_option("--arc", f.arc, "arc length");
  exact->add_flag("--one-end", f.oneEnd, "arc blows up at one end");
  exact->add_option("--annulus", f.annulus, "annulus kappa alpha")->expected(2);
  exact->add_flag("--punctured-sphere", f.puncturedSphere, "sphere minus a point");
  exact->add_option("--gamma", f.gamma, "evaluate lambda at this gamma");
  exact->add_flag("--degrees", f.degrees, "angles in degrees");

  CLI::App* profile = app.add_subcommand("profile", "build a one-dimensional profile");
  add_domain_flags(profile, f);
  add_solver_flags(profile, f);
  profile->add_option("--beta", f.beta, "signed exponent (default: closed form of the domain)");
  profile->add_option("--nodes", f.profileN, "profile samples");
  profile->add_option("--method", f.method, "implicit or direct")->check(CLI::IsMember({"implicit", "direct"}));

  CLI::App* ergodic = app.add_subcommand("ergodic", "ergodic constant by vanishing absorption");
  add_domain_flags(ergodic, f);
  add_solver_flags(ergodic, f);
  ergodic->add_option("--gamma", f.gamma, "exponent gamma");

  CLI::App* eigen = app.add_subcommand("eigen", "exponent from lambda(g) = g + c");
  add_domain_flags(eigen, f);
  add_solver_flags(eigen, f);
  eigen->add_option("--tol", f.tol, "relative bracket width at which bisection stops");

  CLI::App* verify = app.add_subcommand("verify", "residual report for a profile record");
  verify->add_option("--profile", f.profilePath, "profile.json written by 'profile'")->required();
  verify->add_option("--out", f.out, "output directory");
  verify->add_option("--seed", f.seed, "seed for ambient sample points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (exact->parsed()) return cmd_exact(f, circleK);
    if (profile->parsed()) return cmd_profile(resolve("profile", f));
    if (ergodic->parsed()) return cmd_ergodic(resolve("ergodic", f));
    if (eigen->parsed()) return cmd_eigen(resolve("eigen", f));
    if (verify->parsed()) return cmd_verify(f);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (last residual " << e.lastResidual << ", stage " << e.stage << ")\n";
    return 1;
  } catch (const BracketError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SchemeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    // Invalid geometry, case or period: the request itself is malformed.
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
