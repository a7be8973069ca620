#include "infsep/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "infsep/errors.hpp"

#ifndef INFSEP_VERSION
#define INFSEP_VERSION "0.0.0"
#endif

namespace infsep {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw DomainError(where + " must be a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw DomainError("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DomainError(std::string("wrong type for key '") + key + "'");
  }
}

json newton_json(const NewtonOptions& o) {
  return {{"maxIterations", o.maxIterations},  {"residualTol", o.residualTol},
          {"stepTol", o.stepTol},              {"stagnationTol", o.stagnationTol},
          {"maxBacktracks", o.maxBacktracks},  {"initialPseudoRate", o.initialPseudoRate}};
}

std::string case_name(Case c) { return c == Case::Singular ? "singular" : "regular"; }

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_string(const std::vector<std::string>& header, const std::vector<Eigen::VectorXd>& columns) {
  if (header.size() != columns.size()) throw DomainError("CSV header and column count differ");
  const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw DomainError("CSV columns differ in length");
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (k) out += ',';
      out += format_double(columns[k](i));
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write " + path.string());
  f << text;
  if (!f) throw DomainError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

SphericalDomain make_domain(const DomainSpec& s) {
  if (s.kind == "cap") return SphericalDomain::cap(s.alpha);
  if (s.kind == "arc") return SphericalDomain::arc(s.length, s.bothEnds);
  if (s.kind == "annulus") return SphericalDomain::annulus(s.kappa, s.alpha);
  if (s.kind == "punctured-cap") return SphericalDomain::punctured_cap(s.alpha);
  if (s.kind == "punctured-sphere") return SphericalDomain::punctured_sphere();
  if (s.kind == "mask") {
    if (s.maskPath.empty()) throw DomainError("mask domain needs a mask file");
    return SphericalDomain::general(SphereMask::parse(read_text(s.maskPath)));
  }
  throw DomainError("unknown domain kind '" + s.kind + "'");
}

json to_json(const RunConfig& c) {
  const ErgodicConfig& e = c.ergodic;
  return {
      {"command", c.command},
      {"domain",
       {{"kind", c.domain.kind},
        {"alpha", c.domain.alpha},
        {"kappa", c.domain.kappa},
        {"length", c.domain.length},
        {"bothEnds", c.domain.bothEnds},
        {"maskPath", c.domain.maskPath}}},
      {"case", case_name(c.kind)},
      {"gamma", c.gamma},
      {"beta", c.beta},
      {"profileN", c.profileN},
      {"method", c.method},
      {"ergodic",
       {{"eps0", e.eps0},
        {"stages", e.stages},
        {"rho0", e.rho0},
        {"deltaSafety", e.deltaSafety},
        {"refine", e.refine},
        {"n1d", e.n1d},
        {"stretch", e.stretch},
        {"dtheta", e.dtheta},
        {"nphi", e.nphi},
        {"force2d", e.force2d},
        {"newton", newton_json(e.newton)}}},
      {"relTol", c.relTol},
      {"outDir", c.outDir},
      {"seed", c.seed},
      {"ambientSamples", c.ambientSamples},
  };
}

RunConfig config_from_json(const json& j, RunConfig c) {
  check_keys(j, {"command", "domain", "case", "gamma", "beta", "profileN", "method", "ergodic", "relTol", "outDir", "seed",
                 "ambientSamples"},
             "config");
  take(j, "command", c.command);
  if (j.contains("domain")) {
    const json& d = j.at("domain");
    check_keys(d, {"kind", "alpha", "kappa", "length", "bothEnds", "maskPath"}, "domain");
    take(d, "kind", c.domain.kind);
    take(d, "alpha", c.domain.alpha);
    take(d, "kappa", c.domain.kappa);
    take(d, "length", c.domain.length);
    take(d, "bothEnds", c.domain.bothEnds);
    take(d, "maskPath", c.domain.maskPath);
  }
  if (j.contains("case")) {
    std::string k;
    take(j, "case", k);
    if (k == "singular") c.kind = Case::Singular;
    else if (k == "regular") c.kind = Case::Regular;
    else throw DomainError("case must be 'singular' or 'regular'");
  }
  take(j, "gamma", c.gamma);
  take(j, "beta", c.beta);
  take(j, "profileN", c.profileN);
  take(j, "method", c.method);
  if (j.contains("ergodic")) {
    const json& e = j.at("ergodic");
    check_keys(e, {"eps0", "stages", "rho0", "deltaSafety", "refine", "n1d", "stretch", "dtheta", "nphi", "force2d", "newton"},
               "ergodic");
    ErgodicConfig& g = c.ergodic;
    take(e, "eps0", g.eps0);
    take(e, "stages", g.stages);
    take(e, "rho0", g.rho0);
    take(e, "deltaSafety", g.deltaSafety);
    take(e, "refine", g.refine);
    take(e, "n1d", g.n1d);
    take(e, "stretch", g.stretch);
    take(e, "dtheta", g.dtheta);
    take(e, "nphi", g.nphi);
    take(e, "force2d", g.force2d);
    if (e.contains("newton")) {
      const json& n = e.at("newton");
      check_keys(n, {"maxIterations", "residualTol", "stepTol", "stagnationTol", "maxBacktracks", "initialPseudoRate"},
                 "newton");
      take(n, "maxIterations", g.newton.maxIterations);
      take(n, "residualTol", g.newton.residualTol);
      take(n, "stepTol", g.newton.stepTol);
      take(n, "stagnationTol", g.newton.stagnationTol);
      take(n, "maxBacktracks", g.newton.maxBacktracks);
      take(n, "initialPseudoRate", g.newton.initialPseudoRate);
    }
  }
  take(j, "relTol", c.relTol);
  take(j, "outDir", c.outDir);
  take(j, "seed", c.seed);
  take(j, "ambientSamples", c.ambientSamples);
  return c;
}

std::string tool_version() { return INFSEP_VERSION; }

json result_record(const RunConfig& cfg, json result) {
  return {{"tool", "infsep"}, {"version", tool_version()}, {"config", to_json(cfg)}, {"result", std::move(result)}};
}

json to_json(const ErgodicRun& run) {
  json stages = json::array();
  for (const ErgodicStage& s : run.stages)
    stages.push_back({{"eps", s.eps}, {"delta", s.delta}, {"h", s.h}, {"value", s.value}});
  return {{"gamma", run.gamma},
          {"domain", run.domain},
          {"lambda", run.lambdaEstimate},
          {"extrapolationError", run.extrapolationError},
          {"levelEstimates", run.levelEstimates},
          {"monotoneTail", run.monotoneTail},
          {"twoD", run.twoD},
          {"rho0", run.rho0},
          {"nodes", run.finest.w.size()},
          {"stages", stages}};
}

json to_json(const EigenResult& r) {
  json hist = json::array();
  for (const auto& [lo, hi] : r.bracketHistory) hist.push_back({lo, hi});
  json evals = json::array();
  for (const auto& [g, v] : r.evaluations) evals.push_back({{"gamma", g}, {"g", v}});
  return {{"exponent", r.exponent},
          {"caseSign", r.caseSign},
          {"residual", r.residual},
          {"lambdaAt", r.lambdaAt},
          {"initialBracket",
           {{"lo", r.initial.lo}, {"hi", r.initial.hi}, {"fallback", r.initial.fallback}, {"widened", r.initial.widened}}},
          {"bracketHistory", hist},
          {"evaluations", evals}};
}

}  // namespace infsep
