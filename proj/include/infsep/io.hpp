#pragma once
// Run configuration and machine-readable output.
//
// Doubles are written in the shortest form that parses back to the same
// binary64 value, so CSV and JSON outputs are byte-stable. Every result record
// embeds the fully resolved RunConfig; nothing is left to implicit defaults.

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "infsep/domain.hpp"
#include "infsep/ergodic_eigen.hpp"

namespace infsep {

std::string format_double(double x);

std::string csv_string(const std::vector<std::string>& header, const std::vector<Eigen::VectorXd>& columns);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

struct DomainSpec {
  // cap | arc | annulus | punctured-cap | punctured-sphere | mask
  std::string kind = "cap";
  double alpha = 1.5707963267948966;
  double kappa = 0;
  double length = 3.141592653589793;
  bool bothEnds = true;
  std::string maskPath;  // text raster, used when kind == "mask"
};

SphericalDomain make_domain(const DomainSpec& spec);

struct RunConfig {
  std::string command;
  DomainSpec domain;
  Case kind = Case::Singular;
  double gamma = 0;  // 0: not set
  // profile construction
  double beta = 0;
  int profileN = 2001;
  std::string method = "implicit";  // implicit | direct
  ErgodicConfig ergodic;
  double relTol = 1e-4;  // exponent search
  std::string outDir = "out";
  std::uint64_t seed = 1;
  int ambientSamples = 64;
};

nlohmann::json to_json(const RunConfig& cfg);
// Overlays the keys present in j onto base. Unknown keys and wrong types throw
// DomainError.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

std::string tool_version();

// Result record: {"tool", "version", "config", "result"}.
nlohmann::json result_record(const RunConfig& cfg, nlohmann::json result);

nlohmann::json to_json(const ErgodicRun& run);
nlohmann::json to_json(const EigenResult& res);

}  // namespace infsep
