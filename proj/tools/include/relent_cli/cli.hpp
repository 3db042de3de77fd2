#pragma once

// Command-line front end. run_cli parses argv (or a --config JSON file) into
// a RunConfig, dispatches to the library and writes one JSON report.
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error,
// 3 violation found, 4 infinite entropy where a finite one was expected.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

namespace relent::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitViolation = 3,
  kExitInfinite = 4,
};

struct RunConfig {
  std::string subcommand;
  std::string phi = "vn";
  std::string a_path;
  std::string b_path;
  std::string a_oracle;
  std::string b_oracle;
  std::string schedule = "2,4,8,16,32,64,128,256";
  std::string mode = "all";
  std::optional<std::uint64_t> seed;
  long long dim = 4;
  long long trials = 1000;
  int points = 3;
  int grid = 500;
  double eps = 0.1;
  double rel_tol = 1e-6;
  double eigen_tol = 1e-10;
  double match_tol = 1e-10;
  bool edge = false;
  bool expect_finite = false;
  std::string output;
};

/// Rejects unknown keys and keys that do not belong to the subcommand.
RunConfig config_from_json(const nlohmann::json& doc);

/// Validates the config, runs it and returns the report. `exit_code`
/// receives the verdict-dependent code.
nlohmann::json run(const RunConfig& config, int& exit_code);

/// The report with its "timing" member removed, serialized.
std::string deterministic_dump(const nlohmann::json& report);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relent::cli
