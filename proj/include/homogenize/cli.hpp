#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace homog {

inline constexpr const char* toolkit_version = "homogenize 0.1.0";

/// Process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_convergence = 3,
  exit_guard = 4,
};

/// Validated run configuration. Unknown keys anywhere are rejected.
struct RunConfig {
  nlohmann::json document;  // with defaults filled in

  /// Parses and validates; applies `overrides` ("a.b=value") first.
  static RunConfig parse(const nlohmann::json& raw, const std::vector<std::string>& overrides = {});
  static RunConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

  /// FNV-1a of the canonical dump without `threads` and `output`, 16 hex digits.
  std::string hash() const;
  std::filesystem::path output_directory() const;
  int threads() const;
};

/// Applies one dotted-path override in place. The value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(nlohmann::json& document, const std::string& assignment);

/// Entry point shared by the binary and the tests. Writes artifacts under
/// the configured output directory and returns an ExitCode. Errors are
/// reported as a JSON object on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace homog
