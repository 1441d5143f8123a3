#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ljw/stats.hpp"

namespace ljw {

inline constexpr const char* kVersion = "0.1.0";

/// Check ids accepted by run_check.
const std::vector<std::string>& check_ids();

/// Inputs of one run. Unset fields fall back to per-check defaults, which
/// are echoed into the report.
struct RunConfig {
  std::string scenario;
  std::string check;
  std::optional<std::size_t> paths;
  std::optional<int> steps;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  int workers = 1;
  /// Optional per-sample CSV destination.
  std::string dump_samples;
};

/// One flat record per check. Key set (in order): scenario, check, params,
/// lhs{mean,stderr}, rhs{mean,stderr}, paired{mean,stderr,z}, threshold,
/// pass, wall_ms, version.
struct RunReport {
  std::string scenario;
  std::string check;
  nlohmann::ordered_json params;
  Summary lhs;
  Summary rhs;
  PairedSummary paired;
  double threshold = 0.0;
  bool pass = false;
  double wall_ms = 0.0;
  std::string version = kVersion;

  nlohmann::ordered_json to_json() const;
  static RunReport from_json(const nlohmann::ordered_json& j);
  /// Pretty-printed JSON followed by a newline.
  std::string dump() const;
};

/// Executes one check. Throws NotFoundError for unknown scenarios and
/// std::invalid_argument for unknown checks.
RunReport run_check(const RunConfig& cfg);

}  // namespace ljw
