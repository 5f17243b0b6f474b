#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldtail/config.hpp"
#include "fieldtail/error.hpp"

namespace fieldtail {

// Exit statuses of run_experiment.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

struct RunOutcome {
  int exit_code = kExitOk;
  std::string csv_path;       // ends in .partial after a numeric failure
  std::string manifest_path;  // empty after a validation failure
  std::string error;          // "<module-error>: message" when exit_code != 0
  std::optional<ErrorCode> error_code;  // unset for non-library exceptions
  nlohmann::json results;     // kind-specific scalars also echoed into the manifest
};

// Validates, runs and writes <kind>_<timestamp>.csv plus
// <kind>_<timestamp>.manifest.json under cfg.output_dir. Validation
// failures write nothing. Existing files are never overwritten; a numeric
// suffix is added instead.
RunOutcome run_experiment(ExperimentConfig cfg, std::optional<std::uint64_t> seed_override = std::nullopt);

// git-style blob hash (SHA-1 of "blob <len>\0" + content), hex encoded.
std::string git_blob_hash(const std::string& content);

struct SummaryOutcome {
  std::string report_path;
  std::size_t files = 0;
  std::size_t skipped_rows = 0;
};

// Reads every finished experiment CSV in `dir` and writes
// summary_<timestamp>.md there. Throws EmptyDirectory when none exist.
SummaryOutcome summarize(const std::string& dir);

}  // namespace fieldtail
