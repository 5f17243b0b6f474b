#pragma once

#include <string>
#include <vector>

namespace fieldtail {

// Built-in known-answer checks exposed by `fieldtail oracle <name>`.
struct OracleResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<std::string> oracle_names();

// Throws InvalidArgument for an unknown name.
OracleResult run_oracle(const std::string& name);

}  // namespace fieldtail
