#pragma once

#include <map>
#include <string>
#include <vector>

namespace lds {

struct CheckResult {
  std::string group;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  std::string filter;  // run only groups containing this substring
  uint64_t seed = 1;
  // overridable gates; corrupting one produces a controlled failure report
  std::map<std::string, double> tolerances;

  double tol(const std::string& key, double fallback) const {
    auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};

// Property suite behind the verify subcommand: duality gaps, eigen closed
// forms, scaling identities, mollifier bound, localization direction,
// cumulant properties, sampler determinism.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

}  // namespace lds
