#pragma once

#include "qsvlp/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace qsvlp {

enum class CheckStatus { Pass, Fail, Skipped, Diagnostic };

const char* to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double residual = 0.0;   // measured discrepancy (meaning depends on the check)
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  /// True when no check failed; skipped and diagnostic entries do not count.
  bool passed() const;
  nlohmann::json to_json() const;
};

/// Invariant suite for one scenario: analytic gradients against central
/// differences, closed-form pulse energies against quadrature, the
/// reduced-information identity, noise calibration of the synthesizer, and
/// the information rank. Never throws for numerical findings; they are
/// reported as check results.
ValidationReport validate_scenario(const Scenario& s, std::uint64_t seed = 1);

}  // namespace qsvlp
