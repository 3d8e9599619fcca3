#pragma once

#include <string>
#include <vector>

namespace srp {

struct ScalarDiagnostic {
  std::string name;
  double rhat = 1.0;
  double ess = 0.0;
  /// Every draw of every chain was identical; rhat is then reported as 1.
  bool zero_variance = false;
};

/**
 * Rank-normalized split R-hat (larger of the bulk and folded versions) and
 * bulk effective sample size. Needs >= 2 chains of equal length >= 50.
 */
ScalarDiagnostic diagnose(const std::string& name, const std::vector<std::vector<double>>& chains);

/// Classic split R-hat on the raw values.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// ESS of the raw values, Geyer initial monotone sequence over all chains.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

}  // namespace srp
