#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "srpanova/dataset.hpp"
#include "srpanova/design.hpp"

namespace srp {

/// Row-major draws x columns matrix.
struct DrawMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DrawMatrix() = default;
  DrawMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  void append_row(std::span<const double> r);
};

/// Entry (s, cell) = Y log(E theta) - E theta - log Y! at draw s, theta = exp(eta).
DrawMatrix pointwise_loglik(const DrawMatrix& eta, const Dataset& data);

struct DicResult {
  double dic = 0.0;
  double pd = 0.0;
  double mean_deviance = 0.0;
  /// Deviance at the posterior mean of eta.
  double plugin_deviance = 0.0;
};

/// DIC with the plug-in deviance taken at the posterior mean of eta.
DicResult dic(const DrawMatrix& eta, const Dataset& data, std::size_t min_draws = 400);

struct WaicResult {
  double waic = 0.0;
  double p_waic = 0.0;
  double lppd = 0.0;
  /// Cells whose variance term exceeds 0.4.
  std::size_t unreliable_cells = 0;
};

/// WAIC, variance form: lppd = sum_c log mean_s exp(ll), p_waic = sum_c var_s(ll).
WaicResult waic(const DrawMatrix& pointwise, std::size_t min_draws = 400);

/// Type-7 quantile of already sorted values.
double quantile_sorted(std::span<const double> sorted, double p);

struct RiskSummary {
  double rr_mean = 0.0;
  double rr_median = 0.0;
  double rr_q025 = 0.0;
  double rr_q975 = 0.0;
  /// Fraction of draws with theta strictly above 1.
  double p_exceed = 0.0;
};

struct EffectSummary {
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct PosteriorSummary {
  std::vector<std::string> region_ids;
  std::vector<std::string> group_names;
  std::vector<RiskSummary> risk;  ///< I x 4 row-major
  std::vector<std::string> effect_labels;
  std::vector<EffectSummary> effects;  ///< K x I row-major

  const RiskSummary& risk_at(std::size_t area, int group) const { return risk[area * kGroups + group]; }
  const EffectSummary& effect_at(std::size_t k, std::size_t area) const {
    return effects[k * region_ids.size() + area];
  }
};

/**
 * Relative-risk summaries from exp(eta) per draw and field summaries from the
 * raw field draws. `fields` has one column per (effect, area), effect-major.
 */
PosteriorSummary summarize(const DrawMatrix& eta, const DrawMatrix& fields,
                           const std::vector<std::string>& effect_labels,
                           const std::vector<std::string>& region_ids,
                           const std::vector<std::string>& group_names);

/// Scores of one fitted label, as fed to comparison_table.
struct FitScore {
  Family family = Family::M0;
  std::string label;
  DicResult dic;
  WaicResult waic;
  double cpu_seconds = 0.0;
  bool converged = false;
  bool failed = false;
};

struct ComparisonRow {
  int rank = 0;
  FitScore score;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::string best_label;
};

/// Sorted ascending by DIC; ties broken by label; failed fits last.
ComparisonTable comparison_table(std::vector<FitScore> fits);

/**
 * Comparison CSV (`rank,family,label,dic,pd,waic,p_waic,cpu_seconds,converged`).
 * DIC/WAIC to 1 decimal, pD/p_waic to 2. Wall-clock time varies between runs,
 * so cpu_seconds is written as NA unless `with_timings` is set.
 */
void write_comparison_csv(const std::filesystem::path& path, const ComparisonTable& table,
                          bool with_timings);
/// Fixed-width text table in the Model / Combination / DIC / WAIC / CPU layout.
/// CPU column shows NA unless `timings`, so the text stays byte-stable.
std::string render_comparison(const ComparisonTable& table, std::size_t max_rows = 0,
                              bool timings = true);

void write_risk_csv(const std::filesystem::path& path, const PosteriorSummary& summary);
void write_effects_csv(const std::filesystem::path& path, const PosteriorSummary& summary);

}  // namespace srp
