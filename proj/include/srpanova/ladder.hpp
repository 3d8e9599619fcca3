#pragma once

#include <optional>
#include <string>
#include <vector>

#include "srpanova/fit.hpp"

namespace srp {

struct LadderOptions {
  /// Families to include; empty means all seven.
  std::vector<Family> families;
  /// Fit one representative per structural class and share its scores.
  bool dedup = true;
  /// Keep each class's PosteriorSummary (needed for the best model's outputs).
  bool keep_summaries = true;
};

struct ClassFit {
  StructuralClass members;  ///< indices into LadderResult::specs
  std::optional<FitResult> fit;  ///< draws released; empty when the fit failed
  std::optional<PosteriorSummary> summary;
  std::string error;
};

struct LadderResult {
  std::vector<ModelSpec> specs;
  std::vector<ClassFit> classes;
  ComparisonTable table;

  /// Index into `classes` of the class holding `label`.
  std::size_t class_of(const std::string& label) const;
  std::size_t best_class() const { return class_of(table.best_label); }
};

/// Fits the requested ladder entries one structural class at a time. A fit
/// that throws marks its rows failed; the ladder carries on.
LadderResult run_ladder(const FactorDesign& design, const Dataset& data, const IcarModel& icar,
                        const McmcConfig& config, const LadderOptions& options);

}  // namespace srp
