#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "srpanova/diagnostics.hpp"
#include "srpanova/mcmc.hpp"
#include "srpanova/scoring.hpp"

namespace srp {

/// Thinned post-warmup output of one chain.
struct ChainDraws {
  std::uint64_t seed = 0;
  DrawMatrix scalars;  ///< alpha, sigma_omega, sigma_phi, deviance
  DrawMatrix eta;      ///< I x 4 cells
  DrawMatrix fields;   ///< effect-major, I per effect
  std::size_t clamp_events = 0;
  double max_recentre_drift = 0.0;
};

ChainDraws run_chain(const ModelSpec& spec, const Dataset& data, const IcarModel& icar,
                     const McmcConfig& config, int chain_index);

struct FitResult {
  ModelSpec spec;
  std::string orientation;  ///< rendered orientation string
  std::vector<std::string> scalar_names;
  /// Per-chain scalars; the per-chain eta and field matrices are moved into
  /// the pooled ones below.
  std::vector<ChainDraws> chains;
  /// Chains stacked in chain order.
  DrawMatrix eta;
  DrawMatrix fields;
  std::vector<ScalarDiagnostic> diagnostics;
  DicResult dic;
  WaicResult waic;
  double cpu_seconds = 0.0;
  double max_rhat = 1.0;
  bool converged = false;
  std::size_t clamp_events = 0;
  std::vector<std::string> warnings;

  FitScore score() const;
  /// Drops the per-draw matrices, keeping scores and diagnostics.
  void release_draws();
};

/// Runs config.n_chains chains on up to config.workers threads. Pooled output
/// depends only on the seeds, never on scheduling.
FitResult fit(const ModelSpec& spec, const Dataset& data, const IcarModel& icar,
              const McmcConfig& config, const FactorDesign& design);

PosteriorSummary summarize(const FitResult& result, const Dataset& data, const FactorDesign& design);

/// Long-format draws: `chain,iter,scalar,value`.
void write_draws_csv(const std::filesystem::path& path, const FitResult& result);

nlohmann::json fit_summary_json(const FitResult& result);

}  // namespace srp
