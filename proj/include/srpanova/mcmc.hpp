#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "srpanova/dataset.hpp"
#include "srpanova/design.hpp"
#include "srpanova/icar.hpp"

namespace srp {

/// Linear predictors are clamped to this range inside the likelihood.
inline constexpr double kEtaClamp = 30.0;

struct McmcConfig {
  int n_chains = 4;
  int warmup = 2000;
  int keep = 2000;
  int thin = 1;
  std::uint64_t master_seed = 1;
  double adapt_target = 0.44;
  /// Upper bound of the Uniform(0, sd_upper) prior on every standard deviation.
  double sd_upper = 100.0;
  /// sd of the Normal(0, intercept_sd^2) prior on each intercept.
  double intercept_sd = 1000.0;
  /// Threads used for chains; 0 picks the hardware concurrency.
  int workers = 0;
  /// Test hook: when false every standard deviation stays at its initial value.
  bool update_sd = true;

  /// Throws InputError on invalid settings. `for_scoring` enforces keep * chains >= 400.
  void validate(bool for_scoring = true) const;
};

/**
 * Full latent state. Fields are stored in their constrained form: each phi
 * vector has zero mean on every graph component.
 */
struct LatentState {
  std::array<double, kGroups> alpha{};
  std::vector<double> omega;              ///< I x 4 row-major
  std::vector<std::vector<double>> phi;   ///< one I-vector per structured effect
  std::array<double, kGroups> sigma_omega{};
  std::vector<double> sigma_phi;

  static LatentState zeros(std::size_t areas, std::size_t effects);
};

/// eta[i * 4 + g] = alpha_g + omega_ig + sum of loaded phi_k[i].
std::vector<double> linear_predictor(const LatentState& state, const EffectIncidence& incidence);

/// Poisson log-likelihood of every cell, with eta clamped to +-kEtaClamp.
double poisson_loglik(const std::vector<double>& eta, const Dataset& data,
                      std::size_t* clamp_events = nullptr);

/**
 * Log of the unnormalized posterior density:
 *   Poisson likelihood
 *   + Normal(0, intercept_sd^2) on each alpha_g
 *   + Normal(0, sigma_omega_g^2) on each omega_ig
 *   + sum_k [-(rank/2) log sigma_k^2 - phi_k' Q phi_k / (2 sigma_k^2)]
 *   + log Uniform(0, sd_upper) on every sd (-inf outside the support).
 */
double log_unnormalized_posterior(const LatentState& state, const ModelSpec& spec,
                                  const Dataset& data, const IcarModel& icar,
                                  const McmcConfig& config, std::size_t* clamp_events = nullptr);

/**
 * Moves each field to zero mean on every component. On a connected graph the
 * removed mean is added to the intercepts of the groups loading that field,
 * so every linear predictor is unchanged. With several components only the
 * size-weighted overall mean can be absorbed.
 */
void recenter_and_absorb(LatentState& state, const EffectIncidence& incidence,
                         const IcarModel& icar);

}  // namespace srp
