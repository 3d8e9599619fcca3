#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srpanova/mcmc.hpp"
#include "srpanova/random.hpp"

namespace srp {

/**
 * Adaptive Metropolis-within-Gibbs sampler for one ModelSpec.
 *
 * A sweep updates, in order: each intercept (random walk), each
 * unstructured term (random walk scaled by its group sd), each structured
 * field site by site, then every standard deviation by slice sampling on
 * log sd, followed by a slice-sampled joint rescaling of the sd and its terms
 * (the same sd update with the standardized terms held fixed), which keeps
 * mixing near sd = 0.
 *
 * A structured-field site move shifts phi_i by d and every other site of the
 * component by -d/n_c, so the field stays at zero mean; on a connected graph
 * the loaded intercepts rise by d/n and only cell i's predictors change.
 * The intercept prior enters the acceptance ratio, making the absorbed
 * recentring an exact move. After each field's pass the field is recentred
 * explicitly to remove round-off. Each field pass is followed by an exact
 * Gibbs move along the phi/omega ridge, which leaves eta unchanged.
 */
class GibbsSampler {
 public:
  GibbsSampler(const ModelSpec& spec, const Dataset& data, const IcarModel& icar,
               const McmcConfig& config, std::uint64_t seed);

  /// Intercepts at log(sum Y_g / sum E_g), terms at 0, sds at 0.1.
  void initialize();
  void set_state(const LatentState& state);
  LatentState state() const;

  /// Replaces the observed counts (used by the joint-distribution test).
  void set_counts(std::span<const std::int64_t> y);

  void sweep();
  /// Step sizes adapt every 50 sweeps while enabled.
  void set_adapting(bool on) { adapting_ = on; }

  const std::vector<double>& eta() const { return eta_; }
  double deviance() const;
  double log_posterior() const;
  std::size_t clamp_events() const { return clamp_events_; }
  /// Largest |eta| change seen when recentring (round-off only for a correct sampler).
  double max_recentre_drift() const { return max_drift_; }
  Rng& rng() { return rng_; }

  /// Canonical field values for effect k.
  std::vector<double> field(std::size_t k) const;
  std::vector<std::string> scalar_names() const;
  /// alpha (4), sigma_omega (4), sigma_phi (K), deviance.
  std::vector<double> scalars() const;

 private:
  double cell_ll(std::size_t c, double eta) const;
  void update_alpha();
  void update_omega();
  void update_field(std::size_t k);
  void update_field_ridge(std::size_t k);
  void recentre(std::size_t k);
  void update_sigma_omega(int g);
  void update_omega_block(int g);
  void update_sigma_field(std::size_t k);
  double slice_log_sd(double current, double dim, double sum_sq);
  template <class Cells>
  double slice_rescale(double sd, Cells&& cells);
  void adapt();
  void refresh_eta();

  ModelSpec spec_;
  McmcConfig config_;
  Rng rng_;

  std::size_t areas_ = 0;
  std::size_t effects_ = 0;
  std::vector<double> y_;
  std::vector<double> e_;
  std::vector<double> log_factorial_;

  // sparse rows of the scaled ICAR precision
  std::vector<double> q_diag_;
  std::vector<std::size_t> row_start_;
  std::vector<int> col_;
  std::vector<double> val_;
  std::vector<int> component_;
  std::vector<std::vector<int>> members_;
  double rank_ = 0;
  std::vector<std::vector<int>> loaded_;

  // state; raw_[k][i] - offset_[k][component] is the constrained field
  std::array<double, kGroups> alpha_{};
  std::vector<double> omega_;
  std::vector<std::vector<double>> raw_;
  std::vector<std::vector<double>> offset_;
  std::array<double, kGroups> sigma_omega_{};
  std::vector<double> sigma_phi_;
  std::vector<double> eta_;

  // adaptation
  bool adapting_ = false;
  int sweeps_ = 0;
  int batches_ = 0;
  std::array<double, kGroups> alpha_step_{};
  std::array<int, kGroups> alpha_acc_{};
  std::vector<double> omega_scale_;
  std::array<double, kGroups> omega_block_step_{};
  std::array<int, kGroups> omega_block_acc_{};
  std::vector<double> block_scratch_;
  std::vector<int> omega_acc_;
  std::vector<std::vector<double>> field_scale_;
  std::vector<std::vector<int>> field_acc_;

  mutable std::size_t clamp_events_ = 0;
  double max_drift_ = 0.0;
};

}  // namespace srp
