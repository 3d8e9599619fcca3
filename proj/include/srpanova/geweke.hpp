#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srpanova/mcmc.hpp"
#include "srpanova/region_graph.hpp"

namespace srp {

struct GewekeOptions {
  std::size_t n_outer = 50000;
  /// Sampler sweeps between data refreshes in the successive-conditional chain.
  int sweeps_per_step = 1;
  /// Successive-conditional steps discarded (with adaptation on) before recording.
  std::size_t burn_in = 2000;
  /// Batches for the successive-conditional standard errors.
  std::size_t batches = 50;
  double z_threshold = 4.0;
  std::uint64_t seed = 1;
};

struct GewekeStatistic {
  std::string name;
  double marginal_mean = 0.0;
  double successive_mean = 0.0;
  double z = 0.0;
  bool pass = true;
};

struct GewekeReport {
  std::vector<GewekeStatistic> statistics;

  std::size_t n_pass() const;
  /// 1 for an empty report.
  double pass_fraction() const;
};

/**
 * Joint-distribution test: compares first and second moments of the
 * intercepts, every sd and two field sites between forward draws from the
 * prior and a chain alternating sampler sweeps with fresh data given the
 * current state. `expected` is I x 4 row-major.
 *
 * Refuses configurations whose priors make the test meaningless (unbounded,
 * or wide enough for the linear predictor to reach the likelihood clamp).
 */
GewekeReport geweke_joint_test(const ModelSpec& spec, const RegionGraph& graph,
                               const std::vector<double>& expected, const McmcConfig& config,
                               const GewekeOptions& options);

}  // namespace srp
