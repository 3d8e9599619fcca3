#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srpanova/dataset.hpp"
#include "srpanova/design.hpp"
#include "srpanova/icar.hpp"
#include "srpanova/random.hpp"
#include "srpanova/region_graph.hpp"

namespace srp {

/// Ground truth for a synthetic dataset. A zero sd makes that effect identically zero.
struct SimTruth {
  std::array<double, kGroups> alpha{};
  /// sd per structured effect label ("phi11", "phi21", ..., "phi_g1", ...).
  std::map<std::string, double> sigma_structured;
  std::array<double, kGroups> sigma_unstructured{};
  std::uint64_t seed = 0;
};

struct SimResult {
  Dataset dataset;
  std::map<std::string, std::vector<double>> true_fields;
  /// I x 4 row-major relative risks, exp(alpha + omega + loaded fields).
  std::vector<double> true_theta;
};

/**
 * Exact draws from the sum-to-zero constrained intrinsic field with precision
 * Q / sd^2, by sampling independent normals on the non-null eigenvectors of
 * each component block.
 */
class IcarFieldSampler {
 public:
  explicit IcarFieldSampler(const IcarModel& model);

  std::vector<double> draw(double sd, Rng& rng) const;
  int size() const { return size_; }

 private:
  std::vector<ComponentSpectrum> spectra_;
  int size_ = 0;
};

std::vector<double> sample_icar_field(const IcarModel& model, double sd, std::uint64_t seed);

/**
 * Draws fields, unstructured terms and Poisson counts for one model spec.
 * `expected` is I x 4 row-major. The graph's scaled ICAR model is built
 * internally; pass a prepared sampler to avoid repeating the eigensolve.
 */
SimResult simulate_dataset(const SimTruth& truth, const ModelSpec& spec, const RegionGraph& graph,
                           const std::vector<double>& expected);
SimResult simulate_dataset(const SimTruth& truth, const ModelSpec& spec, const RegionGraph& graph,
                           const std::vector<double>& expected, const IcarFieldSampler& sampler);

/// truth.json: SimTruth plus model family/orientation and a uniform expected count.
struct TruthDocument {
  SimTruth truth;
  std::string family;
  std::string orientation;
  double expected_count = 0.0;
};

TruthDocument read_truth_json(const std::filesystem::path& path);
void write_truth_json(const std::filesystem::path& path, const TruthDocument& doc,
                      const std::string& label);

}  // namespace srp
