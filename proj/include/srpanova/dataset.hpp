#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "srpanova/design.hpp"
#include "srpanova/region_graph.hpp"

namespace srp {

enum class ExpectedMode { shared_population, group_population };

ExpectedMode parse_expected_mode(const std::string& s);
std::string to_string(ExpectedMode m);

/**
 * Observed and expected counts for I areas x 4 groups, stored row-major
 * (cell = area * 4 + group).
 */
struct Dataset {
  std::vector<std::string> region_ids;
  std::vector<std::int64_t> y;
  std::vector<double> e;
  /// Empty, I entries or I x 4 entries.
  std::vector<double> populations;

  std::size_t n_areas() const { return region_ids.size(); }
  std::size_t n_cells() const { return y.size(); }
  std::int64_t count(std::size_t area, int group) const { return y[area * kGroups + group]; }
  double expected(std::size_t area, int group) const { return e[area * kGroups + group]; }

  /// Dimensions, non-negative counts, positive finite expected values.
  void check() const;
};

/**
 * Internally standardized expected counts.
 *
 * shared-population: E[i,g] = sum(Y) * (P_i / sum P) / 4, where P_i is the
 * area population (given per area, or summed over the area's group rows).
 * group-population: E[i,g] = sum(Y) * P[i,g] / sum P.
 * Both preserve the grand total of Y.
 */
std::vector<double> expected_counts(std::span<const std::int64_t> y,
                                    std::span<const double> populations, ExpectedMode mode);

/// Dataset with E from expected_counts; y and populations laid out as above.
Dataset make_standardized_dataset(std::vector<std::string> region_ids,
                                  std::vector<std::int64_t> y, std::vector<double> populations,
                                  ExpectedMode mode);

struct CountsFile {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/**
 * Reads the long-format counts CSV (`region_id,factor1,factor2,count[,population]`)
 * and pivots it to the graph's region order. Missing (area, group) cells are
 * zero-filled with a warning. Without a population column every area is
 * given the same population.
 */
CountsFile read_counts_csv(const std::filesystem::path& path, const FactorDesign& design,
                           const RegionGraph& graph, ExpectedMode mode);

/// Writes the counts CSV; the population column carries `populations` when
/// it holds I x 4 values, otherwise the expected counts.
void write_counts_csv(const std::filesystem::path& path, const Dataset& data,
                      const FactorDesign& design);

}  // namespace srp
