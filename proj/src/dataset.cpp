#include "srpanova/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "srpanova/csv.hpp"
#include "srpanova/error.hpp"

namespace srp {

ExpectedMode parse_expected_mode(const std::string& s) {
  if (s == "shared-population") return ExpectedMode::shared_population;
  if (s == "group-population") return ExpectedMode::group_population;
  throw InputError("unknown expected-count mode '" + s +
                   "' (expected shared-population or group-population)");
}

std::string to_string(ExpectedMode m) {
  return m == ExpectedMode::shared_population ? "shared-population" : "group-population";
}

void Dataset::check() const {
  const std::size_t cells = region_ids.size() * kGroups;
  if (y.size() != cells || e.size() != cells) {
    throw InputError("dataset dimensions do not match " + std::to_string(region_ids.size()) +
                     " areas x 4 groups");
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (y[c] < 0) throw InputError("negative count in area '" + region_ids[c / kGroups] + "'");
    if (!(e[c] > 0.0) || !std::isfinite(e[c])) {
      throw InputError("non-positive expected count in area '" + region_ids[c / kGroups] + "'");
    }
  }
}

std::vector<double> expected_counts(std::span<const std::int64_t> y,
                                    std::span<const double> populations, ExpectedMode mode) {
  if (y.size() % kGroups != 0) throw InputError("count vector is not I x 4");
  const std::size_t areas = y.size() / kGroups;
  long double total = 0;
  for (auto v : y) {
    if (v < 0) throw InputError("negative count");
    total += static_cast<long double>(v);
  }
  if (total <= 0) throw InputError("all counts are zero; expected counts are undefined");

  const bool per_group = populations.size() == y.size();
  if (!per_group && populations.size() != areas) {
    throw InputError("population vector must have I or I x 4 entries");
  }
  if (mode == ExpectedMode::group_population && !per_group) {
    throw InputError("group-population mode needs a population for every (area, group)");
  }
  std::vector<long double> weight(y.size());
  for (std::size_t i = 0; i < areas; ++i) {
    long double area_pop = 0;
    for (int g = 0; g < kGroups; ++g) {
      const double p = per_group ? populations[i * kGroups + g] : populations[i];
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw InputError("zero or invalid population in area " + std::to_string(i + 1));
      }
      if (mode == ExpectedMode::group_population) weight[i * kGroups + g] = p;
      if (per_group) area_pop += p;
    }
    if (!per_group) area_pop = populations[i];
    if (mode == ExpectedMode::shared_population) {
      for (int g = 0; g < kGroups; ++g) weight[i * kGroups + g] = area_pop / kGroups;
    }
  }
  const long double wsum = std::accumulate(weight.begin(), weight.end(), 0.0L);
  std::vector<double> e(y.size());
  for (std::size_t c = 0; c < y.size(); ++c) {
    e[c] = static_cast<double>(total * weight[c] / wsum);
  }
  return e;
}

Dataset make_standardized_dataset(std::vector<std::string> region_ids,
                                  std::vector<std::int64_t> y, std::vector<double> populations,
                                  ExpectedMode mode) {
  Dataset d;
  d.region_ids = std::move(region_ids);
  d.e = expected_counts(y, populations, mode);
  d.y = std::move(y);
  d.populations = std::move(populations);
  d.check();
  return d;
}

CountsFile read_counts_csv(const std::filesystem::path& path, const FactorDesign& design,
                           const RegionGraph& graph, ExpectedMode mode) {
  const auto t = csv::read(path);
  csv::expect_header(t, path, {"region_id", "factor1", "factor2", "count"}, {"population"});
  const bool has_pop = t.header.size() == 5;
  const std::size_t areas = graph.size();

  CountsFile out;
  auto& d = out.dataset;
  d.region_ids = graph.region_ids();
  d.y.assign(areas * kGroups, 0);
  std::vector<double> pop(areas * kGroups, 0.0);
  std::vector<char> filled(areas * kGroups, 0);
  auto where = [&](std::size_t line) { return path.string() + ":" + std::to_string(line) + ": "; };

  for (const auto& row : t.rows) {
    const auto& f = row.fields;
    if (!graph.contains(f[0])) {
      throw InputError(where(row.line) + "region '" + f[0] + "' is not in the adjacency graph");
    }
    const std::size_t i = graph.index_of(f[0]);
    const int l1 = design.level_index(0, f[1]);
    const int l2 = design.level_index(1, f[2]);
    if (l1 < 0) throw InputError(where(row.line) + "unknown level '" + f[1] + "' of factor '" +
                                 design.factor_names[0] + "'");
    if (l2 < 0) throw InputError(where(row.line) + "unknown level '" + f[2] + "' of factor '" +
                                 design.factor_names[1] + "'");
    const std::size_t c = i * kGroups + FactorDesign::group_of(l1, l2);
    if (filled[c]) throw InputError(where(row.line) + "duplicate row for region '" + f[0] + "'");
    filled[c] = 1;
    const auto n = csv::parse_int(f[3], path, row.line, "count");
    if (n < 0) throw InputError(where(row.line) + "negative count");
    d.y[c] = n;
    if (has_pop) {
      pop[c] = csv::parse_double(f[4], path, row.line, "population");
      if (!(pop[c] > 0.0)) {
        throw InputError(where(row.line) + "zero population in area '" + f[0] + "'");
      }
    }
  }

  std::size_t missing = 0;
  for (std::size_t c = 0; c < filled.size(); ++c) {
    if (filled[c]) continue;
    ++missing;
    if (has_pop) {
      // borrow the area's population from any observed group row
      const std::size_t i = c / kGroups;
      for (int g = 0; g < kGroups; ++g) {
        if (filled[i * kGroups + g]) {
          pop[c] = pop[i * kGroups + g];
          break;
        }
      }
      if (pop[c] <= 0.0) {
        throw InputError(path.string() + ": area '" + d.region_ids[i] +
                         "' has no rows and therefore no population");
      }
    }
  }
  if (missing > 0) {
    out.warnings.push_back(std::to_string(missing) +
                           " (area, group) cells missing from counts; filled with count 0");
  }
  if (!has_pop) {
    out.warnings.push_back("no population column; all areas treated as equally populated");
    pop.assign(areas, 1.0);
  }
  d.e = expected_counts(d.y, pop, mode);
  d.populations = std::move(pop);
  d.check();
  return out;
}

void write_counts_csv(const std::filesystem::path& path, const Dataset& data,
                      const FactorDesign& design) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "region_id,factor1,factor2,count,population\n";
  const bool per_group = data.populations.size() == data.n_cells();
  for (std::size_t i = 0; i < data.n_areas(); ++i) {
    for (int g = 0; g < kGroups; ++g) {
      const std::size_t c = i * kGroups + g;
      out << data.region_ids[i] << ',' << design.level_names[0][FactorDesign::level1_of(g)] << ','
          << design.level_names[1][FactorDesign::level2_of(g)] << ',' << data.y[c] << ','
          << csv::format_double(per_group ? data.populations[c] : data.e[c]) << '\n';
    }
  }
}

}  // namespace srp
