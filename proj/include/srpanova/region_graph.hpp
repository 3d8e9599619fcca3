#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace srp {

using EdgeRecord = std::pair<std::string, std::string>;

/**
 * Areal adjacency graph.
 *
 * Regions are indexed in first-appearance order of the edge records. Each
 * undirected edge is stored in both endpoint lists. Immutable once built.
 */
class RegionGraph {
 public:
  RegionGraph() = default;

  std::size_t size() const noexcept { return region_ids_.size(); }
  std::size_t n_edges() const noexcept { return n_edges_; }
  int n_components() const noexcept { return n_components_; }

  const std::vector<std::string>& region_ids() const noexcept { return region_ids_; }
  const std::vector<std::vector<int>>& adjacency() const noexcept { return adjacency_; }
  const std::vector<int>& neighbors(std::size_t i) const { return adjacency_.at(i); }
  std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }

  /// Component id per region; ids are numbered by lowest member index.
  const std::vector<int>& component_label() const noexcept { return component_; }
  /// Member region indices of each component, ascending.
  const std::vector<std::vector<int>>& components() const noexcept { return members_; }

  /// Index of a region id; throws InputError when unknown.
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) > 0; }

  /// Histogram degree -> number of regions.
  std::map<std::size_t, std::size_t> degree_histogram() const;

  /// Re-checks symmetry, self-loops, islands and component labels.
  void check_invariants() const;

  friend RegionGraph load_adjacency(const std::vector<EdgeRecord>&,
                                    const std::vector<std::string>&, bool);

 private:
  std::vector<std::string> region_ids_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> component_;
  std::vector<std::vector<int>> members_;
  int n_components_ = 0;
  std::size_t n_edges_ = 0;
};

/**
 * Builds a symmetrized RegionGraph from undirected edge records.
 *
 * `declared` optionally lists region ids up front (they are ordered first, and
 * pairs must only reference them); when empty the ids are taken from the
 * records. Duplicate edges and reversed duplicates are accepted idempotently.
 * Self-loops are rejected. Regions of degree 0 raise GraphError naming them,
 * unless `drop_islands` is set, in which case they are removed.
 */
RegionGraph load_adjacency(const std::vector<EdgeRecord>& edges,
                           const std::vector<std::string>& declared = {},
                           bool drop_islands = false);

/// Parsed adjacency CSV: edges plus ids that appear with an empty neighbor.
struct AdjacencyFile {
  std::vector<EdgeRecord> edges;
  std::vector<std::string> region_ids;
};

/**
 * Reads the `region_id,neighbor_id` CSV. A row with an empty neighbor_id
 * declares a region without adding an edge (how islands are represented).
 * Throws InputError with the line number on malformed content.
 */
AdjacencyFile read_adjacency_csv(const std::filesystem::path& path);

// --- polygon contiguity -----------------------------------------------------

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Ring = std::vector<Point>;

/// One region's geometry: a set of polygons, each a list of rings (outer first).
struct RegionGeometry {
  std::string region_id;
  std::vector<std::vector<Ring>> polygons;
};

enum class ContiguityRule { queen, rook };

ContiguityRule parse_contiguity_rule(const std::string& s);

/**
 * Derives edges from shared polygon boundaries. Queen: any shared boundary
 * point; rook: a shared boundary segment of positive length. Throws
 * InputError naming the region for empty or degenerate geometry.
 */
std::vector<EdgeRecord> contiguity_from_polygons(const std::vector<RegionGeometry>& geometries,
                                                 ContiguityRule rule, double tolerance = 1e-9);

/// Reads a GeoJSON FeatureCollection of Polygon/MultiPolygon features with a `region_id` property.
std::vector<RegionGeometry> read_geojson_geometries(const std::filesystem::path& path);

}  // namespace srp
