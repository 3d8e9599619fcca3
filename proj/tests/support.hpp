#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "srpanova/region_graph.hpp"

namespace srp::testing {

inline std::string cell_id(int r, int c) { return "r" + std::to_string(r) + "c" + std::to_string(c); }

/// Rook lattice with rows x cols regions, ids in row-major order.
inline RegionGraph rook_lattice(int rows, int cols) {
  std::vector<EdgeRecord> edges;
  std::vector<std::string> ids;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      ids.push_back(cell_id(r, c));
      if (c + 1 < cols) edges.emplace_back(cell_id(r, c), cell_id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(cell_id(r, c), cell_id(r + 1, c));
    }
  }
  return load_adjacency(edges, ids);
}

/// Planar graph of n regions laid out in rows of `width`, every cell joined to
/// its right, lower and lower-right neighbours (a triangulated grid).
inline RegionGraph triangulated_grid(int n, int width) {
  std::vector<EdgeRecord> edges;
  std::vector<std::string> ids;
  auto id = [](int k) { return "a" + std::to_string(k); };
  for (int k = 0; k < n; ++k) {
    ids.push_back(id(k));
    const int r = k / width, c = k % width;
    if (c + 1 < width && k + 1 < n) edges.emplace_back(id(k), id(k + 1));
    const int down = (r + 1) * width + c;
    if (down < n) edges.emplace_back(id(k), id(down));
    if (c + 1 < width && down + 1 < n) edges.emplace_back(id(k), id(down + 1));
  }
  return load_adjacency(edges, ids);
}

inline RegionGraph path_graph() { return load_adjacency({{"A", "B"}, {"B", "C"}}); }

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("srp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Adjacency CSV text for a graph.
inline std::string adjacency_csv(const RegionGraph& g) {
  std::string s = "region_id,neighbor_id\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int j : g.neighbors(i)) {
      if (static_cast<std::size_t>(j) > i) s += g.region_ids()[i] + "," + g.region_ids()[j] + "\n";
    }
  }
  return s;
}

}  // namespace srp::testing
