#include "srpanova/region_graph.hpp"

#include <algorithm>
#include <set>

#include "srpanova/csv.hpp"
#include "srpanova/error.hpp"

namespace srp {

std::size_t RegionGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown region id '" + id + "'");
  return it->second;
}

std::map<std::size_t, std::size_t> RegionGraph::degree_histogram() const {
  std::map<std::size_t, std::size_t> h;
  for (const auto& nb : adjacency_) ++h[nb.size()];
  return h;
}

void RegionGraph::check_invariants() const {
  std::vector<std::string> islands;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& nb = adjacency_[i];
    if (nb.empty()) islands.push_back(region_ids_[i]);
    for (int j : nb) {
      if (static_cast<std::size_t>(j) == i) {
        throw GraphError("self-loop at region '" + region_ids_[i] + "'", {region_ids_[i]});
      }
      const auto& back = adjacency_[j];
      if (!std::binary_search(back.begin(), back.end(), static_cast<int>(i))) {
        throw GraphError("asymmetric adjacency between '" + region_ids_[i] + "' and '" +
                         region_ids_[j] + "'");
      }
      if (component_[i] != component_[j]) {
        throw GraphError("component labels inconsistent across edge '" + region_ids_[i] +
                         "'-'" + region_ids_[j] + "'");
      }
    }
  }
  if (!islands.empty()) throw GraphError("island regions without neighbors", islands);
}

namespace {

void label_components(const std::vector<std::vector<int>>& adj, std::vector<int>& label,
                      std::vector<std::vector<int>>& members) {
  const int n = static_cast<int>(adj.size());
  label.assign(n, -1);
  members.clear();
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    const int c = static_cast<int>(members.size());
    members.emplace_back();
    label[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      members[c].push_back(v);
      for (int w : adj[v]) {
        if (label[w] < 0) {
          label[w] = c;
          stack.push_back(w);
        }
      }
    }
    std::sort(members[c].begin(), members[c].end());
  }
}

}  // namespace

RegionGraph load_adjacency(const std::vector<EdgeRecord>& edges,
                           const std::vector<std::string>& declared, bool drop_islands) {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  auto add = [&](const std::string& id) {
    if (id.empty()) throw InputError("empty region id");
    if (id.find(',') != std::string::npos) {
      throw InputError("region id '" + id + "' contains a comma");
    }
    if (index.emplace(id, ids.size()).second) ids.push_back(id);
  };
  for (const auto& id : declared) add(id);
  const bool closed = !declared.empty();
  for (const auto& [a, b] : edges) {
    for (const auto* id : {&a, &b}) {
      if (closed && !index.count(*id)) throw InputError("unknown region id '" + *id + "'");
      add(*id);
    }
  }
  if (ids.empty()) throw InputError("adjacency declares no regions");

  std::vector<std::set<int>> nb(ids.size());
  for (const auto& [a, b] : edges) {
    const int i = static_cast<int>(index[a]);
    const int j = static_cast<int>(index[b]);
    if (i == j) throw InputError("self-loop edge at region '" + a + "'");
    nb[i].insert(j);
    nb[j].insert(i);
  }

  std::vector<std::string> islands;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (nb[i].empty()) islands.push_back(ids[i]);
  }
  if (!islands.empty() && !drop_islands) {
    std::string names;
    for (const auto& s : islands) names += (names.empty() ? "" : ", ") + s;
    throw GraphError("island region(s) without neighbors: " + names, islands);
  }

  RegionGraph g;
  std::vector<int> remap(ids.size(), -1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (nb[i].empty()) continue;
    remap[i] = static_cast<int>(g.region_ids_.size());
    g.index_.emplace(ids[i], g.region_ids_.size());
    g.region_ids_.push_back(ids[i]);
  }
  if (g.region_ids_.empty()) throw GraphError("no regions left after dropping islands", islands);
  g.adjacency_.resize(g.region_ids_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (remap[i] < 0) continue;
    auto& out = g.adjacency_[remap[i]];
    for (int j : nb[i]) out.push_back(remap[j]);
    std::sort(out.begin(), out.end());
    g.n_edges_ += out.size();
  }
  g.n_edges_ /= 2;
  label_components(g.adjacency_, g.component_, g.members_);
  g.n_components_ = static_cast<int>(g.members_.size());
  return g;
}

AdjacencyFile read_adjacency_csv(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  csv::expect_header(t, path, {"region_id", "neighbor_id"});
  AdjacencyFile out;
  std::set<std::string> seen;
  auto declare = [&](const std::string& id) {
    if (seen.insert(id).second) out.region_ids.push_back(id);
  };
  for (const auto& row : t.rows) {
    const auto& a = row.fields[0];
    const auto& b = row.fields[1];
    if (a.empty()) {
      throw InputError(path.string() + ":" + std::to_string(row.line) + ": empty region_id");
    }
    declare(a);
    if (b.empty()) continue;
    declare(b);
    out.edges.emplace_back(a, b);
  }
  return out;
}

}  // namespace srp
