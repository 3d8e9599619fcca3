#include "srpanova/simulate.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "srpanova/error.hpp"

namespace srp {

IcarFieldSampler::IcarFieldSampler(const IcarModel& model)
    : spectra_(spectrum(model)), size_(model.size()) {}

std::vector<double> IcarFieldSampler::draw(double sd, Rng& rng) const {
  if (!(sd >= 0.0)) throw InputError("field sd must be non-negative");
  std::vector<double> x(size_, 0.0);
  if (sd == 0.0) return x;
  for (const auto& s : spectra_) {
    Eigen::VectorXd z(s.values.size());
    for (Eigen::Index m = 0; m < z.size(); ++m) z(m) = rng.normal() * sd / std::sqrt(s.values(m));
    const Eigen::VectorXd v = s.vectors * z;
    const double mean = v.mean();
    for (std::size_t r = 0; r < s.members.size(); ++r) x[s.members[r]] = v(r) - mean;
  }
  return x;
}

std::vector<double> sample_icar_field(const IcarModel& model, double sd, std::uint64_t seed) {
  if (!(sd >= 0.0)) throw InputError("field sd must be non-negative");
  Rng rng(seed);
  if (sd == 0.0) return std::vector<double>(model.size(), 0.0);
  return IcarFieldSampler(model).draw(sd, rng);
}

SimResult simulate_dataset(const SimTruth& truth, const ModelSpec& spec, const RegionGraph& graph,
                           const std::vector<double>& expected) {
  return simulate_dataset(truth, spec, graph, expected,
                          IcarFieldSampler(scale_icar(icar_precision(graph))));
}

SimResult simulate_dataset(const SimTruth& truth, const ModelSpec& spec, const RegionGraph& graph,
                           const std::vector<double>& expected, const IcarFieldSampler& sampler) {
  const std::size_t areas = graph.size();
  if (expected.size() != areas * kGroups) {
    throw InputError("expected counts must be I x 4 = " + std::to_string(areas * kGroups) +
                     " values, got " + std::to_string(expected.size()));
  }
  if (sampler.size() != static_cast<int>(areas)) {
    throw InputError("field sampler dimension does not match the graph");
  }
  const auto& inc = spec.incidence;
  for (const auto& [label, sd] : truth.sigma_structured) {
    bool known = false;
    for (const auto& l : inc.labels) known = known || l == label;
    if (!known) throw InputError("truth sets an sd for '" + label + "', not an effect of " + spec.label);
  }
  for (double sd : truth.sigma_unstructured) {
    if (!(sd >= 0.0)) throw InputError("unstructured sd must be non-negative");
  }

  Rng rng(truth.seed);
  SimResult out;
  std::vector<double> eta(areas * kGroups);
  for (std::size_t i = 0; i < areas; ++i) {
    for (int g = 0; g < kGroups; ++g) eta[i * kGroups + g] = truth.alpha[g];
  }
  for (std::size_t k = 0; k < inc.n_effects(); ++k) {
    const auto it = truth.sigma_structured.find(inc.labels[k]);
    if (it == truth.sigma_structured.end()) {
      throw InputError("truth lacks an sd for effect '" + inc.labels[k] + "' of " + spec.label);
    }
    auto field = sampler.draw(it->second, rng);
    for (std::size_t i = 0; i < areas; ++i) {
      for (int g = 0; g < kGroups; ++g) {
        if (inc.loads(g, k)) eta[i * kGroups + g] += field[i];
      }
    }
    out.true_fields.emplace(inc.labels[k], std::move(field));
  }
  for (int g = 0; g < kGroups; ++g) {
    const double sd = truth.sigma_unstructured[g];
    for (std::size_t i = 0; i < areas; ++i) {
      if (sd > 0.0) eta[i * kGroups + g] += rng.normal(0.0, sd);
    }
  }

  auto& d = out.dataset;
  d.region_ids = graph.region_ids();
  d.e = expected;
  d.y.resize(areas * kGroups);
  out.true_theta.resize(areas * kGroups);
  for (std::size_t c = 0; c < eta.size(); ++c) {
    out.true_theta[c] = std::exp(eta[c]);
    d.y[c] = rng.poisson(expected[c] * out.true_theta[c]);
  }
  d.check();
  return out;
}

namespace {

template <typename T>
T required(const nlohmann::json& j, const char* field, const std::filesystem::path& path) {
  if (!j.contains(field)) {
    throw InputError(path.string() + ": missing truth field '" + std::string(field) + "'");
  }
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(path.string() + ": truth field '" + std::string(field) + "' has the wrong type");
  }
}

}  // namespace

TruthDocument read_truth_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
  TruthDocument doc;
  doc.family = required<std::string>(j, "family", path);
  doc.orientation = j.value("orientation", std::string());
  doc.truth.alpha = required<std::array<double, kGroups>>(j, "alpha", path);
  doc.truth.sigma_structured = required<std::map<std::string, double>>(j, "sigma_structured", path);
  doc.truth.sigma_unstructured =
      required<std::array<double, kGroups>>(j, "sigma_unstructured", path);
  doc.truth.seed = required<std::uint64_t>(j, "seed", path);
  doc.expected_count = required<double>(j, "expected_count", path);
  if (!(doc.expected_count > 0.0)) {
    throw InputError(path.string() + ": expected_count must be positive");
  }
  return doc;
}

void write_truth_json(const std::filesystem::path& path, const TruthDocument& doc,
                      const std::string& label) {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["family"] = doc.family;
  j["orientation"] = doc.orientation;
  j["alpha"] = doc.truth.alpha;
  j["sigma_structured"] = doc.truth.sigma_structured;
  j["sigma_unstructured"] = doc.truth.sigma_unstructured;
  j["seed"] = doc.truth.seed;
  j["expected_count"] = doc.expected_count;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace srp
