#include "srpanova/fit.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

#include "srpanova/csv.hpp"
#include "srpanova/error.hpp"
#include "srpanova/random.hpp"
#include "srpanova/sampler.hpp"

namespace srp {

ChainDraws run_chain(const ModelSpec& spec, const Dataset& data, const IcarModel& icar,
                     const McmcConfig& config, int chain_index) {
  ChainDraws out;
  out.seed = derive_seed(config.master_seed, spec.label, static_cast<std::uint64_t>(chain_index));
  GibbsSampler sampler(spec, data, icar, config, out.seed);
  sampler.initialize();

  sampler.set_adapting(true);
  for (int s = 0; s < config.warmup; ++s) sampler.sweep();
  sampler.set_adapting(false);

  const std::size_t areas = data.n_areas();
  const std::size_t effects = spec.incidence.n_effects();
  const auto keep = static_cast<std::size_t>(config.keep);
  out.scalars = DrawMatrix(keep, sampler.scalar_names().size());
  out.eta = DrawMatrix(keep, data.n_cells());
  out.fields = DrawMatrix(keep, effects * areas);
  for (std::size_t d = 0; d < keep; ++d) {
    for (int t = 0; t < config.thin; ++t) sampler.sweep();
    const auto sc = sampler.scalars();
    std::copy(sc.begin(), sc.end(), out.scalars.values.begin() + static_cast<std::ptrdiff_t>(d * out.scalars.cols));
    const auto& eta = sampler.eta();
    std::copy(eta.begin(), eta.end(), out.eta.values.begin() + static_cast<std::ptrdiff_t>(d * out.eta.cols));
    for (std::size_t k = 0; k < effects; ++k) {
      const auto f = sampler.field(k);
      std::copy(f.begin(), f.end(),
                out.fields.values.begin() + static_cast<std::ptrdiff_t>(d * out.fields.cols + k * areas));
    }
  }
  out.clamp_events = sampler.clamp_events();
  out.max_recentre_drift = sampler.max_recentre_drift();
  return out;
}

namespace {

DrawMatrix stack(const std::vector<ChainDraws>& chains, DrawMatrix ChainDraws::*member) {
  DrawMatrix out;
  out.cols = (chains.front().*member).cols;
  for (const auto& c : chains) {
    const auto& m = c.*member;
    out.values.insert(out.values.end(), m.values.begin(), m.values.end());
    out.rows += m.rows;
  }
  return out;
}

}  // namespace

FitResult fit(const ModelSpec& spec, const Dataset& data, const IcarModel& icar,
              const McmcConfig& config, const FactorDesign& design) {
  config.validate(true);
  const auto start = std::chrono::steady_clock::now();

  FitResult r;
  r.spec = spec;
  r.orientation = orientation_string(spec.orientation, design);
  r.chains.resize(static_cast<std::size_t>(config.n_chains));
  {
    GibbsSampler probe(spec, data, icar, config, 0);
    r.scalar_names = probe.scalar_names();
  }

  // each chain owns its slot, so the pooled order is fixed by chain index
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::clamp(config.workers > 0 ? config.workers : static_cast<int>(hw), 1,
                                 config.n_chains);
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(r.chains.size());
  auto work = [&] {
    for (int c = next++; c < config.n_chains; c = next++) {
      try {
        r.chains[static_cast<std::size_t>(c)] = run_chain(spec, data, icar, config, c);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  r.eta = stack(r.chains, &ChainDraws::eta);
  r.fields = stack(r.chains, &ChainDraws::fields);
  for (auto& c : r.chains) {
    r.clamp_events += c.clamp_events;
    c.eta = DrawMatrix();
    c.fields = DrawMatrix();
  }

  for (std::size_t j = 0; j < r.scalar_names.size(); ++j) {
    std::vector<std::vector<double>> per_chain;
    for (const auto& c : r.chains) {
      std::vector<double> v(c.scalars.rows);
      for (std::size_t s = 0; s < c.scalars.rows; ++s) v[s] = c.scalars.at(s, j);
      per_chain.push_back(std::move(v));
    }
    r.diagnostics.push_back(diagnose(r.scalar_names[j], per_chain));
    r.max_rhat = std::max(r.max_rhat, r.diagnostics.back().rhat);
  }
  r.converged = r.max_rhat <= 1.05;

  r.dic = dic(r.eta, data);
  r.waic = waic(pointwise_loglik(r.eta, data));
  if (r.waic.unreliable_cells > 0) {
    r.warnings.push_back("WAIC: " + std::to_string(r.waic.unreliable_cells) +
                         " cells with pointwise variance above 0.4");
  }
  if (r.clamp_events > 0) {
    r.warnings.push_back("linear predictor clamped to +-30 in " + std::to_string(r.clamp_events) +
                         " likelihood evaluations");
  }
  if (!r.converged) {
    r.warnings.push_back("not converged: max R-hat " + csv::format_fixed(r.max_rhat, 3));
  }
  r.cpu_seconds = std::max(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1e-9);
  return r;
}

FitScore FitResult::score() const {
  FitScore s;
  s.family = spec.family;
  s.label = spec.label;
  s.dic = dic;
  s.waic = waic;
  s.cpu_seconds = cpu_seconds;
  s.converged = converged;
  return s;
}

void FitResult::release_draws() {
  eta = DrawMatrix();
  fields = DrawMatrix();
}

PosteriorSummary summarize(const FitResult& result, const Dataset& data, const FactorDesign& design) {
  std::vector<std::string> groups;
  for (int g = 0; g < kGroups; ++g) groups.push_back(design.group_name(g));
  return summarize(result.eta, result.fields, result.spec.incidence.labels, data.region_ids, groups);
}

void write_draws_csv(const std::filesystem::path& path, const FitResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << "chain,iter,scalar,value\n";
  for (std::size_t c = 0; c < result.chains.size(); ++c) {
    const auto& m = result.chains[c].scalars;
    for (std::size_t s = 0; s < m.rows; ++s) {
      for (std::size_t j = 0; j < m.cols; ++j) {
        out << c + 1 << ',' << s + 1 << ',' << result.scalar_names[j] << ','
            << csv::format_double(m.at(s, j)) << '\n';
      }
    }
  }
}

nlohmann::json fit_summary_json(const FitResult& r) {
  using nlohmann::json;
  json j;
  j["label"] = r.spec.label;
  j["family"] = to_string(r.spec.family);
  j["orientation"] = r.orientation;
  j["effects"] = r.spec.incidence.labels;
  j["dic"] = {{"dic", r.dic.dic}, {"pd", r.dic.pd}, {"mean_deviance", r.dic.mean_deviance},
              {"plugin_deviance", r.dic.plugin_deviance}};
  j["waic"] = {{"waic", r.waic.waic}, {"p_waic", r.waic.p_waic}, {"lppd", r.waic.lppd},
               {"unreliable_cells", r.waic.unreliable_cells}};

  json params = json::array();
  std::vector<double> buf;
  for (std::size_t k = 0; k < r.scalar_names.size(); ++k) {
    buf.clear();
    for (const auto& c : r.chains) {
      for (std::size_t s = 0; s < c.scalars.rows; ++s) buf.push_back(c.scalars.at(s, k));
    }
    double mean = 0.0;
    for (double v : buf) mean += v;
    mean /= static_cast<double>(buf.size());
    std::sort(buf.begin(), buf.end());
    const auto& d = r.diagnostics[k];
    params.push_back({{"name", r.scalar_names[k]},
                      {"mean", mean},
                      {"q025", quantile_sorted(buf, 0.025)},
                      {"q975", quantile_sorted(buf, 0.975)},
                      {"rhat", d.rhat},
                      {"ess", d.ess},
                      {"zero_variance", d.zero_variance}});
  }
  j["parameters"] = params;
  j["max_rhat"] = r.max_rhat;
  j["converged"] = r.converged;
  j["cpu_seconds"] = r.cpu_seconds;
  j["clamp_events"] = r.clamp_events;
  json seeds = json::array();
  for (const auto& c : r.chains) seeds.push_back(c.seed);
  j["chain_seeds"] = seeds;
  j["draws_per_chain"] = r.chains.empty() ? 0 : r.chains.front().scalars.rows;
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace srp
