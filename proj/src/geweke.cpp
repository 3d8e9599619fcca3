#include "srpanova/geweke.hpp"

#include <algorithm>
#include <cmath>

#include "srpanova/error.hpp"
#include "srpanova/random.hpp"
#include "srpanova/sampler.hpp"
#include "srpanova/simulate.hpp"

namespace srp {

std::size_t GewekeReport::n_pass() const {
  return static_cast<std::size_t>(
      std::count_if(statistics.begin(), statistics.end(), [](const auto& s) { return s.pass; }));
}

double GewekeReport::pass_fraction() const {
  if (statistics.empty()) return 1.0;
  return static_cast<double>(n_pass()) / static_cast<double>(statistics.size());
}

namespace {

// Five prior sds of the widest linear predictor must stay well inside the clamp.
void check_priors(const ModelSpec& spec, const McmcConfig& config) {
  int widest = 0;
  for (int g = 0; g < kGroups; ++g) {
    int n = 0;
    for (std::size_t k = 0; k < spec.incidence.n_effects(); ++k) n += spec.incidence.loads(g, k);
    widest = std::max(widest, n);
  }
  // scaled fields have unit geometric-mean variance; allow 2 at any one site
  const double var = config.intercept_sd * config.intercept_sd +
                     config.sd_upper * config.sd_upper * (1.0 + 2.0 * widest);
  if (!std::isfinite(var) || 5.0 * std::sqrt(var) >= 0.5 * kEtaClamp) {
    throw InputError(
        "joint-distribution test needs tight proper priors (e.g. intercept_sd 0.5, sd_upper 1); "
        "intercept_sd=" + std::to_string(config.intercept_sd) +
        " sd_upper=" + std::to_string(config.sd_upper) + " are too wide");
  }
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double variance() const {
    const double m = mean();
    return std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  }
};

}  // namespace

GewekeReport geweke_joint_test(const ModelSpec& spec, const RegionGraph& graph,
                               const std::vector<double>& expected, const McmcConfig& config,
                               const GewekeOptions& options) {
  GewekeReport report;
  if (options.n_outer == 0) return report;
  config.validate(false);
  check_priors(spec, config);
  const auto areas = static_cast<std::size_t>(graph.size());
  if (expected.size() != areas * kGroups) throw InputError("expected counts must have I x 4 entries");
  if (options.batches < 2 || options.n_outer < 2 * options.batches) {
    throw InputError("joint-distribution test needs at least 2 batches of 2 steps");
  }

  const IcarModel icar = scale_icar(icar_precision(graph));
  const IcarFieldSampler field_sampler(icar);
  const std::size_t effects = spec.incidence.n_effects();

  std::vector<std::size_t> sites{0};
  {
    std::size_t best = 0;
    for (std::size_t i = 1; i < areas; ++i) {
      if (graph.degree(static_cast<int>(i)) > graph.degree(static_cast<int>(best))) best = i;
    }
    if (best != 0) sites.push_back(best);
  }

  std::vector<std::string> names;
  auto add_name = [&](const std::string& n) {
    names.push_back("E[" + n + "]");
    names.push_back("E[" + n + "^2]");
  };
  for (int g = 0; g < kGroups; ++g) add_name("alpha_g" + std::to_string(g + 1));
  for (int g = 0; g < kGroups; ++g) add_name("sigma_omega_g" + std::to_string(g + 1));
  for (const auto& l : spec.incidence.labels) add_name("sigma_" + l);
  for (const auto& l : spec.incidence.labels) {
    for (auto i : sites) add_name(l + "[" + graph.region_ids()[i] + "]");
  }

  auto statistics = [&](const LatentState& s) {
    std::vector<double> v;
    auto push = [&](double x) {
      v.push_back(x);
      v.push_back(x * x);
    };
    for (double a : s.alpha) push(a);
    for (double sd : s.sigma_omega) push(sd);
    for (double sd : s.sigma_phi) push(sd);
    for (std::size_t k = 0; k < effects; ++k) {
      for (auto i : sites) push(s.phi[k][i]);
    }
    return v;
  };

  auto draw_prior = [&](Rng& rng) {
    LatentState s = LatentState::zeros(areas, effects);
    for (auto& a : s.alpha) a = rng.normal(0.0, config.intercept_sd);
    for (int g = 0; g < kGroups; ++g) {
      s.sigma_omega[g] = rng.uniform(0.0, config.sd_upper);
      for (std::size_t i = 0; i < areas; ++i) s.omega[i * kGroups + g] = rng.normal(0.0, s.sigma_omega[g]);
    }
    for (std::size_t k = 0; k < effects; ++k) {
      s.sigma_phi[k] = rng.uniform(0.0, config.sd_upper);
      s.phi[k] = field_sampler.draw(s.sigma_phi[k], rng);
    }
    return s;
  };

  auto draw_counts = [&](const std::vector<double>& eta, Rng& rng) {
    std::vector<std::int64_t> y(eta.size());
    for (std::size_t c = 0; c < eta.size(); ++c) y[c] = rng.poisson(expected[c] * std::exp(eta[c]));
    return y;
  };

  // marginal-conditional simulator: the statistics only involve parameters
  Rng mc_rng(derive_seed(options.seed, spec.label, 0));
  std::vector<Moments> mc(names.size());
  for (std::size_t t = 0; t < options.n_outer; ++t) {
    const auto v = statistics(draw_prior(mc_rng));
    for (std::size_t j = 0; j < v.size(); ++j) mc[j].add(v[j]);
  }

  // successive-conditional simulator
  Rng data_rng(derive_seed(options.seed, spec.label, 1));
  const LatentState start = draw_prior(data_rng);
  Dataset data;
  data.region_ids = graph.region_ids();
  data.e = expected;
  data.y = draw_counts(linear_predictor(start, spec.incidence), data_rng);
  GibbsSampler sampler(spec, data, icar, config, derive_seed(options.seed, spec.label, 2));
  sampler.set_state(start);

  const std::size_t batch_len = options.n_outer / options.batches;
  const std::size_t recorded = batch_len * options.batches;
  std::vector<std::vector<double>> batch_sums(names.size(), std::vector<double>(options.batches, 0.0));
  std::vector<double> sc_sum(names.size(), 0.0);

  sampler.set_adapting(true);
  for (std::size_t t = 0; t < options.burn_in + recorded; ++t) {
    if (t == options.burn_in) sampler.set_adapting(false);
    for (int s = 0; s < options.sweeps_per_step; ++s) sampler.sweep();
    sampler.set_counts(draw_counts(sampler.eta(), data_rng));
    if (t < options.burn_in) continue;
    const auto v = statistics(sampler.state());
    const std::size_t b = (t - options.burn_in) / batch_len;
    for (std::size_t j = 0; j < v.size(); ++j) {
      batch_sums[j][b] += v[j];
      sc_sum[j] += v[j];
    }
  }

  const auto nb = static_cast<double>(options.batches);
  for (std::size_t j = 0; j < names.size(); ++j) {
    GewekeStatistic st;
    st.name = names[j];
    st.marginal_mean = mc[j].mean();
    st.successive_mean = sc_sum[j] / static_cast<double>(recorded);
    double ss = 0.0;
    for (double s : batch_sums[j]) {
      const double m = s / static_cast<double>(batch_len);
      ss += (m - st.successive_mean) * (m - st.successive_mean);
    }
    const double se2_sc = ss / (nb - 1.0) / nb;
    const double se2_mc = mc[j].variance() / static_cast<double>(mc[j].n);
    const double se = std::sqrt(se2_sc + se2_mc);
    const double diff = st.marginal_mean - st.successive_mean;
    st.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    st.pass = std::abs(st.z) < options.z_threshold;
    report.statistics.push_back(st);
  }
  return report;
}

}  // namespace srp
