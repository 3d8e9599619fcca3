#include "srpanova/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "srpanova/error.hpp"

namespace srp {

namespace {

using Chains = std::vector<std::vector<double>>;

void check_shape(const Chains& chains) {
  if (chains.size() < 2) throw InputError("diagnostics need at least 2 chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw InputError("diagnostics need chains of equal length");
  }
  if (n < 50) throw InputError("diagnostics need at least 50 kept draws per chain");
}

Chains split(const Chains& chains) {
  Chains out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    // odd lengths drop the middle draw
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double rhat_of(const Chains& c) {
  const double n = static_cast<double>(c.front().size());
  const double m = static_cast<double>(c.size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& x : c) {
    means.push_back(mean_of(x));
    w += variance_of(x, means.back());
  }
  w /= m;
  const double grand = mean_of(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  if (w == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

// Normal scores of the pooled ranks, ties averaged.
Chains rank_normalize(const Chains& c) {
  const std::size_t n = c.front().size();
  const std::size_t total = n * c.size();
  std::vector<std::pair<double, std::size_t>> all;
  all.reserve(total);
  for (std::size_t j = 0; j < c.size(); ++j) {
    for (std::size_t t = 0; t < n; ++t) all.emplace_back(c[j][t], j * n + t);
  }
  std::sort(all.begin(), all.end());
  std::vector<double> rank(total);
  for (std::size_t a = 0; a < total;) {
    std::size_t b = a;
    while (b < total && all[b].first == all[a].first) ++b;
    const double r = 0.5 * static_cast<double>(a + 1 + b);
    for (std::size_t k = a; k < b; ++k) rank[all[k].second] = r;
    a = b;
  }
  const boost::math::normal_distribution<double> normal;
  Chains out(c.size(), std::vector<double>(n));
  for (std::size_t j = 0; j < c.size(); ++j) {
    for (std::size_t t = 0; t < n; ++t) {
      const double p = (rank[j * n + t] - 0.375) / (static_cast<double>(total) + 0.25);
      out[j][t] = boost::math::quantile(normal, p);
    }
  }
  return out;
}

double ess_of(const Chains& c) {
  const std::size_t n = c.front().size();
  const double m = static_cast<double>(c.size());
  std::vector<double> means, vars;
  for (const auto& x : c) {
    means.push_back(mean_of(x));
    vars.push_back(variance_of(x, means.back()));
  }
  const double w = mean_of(vars);
  const double grand = mean_of(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / (m - 1.0);
  const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w +
                          b / static_cast<double>(n);
  if (var_plus == 0.0) return m * static_cast<double>(n);

  // autocovariance at lag t averaged over chains (biased estimator)
  auto acov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t + lag < n; ++t) s += (c[j][t] - means[j]) * (c[j][t + lag] - means[j]);
      total += s / static_cast<double>(n);
    }
    return total / m;
  };
  auto rho = [&](std::size_t lag) { return 1.0 - (w - acov(lag)) / var_plus; };

  // Geyer: sum positive pairs, enforcing monotone decrease
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  const double rho1 = rho(1);
  double pair = 1.0 + rho1;
  std::size_t t = 1;
  while (t + 2 < n) {
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    sum += pair;
    prev_pair = pair;
    const double r_even = rho(t + 1);
    const double r_odd = rho(t + 2);
    pair = r_even + r_odd;
    t += 2;
  }
  const double tau = -1.0 + 2.0 * sum;
  const double total = m * static_cast<double>(n);
  return total / std::max(tau, 1.0 / std::log10(total));
}

bool all_equal(const Chains& c) {
  const double v = c.front().front();
  for (const auto& x : c) {
    for (double y : x) {
      if (y != v) return false;
    }
  }
  return true;
}

}  // namespace

double split_rhat(const Chains& chains) {
  check_shape(chains);
  return rhat_of(split(chains));
}

double effective_sample_size(const Chains& chains) {
  check_shape(chains);
  return ess_of(chains);
}

ScalarDiagnostic diagnose(const std::string& name, const Chains& chains) {
  check_shape(chains);
  ScalarDiagnostic d;
  d.name = name;
  if (all_equal(chains)) {
    d.zero_variance = true;
    d.rhat = 1.0;
    d.ess = static_cast<double>(chains.size() * chains.front().size());
    return d;
  }
  const Chains halves = split(chains);
  const double bulk = rhat_of(rank_normalize(halves));
  double median = 0.0;
  {
    std::vector<double> pooled;
    for (const auto& c : halves) pooled.insert(pooled.end(), c.begin(), c.end());
    std::nth_element(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(pooled.size() / 2),
                     pooled.end());
    median = pooled[pooled.size() / 2];
  }
  Chains folded = halves;
  for (auto& c : folded) {
    for (auto& x : c) x = std::abs(x - median);
  }
  const double tail = rhat_of(rank_normalize(folded));
  d.rhat = std::max(bulk, tail);
  d.ess = ess_of(rank_normalize(halves));
  return d;
}

}  // namespace srp
