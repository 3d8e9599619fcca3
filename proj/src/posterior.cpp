#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "srpanova/error.hpp"
#include "srpanova/mcmc.hpp"

namespace srp {

void McmcConfig::validate(bool for_scoring) const {
  if (n_chains < 2) throw InputError("mcmc: at least 2 chains are required");
  if (warmup < 0 || keep < 1 || thin < 1) {
    throw InputError("mcmc: warmup >= 0, keep >= 1 and thin >= 1 are required");
  }
  if (!(adapt_target > 0.0 && adapt_target < 1.0)) {
    throw InputError("mcmc: adapt_target must lie in (0, 1)");
  }
  if (!(sd_upper > 0.0) || !std::isfinite(sd_upper)) {
    throw InputError("mcmc: sd_upper must be positive and finite");
  }
  if (!(intercept_sd > 0.0) || !std::isfinite(intercept_sd)) {
    throw InputError("mcmc: intercept_sd must be positive and finite");
  }
  if (for_scoring && static_cast<long long>(keep) * n_chains < 400) {
    throw InputError("mcmc: keep * chains must be at least 400 for DIC/WAIC");
  }
}

LatentState LatentState::zeros(std::size_t areas, std::size_t effects) {
  LatentState s;
  s.omega.assign(areas * kGroups, 0.0);
  s.phi.assign(effects, std::vector<double>(areas, 0.0));
  s.sigma_phi.assign(effects, 0.0);
  return s;
}

std::vector<double> linear_predictor(const LatentState& state, const EffectIncidence& incidence) {
  const std::size_t cells = state.omega.size();
  std::vector<double> eta(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t i = c / kGroups;
    const int g = static_cast<int>(c % kGroups);
    double v = state.alpha[g] + state.omega[c];
    for (std::size_t k = 0; k < incidence.n_effects(); ++k) {
      if (incidence.loads(g, k)) v += state.phi[k][i];
    }
    eta[c] = v;
  }
  return eta;
}

double poisson_loglik(const std::vector<double>& eta, const Dataset& data,
                      std::size_t* clamp_events) {
  if (eta.size() != data.n_cells()) throw InputError("linear predictor size mismatch");
  double ll = 0.0;
  for (std::size_t c = 0; c < eta.size(); ++c) {
    double v = eta[c];
    if (std::abs(v) > kEtaClamp) {
      v = std::clamp(v, -kEtaClamp, kEtaClamp);
      if (clamp_events) ++*clamp_events;
    }
    const double y = static_cast<double>(data.y[c]);
    ll += y * (std::log(data.e[c]) + v) - data.e[c] * std::exp(v) - std::lgamma(y + 1.0);
  }
  return ll;
}

namespace {

double log_normal(double x, double sd) {
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * (x * x) / (sd * sd);
}

}  // namespace

double log_unnormalized_posterior(const LatentState& state, const ModelSpec& spec,
                                  const Dataset& data, const IcarModel& icar,
                                  const McmcConfig& config, std::size_t* clamp_events) {
  const auto& inc = spec.incidence;
  const std::size_t areas = data.n_areas();
  if (state.omega.size() != areas * kGroups || state.phi.size() != inc.n_effects() ||
      state.sigma_phi.size() != inc.n_effects() || icar.size() != static_cast<int>(areas)) {
    throw InputError("state dimensions do not match the model");
  }
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double lp = 0.0;
  auto sd_prior = [&](double sd) {
    return (sd > 0.0 && sd < config.sd_upper) ? -std::log(config.sd_upper) : neg_inf;
  };

  lp += poisson_loglik(linear_predictor(state, inc), data, clamp_events);
  for (int g = 0; g < kGroups; ++g) {
    lp += log_normal(state.alpha[g], config.intercept_sd);
    lp += sd_prior(state.sigma_omega[g]);
    if (lp == neg_inf) return lp;
    for (std::size_t i = 0; i < areas; ++i) {
      lp += log_normal(state.omega[i * kGroups + g], state.sigma_omega[g]);
    }
  }
  for (std::size_t k = 0; k < inc.n_effects(); ++k) {
    const double sd = state.sigma_phi[k];
    lp += sd_prior(sd);
    if (lp == neg_inf) return lp;
    Eigen::Map<const Eigen::VectorXd> phi(state.phi[k].data(), static_cast<Eigen::Index>(areas));
    const double quad = phi.dot(icar.q * phi);
    lp += -0.5 * icar.rank * std::log(sd * sd) - quad / (2.0 * sd * sd);
  }
  return lp;
}

void recenter_and_absorb(LatentState& state, const EffectIncidence& incidence,
                         const IcarModel& icar) {
  const bool connected = icar.n_components() == 1;
  const double n_total = static_cast<double>(icar.size());
  for (std::size_t k = 0; k < incidence.n_effects(); ++k) {
    auto& phi = state.phi[k];
    double absorbed = 0.0;
    for (const auto& members : icar.members) {
      double mean = 0.0;
      for (int i : members) mean += phi[i];
      mean /= static_cast<double>(members.size());
      for (int i : members) phi[i] -= mean;
      absorbed += connected ? mean : mean * static_cast<double>(members.size()) / n_total;
    }
    for (int g = 0; g < kGroups; ++g) {
      if (incidence.loads(g, k)) state.alpha[g] += absorbed;
    }
  }
}

}  // namespace srp
