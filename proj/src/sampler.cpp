#include "srpanova/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "srpanova/error.hpp"

namespace srp {

namespace {

constexpr int kAdaptBatch = 50;
constexpr double kInitialSd = 0.1;

struct CellApprox {
  double mean;
  double var;
};

// Gaussian approximation at the mode of y w - mu e^w - w^2 / (2 s2).
CellApprox laplace_cell(double y, double mu, double s2) {
  const double a = y + 0.5;
  double w = std::clamp(std::log(a / mu) * (s2 * a) / (1.0 + s2 * a), -kEtaClamp, kEtaClamp);
  for (int it = 0; it < 3; ++it) {
    const double m = mu * std::exp(w);
    w += std::clamp((y - m - w / s2) / (m + 1.0 / s2), -1.0, 1.0);
  }
  return {w, 1.0 / (mu * std::exp(w) + 1.0 / s2)};
}

double log_normal_pdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * 3.14159265358979323846 * var) - (x - mean) * (x - mean) / (2.0 * var);
}

}  // namespace

GibbsSampler::GibbsSampler(const ModelSpec& spec, const Dataset& data, const IcarModel& icar,
                           const McmcConfig& config, std::uint64_t seed)
    : spec_(spec), config_(config), rng_(seed) {
  data.check();
  areas_ = data.n_areas();
  effects_ = spec.incidence.n_effects();
  if (icar.size() != static_cast<int>(areas_)) {
    throw InputError("ICAR model has " + std::to_string(icar.size()) + " regions, data has " +
                     std::to_string(areas_));
  }
  e_ = data.e;
  set_counts(data.y);

  q_diag_.assign(areas_, 0.0);
  row_start_.assign(areas_ + 1, 0);
  // q is symmetric, so columns of the column-major matrix serve as rows
  for (int j = 0; j < icar.q.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(icar.q, j); it; ++it) {
      if (it.row() == j) {
        q_diag_[j] = it.value();
      } else {
        col_.push_back(static_cast<int>(it.row()));
        val_.push_back(it.value());
      }
    }
    row_start_[j + 1] = col_.size();
  }
  component_ = icar.component;
  members_ = icar.members;
  rank_ = icar.rank;
  loaded_.resize(effects_);
  for (std::size_t k = 0; k < effects_; ++k) {
    for (int g = 0; g < kGroups; ++g) {
      if (spec.incidence.loads(g, k)) loaded_[k].push_back(g);
    }
  }

  omega_.assign(areas_ * kGroups, 0.0);
  raw_.assign(effects_, std::vector<double>(areas_, 0.0));
  offset_.assign(effects_, std::vector<double>(members_.size(), 0.0));
  sigma_phi_.assign(effects_, kInitialSd);
  sigma_omega_.fill(kInitialSd);
  eta_.assign(areas_ * kGroups, 0.0);

  alpha_step_.fill(0.05);
  omega_block_step_.fill(0.02);
  omega_block_acc_.fill(0);
  block_scratch_.assign(areas_, 0.0);
  alpha_acc_.fill(0);
  omega_scale_.assign(areas_ * kGroups, 1.0);
  omega_acc_.assign(areas_ * kGroups, 0);
  field_scale_.assign(effects_, std::vector<double>(areas_, 1.0));
  field_acc_.assign(effects_, std::vector<int>(areas_, 0));
}

void GibbsSampler::set_counts(std::span<const std::int64_t> y) {
  if (y.size() != areas_ * kGroups) throw InputError("count vector size mismatch");
  y_.resize(y.size());
  log_factorial_.resize(y.size());
  for (std::size_t c = 0; c < y.size(); ++c) {
    y_[c] = static_cast<double>(y[c]);
    log_factorial_[c] = std::lgamma(y_[c] + 1.0);
  }
}

void GibbsSampler::initialize() {
  const double sd0 = std::min(kInitialSd, 0.5 * config_.sd_upper);
  for (int g = 0; g < kGroups; ++g) {
    double ys = 0.0, es = 0.0;
    for (std::size_t i = 0; i < areas_; ++i) {
      ys += y_[i * kGroups + g];
      es += e_[i * kGroups + g];
    }
    alpha_[g] = std::log(std::max(ys, 0.5) / es);
    sigma_omega_[g] = sd0;
  }
  std::fill(omega_.begin(), omega_.end(), 0.0);
  for (auto& r : raw_) std::fill(r.begin(), r.end(), 0.0);
  for (auto& o : offset_) std::fill(o.begin(), o.end(), 0.0);
  std::fill(sigma_phi_.begin(), sigma_phi_.end(), sd0);
  refresh_eta();

  // fall back to prior draws if the data-driven start is not finite
  for (int attempt = 0; !std::isfinite(log_posterior()); ++attempt) {
    if (attempt == 10) throw NumericalError("non-finite posterior at initialization");
    for (auto& a : alpha_) a = rng_.normal(0.0, std::min(config_.intercept_sd, 1.0));
    for (auto& s : sigma_omega_) s = rng_.uniform(0.0, std::min(config_.sd_upper, 1.0));
    for (auto& s : sigma_phi_) s = rng_.uniform(0.0, std::min(config_.sd_upper, 1.0));
    refresh_eta();
  }
}

void GibbsSampler::set_state(const LatentState& s) {
  if (s.omega.size() != omega_.size() || s.phi.size() != effects_ ||
      s.sigma_phi.size() != effects_) {
    throw InputError("state dimensions do not match the sampler");
  }
  alpha_ = s.alpha;
  omega_ = s.omega;
  raw_ = s.phi;
  for (auto& o : offset_) std::fill(o.begin(), o.end(), 0.0);
  sigma_omega_ = s.sigma_omega;
  sigma_phi_ = s.sigma_phi;
  refresh_eta();
}

LatentState GibbsSampler::state() const {
  LatentState s;
  s.alpha = alpha_;
  s.omega = omega_;
  s.phi.resize(effects_);
  for (std::size_t k = 0; k < effects_; ++k) s.phi[k] = field(k);
  s.sigma_omega = sigma_omega_;
  s.sigma_phi = sigma_phi_;
  return s;
}

std::vector<double> GibbsSampler::field(std::size_t k) const {
  std::vector<double> f(areas_);
  for (std::size_t i = 0; i < areas_; ++i) f[i] = raw_[k][i] - offset_[k][component_[i]];
  return f;
}

void GibbsSampler::refresh_eta() {
  for (std::size_t i = 0; i < areas_; ++i) {
    for (int g = 0; g < kGroups; ++g) {
      double v = alpha_[g] + omega_[i * kGroups + g];
      for (std::size_t k = 0; k < effects_; ++k) {
        if (spec_.incidence.loads(g, k)) v += raw_[k][i] - offset_[k][component_[i]];
      }
      eta_[i * kGroups + g] = v;
    }
  }
}

double GibbsSampler::cell_ll(std::size_t c, double eta) const {
  if (std::abs(eta) > kEtaClamp) {
    eta = std::clamp(eta, -kEtaClamp, kEtaClamp);
    ++clamp_events_;
  }
  return y_[c] * eta - e_[c] * std::exp(eta);
}

double GibbsSampler::deviance() const {
  double ll = 0.0;
  for (std::size_t c = 0; c < eta_.size(); ++c) {
    const double v = std::clamp(eta_[c], -kEtaClamp, kEtaClamp);
    ll += y_[c] * (std::log(e_[c]) + v) - e_[c] * std::exp(v) - log_factorial_[c];
  }
  return -2.0 * ll;
}

double GibbsSampler::log_posterior() const {
  const double inf = std::numeric_limits<double>::infinity();
  double lp = -0.5 * deviance();
  const double isd2 = config_.intercept_sd * config_.intercept_sd;
  for (int g = 0; g < kGroups; ++g) {
    lp -= alpha_[g] * alpha_[g] / (2.0 * isd2);
    const double s = sigma_omega_[g];
    if (!(s > 0.0 && s < config_.sd_upper)) return -inf;
    double ss = 0.0;
    for (std::size_t i = 0; i < areas_; ++i) ss += omega_[i * kGroups + g] * omega_[i * kGroups + g];
    lp += -static_cast<double>(areas_) * std::log(s) - ss / (2.0 * s * s);
  }
  for (std::size_t k = 0; k < effects_; ++k) {
    const double s = sigma_phi_[k];
    if (!(s > 0.0 && s < config_.sd_upper)) return -inf;
    const auto f = field(k);
    double quad = 0.0;
    for (std::size_t i = 0; i < areas_; ++i) {
      double qf = q_diag_[i] * f[i];
      for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) qf += val_[p] * f[col_[p]];
      quad += f[i] * qf;
    }
    lp += -rank_ * std::log(s) - quad / (2.0 * s * s);
  }
  return lp;
}

void GibbsSampler::update_alpha() {
  const double isd2 = config_.intercept_sd * config_.intercept_sd;
  for (int g = 0; g < kGroups; ++g) {
    const double d = rng_.normal() * alpha_step_[g];
    double delta = -((alpha_[g] + d) * (alpha_[g] + d) - alpha_[g] * alpha_[g]) / (2.0 * isd2);
    for (std::size_t i = 0; i < areas_; ++i) {
      const std::size_t c = i * kGroups + g;
      delta += cell_ll(c, eta_[c] + d) - cell_ll(c, eta_[c]);
    }
    if (std::log(rng_.uniform()) < delta) {
      alpha_[g] += d;
      for (std::size_t i = 0; i < areas_; ++i) eta_[i * kGroups + g] += d;
      ++alpha_acc_[g];
    }
  }
}

void GibbsSampler::update_omega() {
  for (std::size_t c = 0; c < omega_.size(); ++c) {
    const int g = static_cast<int>(c % kGroups);
    const double s = sigma_omega_[g];
    const double d = rng_.normal() * omega_scale_[c] * s;
    const double w = omega_[c];
    const double delta =
        cell_ll(c, eta_[c] + d) - cell_ll(c, eta_[c]) - ((w + d) * (w + d) - w * w) / (2.0 * s * s);
    if (std::log(rng_.uniform()) < delta) {
      omega_[c] += d;
      eta_[c] += d;
      ++omega_acc_[c];
    }
  }
}

void GibbsSampler::update_field(std::size_t k) {
  auto& raw = raw_[k];
  const auto& groups = loaded_[k];
  const double s2 = sigma_phi_[k] * sigma_phi_[k];
  const double isd2 = config_.intercept_sd * config_.intercept_sd;
  const bool connected = members_.size() == 1;

  for (std::size_t i = 0; i < areas_; ++i) {
    double qf = q_diag_[i] * raw[i];
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) qf += val_[p] * raw[col_[p]];
    const double d = rng_.normal() * field_scale_[k][i] * sigma_phi_[k] / std::sqrt(q_diag_[i]);
    const int comp = component_[i];
    const auto& mem = members_[comp];
    const double shift = d / static_cast<double>(mem.size());

    double delta = -(2.0 * d * qf + d * d * q_diag_[i]) / (2.0 * s2);
    if (connected) {
      for (int g : groups) {
        const std::size_t c = i * kGroups + g;
        const double a = alpha_[g];
        delta += cell_ll(c, eta_[c] + d) - cell_ll(c, eta_[c]);
        delta -= ((a + shift) * (a + shift) - a * a) / (2.0 * isd2);
      }
    } else {
      for (int j : mem) {
        const double move = (static_cast<std::size_t>(j) == i ? d : 0.0) - shift;
        for (int g : groups) {
          const std::size_t c = j * kGroups + g;
          delta += cell_ll(c, eta_[c] + move) - cell_ll(c, eta_[c]);
        }
      }
    }
    if (!(std::log(rng_.uniform()) < delta)) continue;

    ++field_acc_[k][i];
    raw[i] += d;
    offset_[k][comp] += shift;
    if (connected) {
      for (int g : groups) {
        alpha_[g] += shift;
        eta_[i * kGroups + g] += d;
      }
    } else {
      for (int j : mem) {
        const double move = (static_cast<std::size_t>(j) == i ? d : 0.0) - shift;
        for (int g : groups) eta_[j * kGroups + g] += move;
      }
    }
  }
}

// Moves along the ridge the likelihood cannot see: phi_i += d with the usual
// absorbed recentring, and omega_ig -= d for every loaded group, so eta is
// unchanged. Only priors move, and d is Gaussian, so this is a Gibbs draw.
void GibbsSampler::update_field_ridge(std::size_t k) {
  const auto& groups = loaded_[k];
  if (members_.size() != 1 || groups.empty()) return;
  auto& raw = raw_[k];
  const double s2 = sigma_phi_[k] * sigma_phi_[k];
  const double n = static_cast<double>(areas_);
  const double isd2n = config_.intercept_sd * config_.intercept_sd * n;
  double prec_fixed = 0.0;
  for (int g : groups) prec_fixed += 1.0 / (isd2n * n) + 1.0 / (sigma_omega_[g] * sigma_omega_[g]);

  for (std::size_t i = 0; i < areas_; ++i) {
    double qf = q_diag_[i] * raw[i];
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) qf += val_[p] * raw[col_[p]];
    const double prec = q_diag_[i] / s2 + prec_fixed;
    double lin = -qf / s2;
    for (int g : groups) {
      lin += omega_[i * kGroups + g] / (sigma_omega_[g] * sigma_omega_[g]) - alpha_[g] / isd2n;
    }
    const double d = lin / prec + rng_.normal() / std::sqrt(prec);
    raw[i] += d;
    offset_[k][0] += d / n;
    for (int g : groups) {
      alpha_[g] += d / n;
      omega_[i * kGroups + g] -= d;
    }
  }
}

void GibbsSampler::recentre(std::size_t k) {
  auto& raw = raw_[k];
  for (std::size_t c = 0; c < members_.size(); ++c) {
    double mean = 0.0;
    for (int i : members_[c]) {
      raw[i] -= offset_[k][c];
      mean += raw[i];
    }
    offset_[k][c] = 0.0;
    mean /= static_cast<double>(members_[c].size());
    for (int i : members_[c]) raw[i] -= mean;
    if (members_.size() == 1) {
      for (int g : loaded_[k]) alpha_[g] += mean;
    }
  }
  const auto before = eta_;
  refresh_eta();
  for (std::size_t c = 0; c < eta_.size(); ++c) {
    max_drift_ = std::max(max_drift_, std::abs(eta_[c] - before[c]));
  }
}

namespace {

// Slice sampler (stepping out, then shrinkage) for a log density on (-inf, upper).
template <class LogF>
double slice_1d(double x0, double upper, LogF logf, Rng& rng) {
  const double level = logf(x0) + std::log(rng.uniform());
  constexpr double width = 1.0;
  constexpr int max_steps = 32;
  double lo = x0 - width * rng.uniform();
  double hi = lo + width;
  int j = static_cast<int>(max_steps * rng.uniform());
  int m = max_steps - 1 - j;
  while (j-- > 0 && logf(lo) > level) lo -= width;
  while (m-- > 0 && hi < upper && logf(hi) > level) hi += width;
  hi = std::min(hi, upper);
  while (true) {
    const double x = lo + (hi - lo) * rng.uniform();
    if (logf(x) > level) return x;
    (x < x0 ? lo : hi) = x;
    if (hi - lo < 1e-12) return x0;
  }
}

}  // namespace

// Conditional of sd given its terms, proportional to sd^-dim exp(-sum_sq / (2 sd^2)),
// sampled on u = log sd.
double GibbsSampler::slice_log_sd(double current, double dim, double sum_sq) {
  const double upper = std::log(config_.sd_upper);
  auto logf = [&](double u) {
    if (u >= upper) return -std::numeric_limits<double>::infinity();
    return (1.0 - dim) * u - 0.5 * sum_sq * std::exp(-2.0 * u);
  };
  return std::exp(slice_1d(std::log(current), upper, logf, rng_));
}

// Joint rescaling (sd, terms) -> (c sd, c terms), i.e. an update of log sd with
// the standardized terms held fixed. In t = log c the density is
// loglik(eta + (c - 1) terms) + t, which is sampled by slicing.
template <class Cells>
double GibbsSampler::slice_rescale(double sd, Cells&& cells) {
  const double upper = std::log(config_.sd_upper / sd);
  auto logf = [&](double t) {
    if (t >= upper) return -std::numeric_limits<double>::infinity();
    const double cm1 = std::expm1(t);
    double ll = t;
    cells([&](std::size_t c, double term) { ll += cell_ll(c, eta_[c] + cm1 * term); });
    return ll;
  };
  return std::exp(slice_1d(0.0, upper, logf, rng_));
}

void GibbsSampler::update_sigma_omega(int g) {
  double ss = 0.0;
  for (std::size_t i = 0; i < areas_; ++i) ss += omega_[i * kGroups + g] * omega_[i * kGroups + g];
  if (ss > 0.0) sigma_omega_[g] = slice_log_sd(sigma_omega_[g], static_cast<double>(areas_), ss);
  update_omega_block(g);
}

// Joint move of (sigma_omega_g, omega_.g): random walk on the sd itself, then
// every omega of the group redrawn from a Laplace approximation of its
// conditional under the proposed sd. The reverse proposal enters the
// acceptance ratio. Unlike the log-scale moves this crosses the region near
// sd = 0 in a few steps.
void GibbsSampler::update_omega_block(int g) {
  const double s = sigma_omega_[g];
  const double s_new = s + rng_.normal() * omega_block_step_[g];
  if (!(s_new > 0.0 && s_new < config_.sd_upper)) return;
  const double v_old = s * s, v_new = s_new * s_new;
  double delta = 0.0;
  for (std::size_t i = 0; i < areas_; ++i) {
    const std::size_t c = i * kGroups + g;
    const double w = omega_[c];
    const double base = eta_[c] - w;
    const double mu = e_[c] * std::exp(std::clamp(base, -kEtaClamp, kEtaClamp));
    const CellApprox fwd = laplace_cell(y_[c], mu, v_new);
    const CellApprox rev = laplace_cell(y_[c], mu, v_old);
    const double w_new = fwd.mean + std::sqrt(fwd.var) * rng_.normal();
    block_scratch_[i] = w_new;
    delta += cell_ll(c, base + w_new) - cell_ll(c, eta_[c]);
    delta += log_normal_pdf(w_new, 0.0, v_new) - log_normal_pdf(w, 0.0, v_old);
    delta += log_normal_pdf(w, rev.mean, rev.var) - log_normal_pdf(w_new, fwd.mean, fwd.var);
  }
  if (!(std::log(rng_.uniform()) < delta)) return;
  ++omega_block_acc_[g];
  sigma_omega_[g] = s_new;
  for (std::size_t i = 0; i < areas_; ++i) {
    const std::size_t c = i * kGroups + g;
    eta_[c] += block_scratch_[i] - omega_[c];
    omega_[c] = block_scratch_[i];
  }
}

void GibbsSampler::update_sigma_field(std::size_t k) {
  auto& raw = raw_[k];
  double quad = 0.0;
  for (std::size_t i = 0; i < areas_; ++i) {
    double qf = q_diag_[i] * raw[i];
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) qf += val_[p] * raw[col_[p]];
    quad += raw[i] * qf;
  }
  if (quad > 0.0) sigma_phi_[k] = slice_log_sd(sigma_phi_[k], rank_, quad);

  const double c = slice_rescale(sigma_phi_[k], [&](auto&& visit) {
    for (std::size_t i = 0; i < areas_; ++i) {
      for (int g : loaded_[k]) visit(i * kGroups + g, raw[i]);
    }
  });
  sigma_phi_[k] *= c;
  for (std::size_t i = 0; i < areas_; ++i) {
    for (int g : loaded_[k]) eta_[i * kGroups + g] += (c - 1.0) * raw[i];
    raw[i] *= c;
  }
}

void GibbsSampler::sweep() {
  update_alpha();
  update_omega();
  for (std::size_t k = 0; k < effects_; ++k) {
    update_field(k);
    update_field_ridge(k);
    recentre(k);
  }
  if (config_.update_sd) {
    for (int g = 0; g < kGroups; ++g) update_sigma_omega(g);
    for (std::size_t k = 0; k < effects_; ++k) update_sigma_field(k);
  }
  ++sweeps_;
  if (adapting_ && sweeps_ % kAdaptBatch == 0) {
    adapt();
  } else if (!adapting_ && sweeps_ % kAdaptBatch == 0) {
    // counters are only meaningful per batch
    alpha_acc_.fill(0);
    omega_block_acc_.fill(0);
    std::fill(omega_acc_.begin(), omega_acc_.end(), 0);
    for (auto& a : field_acc_) std::fill(a.begin(), a.end(), 0);
  }
}

void GibbsSampler::adapt() {
  ++batches_;
  const double gain = 1.0 / std::sqrt(static_cast<double>(batches_));
  const double target = config_.adapt_target;
  auto tune = [&](double& step, int& acc) {
    const double rate = static_cast<double>(acc) / kAdaptBatch;
    step *= std::exp(gain * (rate - target));
    step = std::clamp(step, 1e-4, 1e3);
    acc = 0;
  };
  for (int g = 0; g < kGroups; ++g) {
    tune(alpha_step_[g], alpha_acc_[g]);
    tune(omega_block_step_[g], omega_block_acc_[g]);
  }
  for (std::size_t c = 0; c < omega_scale_.size(); ++c) tune(omega_scale_[c], omega_acc_[c]);
  for (std::size_t k = 0; k < effects_; ++k) {
    for (std::size_t i = 0; i < areas_; ++i) tune(field_scale_[k][i], field_acc_[k][i]);
  }
}

std::vector<std::string> GibbsSampler::scalar_names() const {
  std::vector<std::string> names;
  for (int g = 0; g < kGroups; ++g) names.push_back("alpha_g" + std::to_string(g + 1));
  for (int g = 0; g < kGroups; ++g) names.push_back("sigma_omega_g" + std::to_string(g + 1));
  for (const auto& l : spec_.incidence.labels) names.push_back("sigma_" + l);
  names.push_back("deviance");
  return names;
}

std::vector<double> GibbsSampler::scalars() const {
  std::vector<double> v(alpha_.begin(), alpha_.end());
  v.insert(v.end(), sigma_omega_.begin(), sigma_omega_.end());
  v.insert(v.end(), sigma_phi_.begin(), sigma_phi_.end());
  v.push_back(deviance());
  return v;
}

}  // namespace srp
