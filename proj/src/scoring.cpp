#include "srpanova/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "srpanova/csv.hpp"
#include "srpanova/error.hpp"
#include "srpanova/mcmc.hpp"

namespace srp {

void DrawMatrix::append_row(std::span<const double> r) {
  if (rows == 0 && cols == 0) cols = r.size();
  if (r.size() != cols) throw InputError("draw row has the wrong width");
  values.insert(values.end(), r.begin(), r.end());
  ++rows;
}

namespace {

double cell_loglik(double y, double e, double eta) {
  const double v = std::clamp(eta, -kEtaClamp, kEtaClamp);
  return y * (std::log(e) + v) - e * std::exp(v) - std::lgamma(y + 1.0);
}

void check_cells(const DrawMatrix& m, const Dataset& data) {
  if (m.cols != data.n_cells()) {
    throw InputError("draws have " + std::to_string(m.cols) + " cells, data has " +
                     std::to_string(data.n_cells()));
  }
}

}  // namespace

DrawMatrix pointwise_loglik(const DrawMatrix& eta, const Dataset& data) {
  check_cells(eta, data);
  DrawMatrix out(eta.rows, eta.cols);
  for (std::size_t c = 0; c < eta.cols; ++c) {
    const double y = static_cast<double>(data.y[c]);
    const double base = y * std::log(data.e[c]) - std::lgamma(y + 1.0);
    for (std::size_t s = 0; s < eta.rows; ++s) {
      const double v = std::clamp(eta.at(s, c), -kEtaClamp, kEtaClamp);
      out.at(s, c) = base + y * v - data.e[c] * std::exp(v);
    }
  }
  return out;
}

DicResult dic(const DrawMatrix& eta, const Dataset& data, std::size_t min_draws) {
  check_cells(eta, data);
  if (eta.rows < std::max<std::size_t>(min_draws, 1)) {
    throw InputError("DIC needs at least " + std::to_string(min_draws) + " draws, got " +
                     std::to_string(eta.rows));
  }
  // means are accumulated as offsets from the first draw, so a constant
  // chain gives pD = 0 exactly
  const double n = static_cast<double>(eta.rows);
  auto deviance = [&](std::size_t s) {
    double ll = 0.0;
    for (std::size_t c = 0; c < eta.cols; ++c) {
      ll += cell_loglik(static_cast<double>(data.y[c]), data.e[c], eta.at(s, c));
    }
    return -2.0 * ll;
  };
  const double dev0 = deviance(0);
  double offset = 0.0;
  for (std::size_t s = 1; s < eta.rows; ++s) offset += deviance(s) - dev0;
  const double mean_dev = dev0 + offset / n;
  double plugin = 0.0;
  for (std::size_t c = 0; c < eta.cols; ++c) {
    double m = 0.0;
    for (std::size_t s = 1; s < eta.rows; ++s) m += eta.at(s, c) - eta.at(0, c);
    plugin += -2.0 * cell_loglik(static_cast<double>(data.y[c]), data.e[c], eta.at(0, c) + m / n);
  }
  DicResult r;
  r.mean_deviance = mean_dev;
  r.plugin_deviance = plugin;
  r.pd = mean_dev - plugin;
  r.dic = mean_dev + r.pd;
  return r;
}

WaicResult waic(const DrawMatrix& pointwise, std::size_t min_draws) {
  if (pointwise.rows < std::max<std::size_t>(min_draws, 2)) {
    throw InputError("WAIC needs at least " + std::to_string(std::max<std::size_t>(min_draws, 2)) +
                     " draws, got " + std::to_string(pointwise.rows));
  }
  const double n = static_cast<double>(pointwise.rows);
  WaicResult r;
  for (std::size_t c = 0; c < pointwise.cols; ++c) {
    double mx = -std::numeric_limits<double>::infinity();
    const double first = pointwise.at(0, c);
    double shift = 0.0;
    for (std::size_t s = 0; s < pointwise.rows; ++s) {
      mx = std::max(mx, pointwise.at(s, c));
      shift += pointwise.at(s, c) - first;
    }
    const double mean = first + shift / n;
    double sum_exp = 0.0, ss = 0.0;
    for (std::size_t s = 0; s < pointwise.rows; ++s) {
      const double v = pointwise.at(s, c);
      sum_exp += std::exp(v - mx);
      ss += (v - mean) * (v - mean);
    }
    const double var = ss / (n - 1.0);
    r.lppd += mx + std::log(sum_exp / n);
    r.p_waic += var;
    if (var > 0.4) ++r.unreliable_cells;
  }
  r.waic = -2.0 * (r.lppd - r.p_waic);
  return r;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

PosteriorSummary summarize(const DrawMatrix& eta, const DrawMatrix& fields,
                           const std::vector<std::string>& effect_labels,
                           const std::vector<std::string>& region_ids,
                           const std::vector<std::string>& group_names) {
  const std::size_t areas = region_ids.size();
  if (eta.cols != areas * kGroups) throw InputError("eta draws do not match the regions");
  if (eta.rows == 0) throw InputError("no draws to summarize");
  if (fields.cols != effect_labels.size() * areas || (fields.cols > 0 && fields.rows != eta.rows)) {
    throw InputError("field draws do not match the effects");
  }
  PosteriorSummary out;
  out.region_ids = region_ids;
  out.group_names = group_names;
  out.effect_labels = effect_labels;
  const double n = static_cast<double>(eta.rows);
  std::vector<double> buf(eta.rows);

  out.risk.resize(eta.cols);
  for (std::size_t c = 0; c < eta.cols; ++c) {
    double sum = 0.0, above = 0.0;
    for (std::size_t s = 0; s < eta.rows; ++s) {
      buf[s] = std::exp(eta.at(s, c));
      sum += buf[s];
      if (buf[s] > 1.0) above += 1.0;
    }
    std::sort(buf.begin(), buf.end());
    auto& r = out.risk[c];
    r.rr_mean = sum / n;
    r.rr_median = quantile_sorted(buf, 0.5);
    r.rr_q025 = quantile_sorted(buf, 0.025);
    r.rr_q975 = quantile_sorted(buf, 0.975);
    r.p_exceed = above / n;
  }

  out.effects.resize(fields.cols);
  for (std::size_t c = 0; c < fields.cols; ++c) {
    double sum = 0.0;
    for (std::size_t s = 0; s < fields.rows; ++s) {
      buf[s] = fields.at(s, c);
      sum += buf[s];
    }
    std::sort(buf.begin(), buf.end());
    out.effects[c] = EffectSummary{sum / n, quantile_sorted(buf, 0.025), quantile_sorted(buf, 0.975)};
  }
  return out;
}

ComparisonTable comparison_table(std::vector<FitScore> fits) {
  std::stable_sort(fits.begin(), fits.end(), [](const FitScore& a, const FitScore& b) {
    if (a.failed != b.failed) return !a.failed;
    if (!a.failed && a.dic.dic != b.dic.dic) return a.dic.dic < b.dic.dic;
    return a.label < b.label;
  });
  ComparisonTable t;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    t.rows.push_back(ComparisonRow{static_cast<int>(i + 1), std::move(fits[i])});
  }
  if (!t.rows.empty()) t.best_label = t.rows.front().score.label;
  return t;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string fixed_or_na(double v, int digits, bool failed) {
  return failed || !std::isfinite(v) ? "NA" : csv::format_fixed(v, digits);
}

}  // namespace

void write_comparison_csv(const std::filesystem::path& path, const ComparisonTable& table,
                          bool with_timings) {
  auto out = open_out(path);
  out << "rank,family,label,dic,pd,waic,p_waic,cpu_seconds,converged\n";
  for (const auto& row : table.rows) {
    const auto& s = row.score;
    out << row.rank << ',' << to_string(s.family) << ',' << s.label << ','
        << fixed_or_na(s.dic.dic, 1, s.failed) << ',' << fixed_or_na(s.dic.pd, 2, s.failed) << ','
        << fixed_or_na(s.waic.waic, 1, s.failed) << ',' << fixed_or_na(s.waic.p_waic, 2, s.failed)
        << ',' << (with_timings ? csv::format_fixed(s.cpu_seconds, 2) : std::string("NA")) << ','
        << (s.failed ? "failed" : (s.converged ? "true" : "false")) << '\n';
  }
}

std::string render_comparison(const ComparisonTable& table, std::size_t max_rows,
                              bool timings) {
  std::size_t width = 11;
  for (const auto& row : table.rows) {
    const auto& l = row.score.label;
    const auto colon = l.find(": ");
    if (colon != std::string::npos) width = std::max(width, l.size() - colon - 2);
  }
  std::ostringstream os;
  os << std::left << std::setw(6) << "Model" << std::setw(static_cast<int>(width) + 2)
     << "Combination" << std::right << std::setw(10) << "DIC" << std::setw(10) << "WAIC"
     << std::setw(11) << "CPU (sec)" << "  Conv\n";
  std::size_t n = 0;
  for (const auto& row : table.rows) {
    if (max_rows > 0 && n++ >= max_rows) break;
    const auto& s = row.score;
    const auto colon = s.label.find(": ");
    const std::string combo = colon == std::string::npos ? "-" : s.label.substr(colon + 2);
    os << std::left << std::setw(6) << to_string(s.family) << std::setw(static_cast<int>(width) + 2)
       << combo << std::right << std::setw(10) << fixed_or_na(s.dic.dic, 1, s.failed)
       << std::setw(10) << fixed_or_na(s.waic.waic, 1, s.failed) << std::setw(11)
       << (timings ? csv::format_fixed(s.cpu_seconds, 2) : std::string("NA")) << "  "
       << (s.failed ? "failed" : (s.converged ? "yes" : "no")) << '\n';
  }
  return os.str();
}

void write_risk_csv(const std::filesystem::path& path, const PosteriorSummary& summary) {
  auto out = open_out(path);
  out << "region_id,group,rr_mean,rr_median,rr_q025,rr_q975,p_exceed\n";
  for (std::size_t i = 0; i < summary.region_ids.size(); ++i) {
    for (int g = 0; g < kGroups; ++g) {
      const auto& r = summary.risk_at(i, g);
      out << summary.region_ids[i] << ',' << summary.group_names[g] << ','
          << csv::format_double(r.rr_mean) << ',' << csv::format_double(r.rr_median) << ','
          << csv::format_double(r.rr_q025) << ',' << csv::format_double(r.rr_q975) << ','
          << csv::format_double(r.p_exceed) << '\n';
    }
  }
}

void write_effects_csv(const std::filesystem::path& path, const PosteriorSummary& summary) {
  auto out = open_out(path);
  out << "region_id,effect,mean,q025,q975\n";
  for (std::size_t k = 0; k < summary.effect_labels.size(); ++k) {
    for (std::size_t i = 0; i < summary.region_ids.size(); ++i) {
      const auto& e = summary.effect_at(k, i);
      out << summary.region_ids[i] << ',' << summary.effect_labels[k] << ','
          << csv::format_double(e.mean) << ',' << csv::format_double(e.q025) << ','
          << csv::format_double(e.q975) << '\n';
    }
  }
}

}  // namespace srp
