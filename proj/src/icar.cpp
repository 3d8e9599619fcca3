#include "srpanova/icar.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "srpanova/error.hpp"

namespace srp {

IcarModel icar_precision(const RegionGraph& graph) {
  graph.check_invariants();
  const int n = static_cast<int>(graph.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    const auto& nb = graph.neighbors(i);
    trip.emplace_back(i, i, static_cast<double>(nb.size()));
    for (int j : nb) trip.emplace_back(i, j, -1.0);
  }
  IcarModel m;
  m.q.resize(n, n);
  m.q.setFromTriplets(trip.begin(), trip.end());
  m.q.makeCompressed();
  m.component = graph.component_label();
  m.members = graph.components();
  m.kappa.assign(m.members.size(), 1.0);
  m.rank = n - graph.n_components();
  m.scaled = false;
  return m;
}

namespace {

Eigen::MatrixXd block(const IcarModel& model, const std::vector<int>& members) {
  const Eigen::MatrixXd full = model.dense();
  const int k = static_cast<int>(members.size());
  Eigen::MatrixXd b(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) b(r, c) = full(members[r], members[c]);
  }
  return b;
}

ComponentSpectrum component_spectrum(const Eigen::MatrixXd& b, const std::vector<int>& members) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of Q failed");
  const auto& w = es.eigenvalues();
  const double scale = std::max(std::abs(w(w.size() - 1)), 1.0);
  int null_count = 0;
  for (int i = 0; i < w.size(); ++i) {
    if (w(i) < 1e-10 * scale) ++null_count;
  }
  if (null_count != 1) {
    throw NumericalError("ICAR block over " + std::to_string(members.size()) + " regions has " +
                         std::to_string(null_count) + " null directions, expected 1");
  }
  ComponentSpectrum s;
  s.members = members;
  const int m = static_cast<int>(w.size()) - 1;
  s.values = w.tail(m);
  s.vectors = es.eigenvectors().rightCols(m);
  return s;
}

}  // namespace

std::vector<ComponentSpectrum> spectrum(const IcarModel& model) {
  std::vector<ComponentSpectrum> out;
  for (const auto& mem : model.members) out.push_back(component_spectrum(block(model, mem), mem));
  return out;
}

Eigen::VectorXd marginal_variances(const IcarModel& model) {
  Eigen::VectorXd var = Eigen::VectorXd::Zero(model.size());
  for (const auto& s : spectrum(model)) {
    const Eigen::VectorXd d =
        (s.vectors.array().square().rowwise() / s.values.transpose().array()).rowwise().sum();
    for (std::size_t r = 0; r < s.members.size(); ++r) var(s.members[r]) = d(r);
  }
  return var;
}

IcarModel scale_icar(const IcarModel& model) {
  const Eigen::VectorXd var = marginal_variances(model);
  IcarModel out = model;
  std::vector<double> factor(model.members.size());
  for (std::size_t c = 0; c < model.members.size(); ++c) {
    double log_sum = 0.0;
    for (int i : model.members[c]) log_sum += std::log(var(i));
    factor[c] = std::exp(log_sum / static_cast<double>(model.members[c].size()));
    out.kappa[c] = model.kappa[c] * factor[c];
  }
  for (int k = 0; k < out.q.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(out.q, k); it; ++it) {
      it.valueRef() *= factor[out.component[it.row()]];
    }
  }
  out.scaled = true;
  return out;
}

}  // namespace srp
