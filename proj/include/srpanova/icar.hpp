#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "srpanova/region_graph.hpp"

namespace srp {

/**
 * Intrinsic CAR (Besag) precision structure over a RegionGraph.
 *
 * Q = D - W unscaled; after scale_icar each component's block is multiplied
 * by its kappa so the geometric mean of the constrained marginal variances
 * is 1 on every component. Rows of Q always sum to zero.
 */
struct IcarModel {
  Eigen::SparseMatrix<double> q;
  /// Per-component multiplier applied to the D - W block (1 when unscaled).
  std::vector<double> kappa;
  /// Component id per region, copied from the graph.
  std::vector<int> component;
  std::vector<std::vector<int>> members;
  /// I - n_components.
  int rank = 0;
  bool scaled = false;

  int size() const { return static_cast<int>(q.rows()); }
  int n_components() const { return static_cast<int>(members.size()); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(q); }
};

IcarModel icar_precision(const RegionGraph& graph);

/// Diagonal of the generalized inverse of Q, block by block (sum-to-zero covariance).
Eigen::VectorXd marginal_variances(const IcarModel& model);

/**
 * Scales each component block of Q by the geometric mean of its marginal
 * variances. Applying it to an already scaled model leaves it unchanged up
 * to round-off (the new per-component factor is 1).
 */
IcarModel scale_icar(const IcarModel& model);

/// Non-null eigenpairs of one component block of Q (global indices in `members`).
struct ComponentSpectrum {
  std::vector<int> members;
  Eigen::VectorXd values;   ///< ascending, strictly positive
  Eigen::MatrixXd vectors;  ///< members.size() x values.size(), orthonormal columns
};

/// Eigendecomposition per component. Throws NumericalError when a block has
/// more than one null direction.
std::vector<ComponentSpectrum> spectrum(const IcarModel& model);

}  // namespace srp
