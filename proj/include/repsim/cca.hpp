#pragma once

#include <string>
#include <vector>

#include "repsim/linalg.hpp"
#include "repsim/matrix.hpp"

namespace repsim {

/// Relative eigenvalue cutoff used when whitening covariance blocks.
inline constexpr double kDefaultEps = 1e-10;

/// A layer's neuron activations: one row per neuron, one column per
/// datapoint. Needs at least two datapoints (covariance) and may carry
/// per-neuron labels.
struct ActivationMatrix {
  Matrix matrix;
  std::vector<std::string> labels;  // empty = unlabeled

  ActivationMatrix(Matrix m, std::vector<std::string> row_labels = {});

  std::size_t neurons() const { return matrix.rows(); }
  std::size_t datapoints() const { return matrix.cols(); }
};

/// Full CCA decomposition between two layers.
///
/// rho holds the canonical correlation coefficients, sorted nonincreasing
/// and clamped to [0, 1]; there are min(retained ranks) of them. The
/// direction matrices hold the singular vectors of the whitened
/// cross-covariance (one per row, in neuron space). The canonical matrices
/// hold the corresponding data-space vectors, one unit-norm row per
/// coefficient; rows within a side are pairwise orthogonal.
struct CcaResult {
  std::vector<double> rho;
  Matrix left_directions;   // c x a
  Matrix right_directions;  // c x b
  Matrix left_canonical;    // c x n, orthonormal rows
  Matrix right_canonical;   // c x n, orthonormal rows
  std::size_t retained_rank_left = 0;
  std::size_t retained_rank_right = 0;

  std::size_t coefficient_count() const { return rho.size(); }
};

/// Canonical correlation analysis between two layers observed on the same
/// datapoints. Inputs are centered internally; covariance blocks are
/// whitened on the eigenspace retained at `eps` (relative) and the whitened
/// cross-covariance is decomposed by SVD.
///
/// Throws ColumnMismatch when the datapoint counts differ and
/// DegenerateInput when either layer has zero retained rank (e.g. all rows
/// constant).
CcaResult compute_cca(const ActivationMatrix& l1, const ActivationMatrix& l2,
                      double eps = kDefaultEps);

/// SVD pruning step: centers rows, keeps the smallest set of top singular
/// directions whose cumulative squared singular values reach
/// variance_fraction of the total, and returns those directions scaled by
/// their singular values as a new (smaller) layer.
///
/// Throws DegenerateInput when the centered matrix is exactly zero.
ActivationMatrix svcca_preprocess(const ActivationMatrix& l,
                                  double variance_fraction = 0.99);

}  // namespace repsim
