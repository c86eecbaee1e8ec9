#include "repsim/cca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace repsim {

ActivationMatrix::ActivationMatrix(Matrix m, std::vector<std::string> row_labels)
    : matrix(std::move(m)), labels(std::move(row_labels)) {
  if (matrix.cols() < 2) {
    throw InvalidArgument("ActivationMatrix: need >= 2 datapoints, got " +
                          std::to_string(matrix.cols()));
  }
  if (!labels.empty() && labels.size() != matrix.rows()) {
    throw InvalidArgument("ActivationMatrix: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(matrix.rows()) +
                          " rows");
  }
}

namespace {

// Rows scaled to unit Euclidean norm.
EigenRowMajor normalized_rows(const EigenRowMajor& m) {
  EigenRowMajor out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm > 0) out.row(r) /= norm;
  }
  return out;
}

// Deterministic sign: the entry of largest magnitude is made positive.
void canonicalize_row_signs(EigenRowMajor& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index imax = 0;
    m.row(r).cwiseAbs().maxCoeff(&imax);
    if (m(r, imax) < 0) m.row(r) = -m.row(r);
  }
}

}  // namespace

CcaResult compute_cca(const ActivationMatrix& l1, const ActivationMatrix& l2,
                      double eps) {
  if (l1.datapoints() != l2.datapoints()) {
    throw ColumnMismatch("compute_cca: " + std::to_string(l1.datapoints()) +
                         " vs " + std::to_string(l2.datapoints()) +
                         " datapoints");
  }
  const Matrix c1 = center_rows(l1.matrix);
  const Matrix c2 = center_rows(l2.matrix);
  const CovarianceBlocks cov = covariance_blocks(c1, c2);

  PsdWhitener w1, w2;
  try {
    w1 = whiten_psd(cov.s11, eps);
    w2 = whiten_psd(cov.s22, eps);
  } catch (const AllEigenvaluesNegligible&) {
    throw DegenerateInput(
        "compute_cca: a layer has zero retained rank (all rows constant?)");
  }

  // Whitened cross-covariance, restricted to the retained eigenspaces. Its
  // singular values are the canonical correlations and its singular vectors
  // stay inside the retained subspaces, which keeps the data-space canonical
  // vectors orthonormal even when the cross-covariance is rank deficient.
  const EigenRowMajor core = w1.transform.view() * cov.s12.view() *
                             w2.transform.view().transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> solver(
      core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("compute_cca: SVD did not converge");
  }

  const std::size_t c = std::min(w1.rank, w2.rank);
  CcaResult out;
  out.retained_rank_left = w1.rank;
  out.retained_rank_right = w2.rank;
  out.rho.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    out.rho[i] = std::clamp(solver.singularValues()(static_cast<Eigen::Index>(i)),
                            0.0, 1.0);
  }

  const Eigen::MatrixXd u = solver.matrixU().leftCols(static_cast<Eigen::Index>(c));
  const Eigen::MatrixXd v = solver.matrixV().leftCols(static_cast<Eigen::Index>(c));
  out.left_directions = Matrix::from_eigen((w1.basis.view() * u).transpose());
  out.right_directions = Matrix::from_eigen((w2.basis.view() * v).transpose());
  out.left_canonical = Matrix::from_eigen(
      normalized_rows(u.transpose() * w1.transform.view() * c1.view()));
  out.right_canonical = Matrix::from_eigen(
      normalized_rows(v.transpose() * w2.transform.view() * c2.view()));
  return out;
}

ActivationMatrix svcca_preprocess(const ActivationMatrix& l,
                                  double variance_fraction) {
  if (!(variance_fraction > 0.0) || variance_fraction > 1.0) {
    throw InvalidArgument("svcca_preprocess: variance_fraction must be in (0, 1]");
  }
  const Matrix centered = center_rows(l.matrix);
  const SvdResult dec = svd(centered);

  double total = 0.0;
  for (double s : dec.singular_values) total += s * s;
  if (total == 0.0) {
    throw DegenerateInput("svcca_preprocess: matrix has no variance");
  }

  const double target = variance_fraction * total * (1.0 - 1e-12);
  std::size_t keep = 0;
  double cumulative = 0.0;
  for (double s : dec.singular_values) {
    if (s == 0.0) break;
    cumulative += s * s;
    ++keep;
    if (cumulative >= target) break;
  }

  // Kept directions scaled by their singular values: rows sigma_i * v_i^T.
  EigenRowMajor projected(static_cast<Eigen::Index>(keep),
                          static_cast<Eigen::Index>(l.datapoints()));
  for (std::size_t i = 0; i < keep; ++i) {
    projected.row(static_cast<Eigen::Index>(i)) =
        dec.singular_values[i] *
        dec.vt.view().row(static_cast<Eigen::Index>(i));
  }
  canonicalize_row_signs(projected);
  return ActivationMatrix(Matrix::from_eigen(projected));
}

}  // namespace repsim
