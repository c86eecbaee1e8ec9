#include "repsim/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace repsim {

SvdResult svd(const Matrix& m) {
  Eigen::BDCSVD<Eigen::MatrixXd> solver(
      m.view(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("svd: solver did not converge on " +
                             std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
  }
  SvdResult out;
  out.u = Matrix::from_eigen(solver.matrixU());
  const auto& s = solver.singularValues();
  out.singular_values.assign(s.data(), s.data() + s.size());
  out.vt = Matrix::from_eigen(solver.matrixV().transpose());
  return out;
}

PsdWhitener whiten_psd(const Matrix& m, double eps) {
  if (m.rows() != m.cols()) {
    throw NotSymmetric("whiten_psd: matrix is " + std::to_string(m.rows()) +
                       "x" + std::to_string(m.cols()));
  }
  const auto v = m.view();
  const double scale = v.cwiseAbs().maxCoeff();
  const double asym = (v - v.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0 && asym > 1e-10 * scale) {
    throw NotSymmetric("whiten_psd: asymmetry " + std::to_string(asym / scale) +
                       " relative");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      ((v + v.transpose()) * 0.5).eval());
  if (eig.info() != Eigen::Success) {
    throw ConvergenceFailure("whiten_psd: eigendecomposition failed");
  }
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const double lambda_max = lambda(lambda.size() - 1);
  if (!(lambda_max > 0)) {
    throw AllEigenvaluesNegligible("whiten_psd: max eigenvalue <= 0");
  }
  const double cutoff = eps * lambda_max;

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff && lambda(i) > 0) {
      keep.push_back(i);
    }
  }
  if (keep.empty()) {
    throw AllEigenvaluesNegligible("whiten_psd: all eigenvalues below eps");
  }

  const auto rank = static_cast<Eigen::Index>(keep.size());
  const auto dim = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXd basis(dim, rank);
  Eigen::VectorXd inv_sqrt(rank);
  // Retained directions ordered by descending eigenvalue.
  for (Eigen::Index j = 0; j < rank; ++j) {
    const Eigen::Index src = keep[keep.size() - 1 - static_cast<std::size_t>(j)];
    basis.col(j) = eig.eigenvectors().col(src);
    inv_sqrt(j) = 1.0 / std::sqrt(lambda(src));
  }

  PsdWhitener out;
  out.transform = Matrix::from_eigen(inv_sqrt.asDiagonal() * basis.transpose());
  out.basis = Matrix::from_eigen(basis);
  out.rank = static_cast<std::size_t>(rank);
  return out;
}

Matrix inv_sqrt_psd(const Matrix& m, double eps) {
  const PsdWhitener w = whiten_psd(m, eps);
  // E D^{-1/2} E^T = (D^{-1/2} E^T)^T (D^{-1/2} E^T) applied once per factor.
  return Matrix::from_eigen(w.basis.view() * w.transform.view());
}

GramSchmidtResult gram_schmidt(const Matrix& vectors) {
  if (vectors.rows() > vectors.cols()) {
    throw InvalidArgument("gram_schmidt: more rows than columns (" +
                          std::to_string(vectors.rows()) + " > " +
                          std::to_string(vectors.cols()) + ")");
  }
  constexpr double kDropTol = 1e-10;
  const auto n = static_cast<Eigen::Index>(vectors.cols());

  GramSchmidtResult out;
  std::vector<Eigen::VectorXd> basis;
  for (std::size_t i = 0; i < vectors.rows(); ++i) {
    Eigen::VectorXd v = vectors.row(i).transpose();
    const double original_norm = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        v -= q.dot(v) * q;
      }
    }
    if (v.norm() < kDropTol * original_norm || original_norm == 0.0) {
      out.dropped.push_back(i);
      continue;
    }
    v /= v.norm();
    basis.push_back(std::move(v));
    out.kept.push_back(i);
  }

  EigenRowMajor stacked(static_cast<Eigen::Index>(basis.size()), n);
  for (std::size_t r = 0; r < basis.size(); ++r) {
    stacked.row(static_cast<Eigen::Index>(r)) = basis[r].transpose();
  }
  out.basis = Matrix::from_eigen(stacked);
  return out;
}

Matrix random_orthogonal(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) {
    throw InvalidArgument("random_orthogonal: dim must be >= 1");
  }
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      g(r, c) = normal(engine);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the sign ambiguity so the distribution is Haar.
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    if (r(c, c) < 0) {
      q.col(c) = -q.col(c);
    }
  }
  return Matrix::from_eigen(q);
}

Matrix random_rotation(std::size_t dim, std::uint64_t seed) {
  Matrix q = random_orthogonal(dim, seed);
  auto v = q.view();
  if (v.determinant() < 0) {
    v.col(v.cols() - 1) = -v.col(v.cols() - 1);
  }
  return q;
}

}  // namespace repsim
