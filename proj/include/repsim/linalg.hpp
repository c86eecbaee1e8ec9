#pragma once

#include <cstdint>
#include <vector>

#include "repsim/matrix.hpp"

namespace repsim {

/// Thin SVD m = u * diag(singular_values) * vt.
struct SvdResult {
  Matrix u;                            // rows x r, column-orthonormal
  std::vector<double> singular_values;  // length r, nonincreasing, >= 0
  Matrix vt;                           // r x cols, row-orthonormal
};

/// Backward-stable thin SVD. Throws ConvergenceFailure if the solver
/// reports non-convergence.
SvdResult svd(const Matrix& m);

/// Eigendecomposition-backed whitener for a symmetric PSD matrix.
/// transform = D^{-1/2} E^T restricted to eigenvalues above eps * max;
/// basis holds the retained eigenvectors as columns.
struct PsdWhitener {
  Matrix transform;    // rank x dim
  Matrix basis;        // dim x rank
  std::size_t rank;    // retained eigendirections
};

/// Throws NotSymmetric when m deviates from symmetry by more than 1e-10
/// relative, AllEigenvaluesNegligible when nothing survives truncation.
PsdWhitener whiten_psd(const Matrix& m, double eps = 1e-10);

/// Pseudo-inverse square root: E D^{-1/2} E^T over the retained eigenspace.
Matrix inv_sqrt_psd(const Matrix& m, double eps = 1e-10);

/// Orthonormalization result. Rows of `basis` correspond to the input rows
/// listed in `kept`; rows whose residual fell below 1e-10 of their original
/// norm are listed in `dropped` (basis may have zero rows if all drop).
struct GramSchmidtResult {
  Matrix basis;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;
};

/// Modified Gram-Schmidt with one re-orthogonalization pass over the rows.
GramSchmidtResult gram_schmidt(const Matrix& vectors);

/// Orthogonal matrix with determinant +1, deterministic per seed.
Matrix random_rotation(std::size_t dim, std::uint64_t seed);

/// Orthogonal matrix with determinant +1 or -1 (Haar), deterministic per
/// seed. random_rotation is this with a sign correction.
Matrix random_orthogonal(std::size_t dim, std::uint64_t seed);

}  // namespace repsim
