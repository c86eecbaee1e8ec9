#include "repsim/matrix.hpp"

#include <cmath>
#include <string>

namespace repsim {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("Matrix: rows and cols must be >= 1, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("Matrix: rows and cols must be >= 1, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (data_.size() != rows * cols) {
    throw InvalidArgument("Matrix: data length " +
                          std::to_string(data_.size()) + " != " +
                          std::to_string(rows) + "*" + std::to_string(cols));
  }
  check_finite();
}

Matrix Matrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r > 0 ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw InvalidArgument("Matrix::from_rows: ragged rows");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

void Matrix::check_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw InvalidArgument("Matrix: non-finite entry");
    }
  }
}

Matrix center_rows(const Matrix& m) {
  Matrix out = m;
  auto v = out.view();
  v.colwise() -= v.rowwise().mean();
  return out;
}

CovarianceBlocks covariance_blocks(const Matrix& l1, const Matrix& l2) {
  if (l1.cols() != l2.cols()) {
    throw ColumnMismatch("covariance_blocks: " + std::to_string(l1.cols()) +
                         " vs " + std::to_string(l2.cols()) + " datapoints");
  }
  const std::size_t n = l1.cols();
  if (n < 2) {
    throw InvalidArgument("covariance_blocks: need >= 2 datapoints");
  }
  const Matrix c1 = center_rows(l1);
  const Matrix c2 = center_rows(l2);
  const double inv = 1.0 / static_cast<double>(n - 1);

  EigenRowMajor s11 = c1.view() * c1.view().transpose() * inv;
  EigenRowMajor s22 = c2.view() * c2.view().transpose() * inv;
  EigenRowMajor s12 = c1.view() * c2.view().transpose() * inv;
  // Products pick up asymmetric roundoff; restore exact symmetry.
  s11 = ((s11 + s11.transpose()) * 0.5).eval();
  s22 = ((s22 + s22.transpose()) * 0.5).eval();

  return {Matrix::from_eigen(s11), Matrix::from_eigen(s22),
          Matrix::from_eigen(s12)};
}

}  // namespace repsim
