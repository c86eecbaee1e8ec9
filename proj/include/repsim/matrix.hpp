#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "repsim/errors.hpp"

namespace repsim {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense real matrix in row-major order. Entries are checked finite on
/// construction; NaN/Inf anywhere is rejected with InvalidArgument.
class Matrix {
 public:
  Matrix() = default;

  /// Zero-filled rows x cols matrix. rows >= 1, cols >= 1.
  Matrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of row-major data. data.size() must equal rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  /// Convenience literal constructor: Matrix::from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  /// Copies an Eigen expression. Unlike the constructors this permits zero
  /// rows, which operations that drop rows (e.g. Gram-Schmidt) can produce.
  template <class Derived>
  static Matrix from_eigen(const Eigen::MatrixBase<Derived>& e) {
    Matrix m;
    m.rows_ = static_cast<std::size_t>(e.rows());
    m.cols_ = static_cast<std::size_t>(e.cols());
    m.data_.resize(m.rows_ * m.cols_);
    if (m.rows_ > 0 && m.cols_ > 0) {
      m.view() = e;
    }
    m.check_finite();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  Eigen::Map<const EigenRowMajor> view() const {
    return {data_.data(), static_cast<Eigen::Index>(rows_),
            static_cast<Eigen::Index>(cols_)};
  }
  Eigen::Map<EigenRowMajor> view() {
    return {data_.data(), static_cast<Eigen::Index>(rows_),
            static_cast<Eigen::Index>(cols_)};
  }

  /// Single row as an n-vector view.
  Eigen::Map<const Eigen::RowVectorXd> row(std::size_t r) const {
    return {data_.data() + r * cols_, static_cast<Eigen::Index>(cols_)};
  }

  bool operator==(const Matrix& other) const = default;

 private:
  void check_finite() const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Covariance blocks of two variate sets with a shared datapoint axis.
struct CovarianceBlocks {
  Matrix s11;  // a x a, symmetric PSD
  Matrix s22;  // b x b, symmetric PSD
  Matrix s12;  // a x b cross-covariance
};

/// Subtracts each row's mean. Shape preserved.
Matrix center_rows(const Matrix& m);

/// Covariance blocks with divisor n - 1. Inputs are centered internally.
/// Throws ColumnMismatch when the datapoint counts differ and
/// InvalidArgument when fewer than two datapoints are given.
CovarianceBlocks covariance_blocks(const Matrix& l1, const Matrix& l2);

}  // namespace repsim
