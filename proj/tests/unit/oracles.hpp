// Independent oracles used by the tests. These deliberately avoid the
// library's whitening/SVD path: correlations are maximized by brute-force
// grids and tail probabilities come from quadrature of the density.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "repsim/linalg.hpp"
#include "repsim/matrix.hpp"

namespace oracles {

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<double> project(const repsim::Matrix& l,
                                   const std::vector<double>& w) {
  std::vector<double> out(l.cols(), 0.0);
  for (std::size_t r = 0; r < l.rows(); ++r) {
    for (std::size_t c = 0; c < l.cols(); ++c) {
      out[c] += w[r] * l(r, c);
    }
  }
  return out;
}

// Brute-force top canonical correlation for two 2-row layers: |corr| over
// a 1-degree grid of unit vector pairs (w, s).
inline double grid_cca_2x2(const repsim::Matrix& l1, const repsim::Matrix& l2) {
  if (l1.rows() != 2 || l2.rows() != 2) {
    throw std::logic_error("grid_cca_2x2 expects 2-row layers");
  }
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  double best = 0.0;
  for (int wi = 0; wi < 180; ++wi) {
    const std::vector<double> w{std::cos(wi * kDeg), std::sin(wi * kDeg)};
    const std::vector<double> pw = project(l1, w);
    for (int si = 0; si < 180; ++si) {
      const std::vector<double> s{std::cos(si * kDeg), std::sin(si * kDeg)};
      best = std::max(best, std::abs(pearson(pw, project(l2, s))));
    }
  }
  return best;
}

// Top canonical correlation for layers with up to 3 rows: grid over unit w
// (1 degree), exact inner maximization over s by solving the small normal
// system Sigma22 s = Sigma21 w, correlation evaluated directly on the
// projected data vectors.
inline double grid_cca_small(const repsim::Matrix& l1,
                             const repsim::Matrix& l2) {
  const std::size_t a = l1.rows();
  const std::size_t b = l2.rows();
  if (a > 3 || b > 3) throw std::logic_error("grid_cca_small: rows <= 3");

  const repsim::Matrix c1 = repsim::center_rows(l1);
  const repsim::Matrix c2 = repsim::center_rows(l2);
  const Eigen::MatrixXd s22 = c2.view() * c2.view().transpose();
  const Eigen::MatrixXd s21 = c2.view() * c1.view().transpose();

  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  double best = 0.0;
  auto consider = [&](const std::vector<double>& w) {
    Eigen::VectorXd wv(static_cast<Eigen::Index>(a));
    for (std::size_t i = 0; i < a; ++i) wv(static_cast<Eigen::Index>(i)) = w[i];
    const Eigen::VectorXd rhs = s21 * wv;
    const Eigen::VectorXd s =
        s22.colPivHouseholderQr().solve(rhs);
    std::vector<double> sv(b);
    for (std::size_t i = 0; i < b; ++i) sv[i] = s(static_cast<Eigen::Index>(i));
    best = std::max(best,
                    std::abs(pearson(project(l1, w), project(l2, sv))));
  };

  if (a == 1) {
    consider({1.0});
  } else if (a == 2) {
    for (int wi = 0; wi < 180; ++wi) {
      consider({std::cos(wi * kDeg), std::sin(wi * kDeg)});
    }
  } else {
    for (int ti = 0; ti <= 180; ++ti) {
      for (int pi = 0; pi < 360; ++pi) {
        const double theta = ti * kDeg, phi = pi * kDeg;
        consider({std::sin(theta) * std::cos(phi),
                  std::sin(theta) * std::sin(phi), std::cos(theta)});
      }
    }
  }
  return best;
}

// Chi-squared survival function by adaptive Simpson quadrature of the
// density, with the substitution t = u^2 to remove the endpoint
// singularity at dof = 1.
namespace detail {

inline double chi2_integrand(double u, std::size_t dof) {
  if (u <= 0.0) {
    return dof == 1 ? 2.0 * std::exp(-0.5 * static_cast<double>(dof) *
                                         std::log(2.0) -
                                     std::lgamma(0.5 * static_cast<double>(dof)))
                    : 0.0;
  }
  const double k = static_cast<double>(dof);
  const double log_f = (k - 1.0) * std::log(u) - 0.5 * u * u -
                       0.5 * k * std::log(2.0) - std::lgamma(0.5 * k);
  return 2.0 * std::exp(log_f);
}

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth, std::size_t dof) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = chi2_integrand(lm, dof);
  const double frm = chi2_integrand(rm, dof);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive(a, m, fa, flm, fm, left, tol / 2, depth - 1, dof) +
         adaptive(m, b, fm, frm, fb, right, tol / 2, depth - 1, dof);
}

}  // namespace detail

inline double chi_squared_sf_quadrature(double x, std::size_t dof) {
  if (x <= 0.0) return 1.0;
  const double lo = std::sqrt(x);
  const double hi =
      std::sqrt(std::max(x, 2.0 * static_cast<double>(dof)) + 400.0);
  if (lo >= hi) return 0.0;
  const double fa = detail::chi2_integrand(lo, dof);
  const double fb = detail::chi2_integrand(hi, dof);
  const double fm = detail::chi2_integrand(0.5 * (lo + hi), dof);
  const double whole = detail::simpson(lo, hi, fa, fm, fb);
  return detail::adaptive(lo, hi, fa, fm, fb, whole, 1e-11, 40, dof);
}

// --- seeded random inputs -------------------------------------------------

inline repsim::Matrix random_matrix(std::size_t rows, std::size_t cols,
                                    std::uint64_t seed, double std_dev = 1.0) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, std_dev);
  repsim::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = normal(engine);
  }
  return m;
}

// Symmetric PSD with eigenvalues log-spaced over [cond^-1, 1].
inline repsim::Matrix random_psd(std::size_t dim, std::uint64_t seed,
                                 double condition) {
  const repsim::Matrix q = repsim::random_rotation(dim, seed);
  Eigen::VectorXd d(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    const double f = dim == 1 ? 0.0
                              : static_cast<double>(i) /
                                    static_cast<double>(dim - 1);
    d(static_cast<Eigen::Index>(i)) = std::pow(condition, -f);
  }
  return repsim::Matrix::from_eigen(q.view() * d.asDiagonal() *
                                    q.view().transpose());
}

// Invertible square matrix with controlled condition number.
inline repsim::Matrix random_invertible(std::size_t dim, std::uint64_t seed,
                                        double condition) {
  const repsim::Matrix q1 = repsim::random_rotation(dim, seed);
  const repsim::Matrix q2 = repsim::random_rotation(dim, seed + 0x517e);
  Eigen::VectorXd d(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    const double f = dim == 1 ? 0.0
                              : static_cast<double>(i) /
                                    static_cast<double>(dim - 1);
    d(static_cast<Eigen::Index>(i)) = std::pow(condition, -f);
  }
  return repsim::Matrix::from_eigen(q1.view() * d.asDiagonal() * q2.view());
}

}  // namespace oracles
