#pragma once

#include <cstddef>

namespace repsim {

/// Survival function P(X > x) for a chi-squared variable with dof degrees
/// of freedom, via the regularized incomplete gamma function (power series
/// for small argument, continued fraction for large). Absolute error below
/// 1e-8. Throws InvalidArgument for x < 0 or dof == 0.
double chi_squared_sf(double x, std::size_t dof);

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double regularized_gamma_q(double a, double x);

}  // namespace repsim
