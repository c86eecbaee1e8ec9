#include "repsim/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "repsim/errors.hpp"

namespace repsim {

namespace {

// Lower regularized gamma P(a, x) by power series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
  const double gln = std::lgamma(a);
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) {
      return sum * std::exp(-x + a * std::log(x) - gln);
    }
  }
  throw ConvergenceFailure("regularized_gamma: series did not converge");
}

// Upper regularized gamma Q(a, x) by Lentz continued fraction, x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
  const double gln = std::lgamma(a);
  constexpr double kTiny = std::numeric_limits<double>::min() / 1e-16;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) {
      return std::exp(-x + a * std::log(x) - gln) * h;
    }
  }
  throw ConvergenceFailure(
      "regularized_gamma: continued fraction did not converge");
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0) || x < 0 || !std::isfinite(a)) {
    throw InvalidArgument("regularized_gamma_q: need a > 0 and x >= 0");
  }
  if (!std::isfinite(x)) return 0.0;
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) {
    return 1.0 - gamma_p_series(a, x);
  }
  return gamma_q_continued_fraction(a, x);
}

double chi_squared_sf(double x, std::size_t dof) {
  if (dof == 0) {
    throw InvalidArgument("chi_squared_sf: dof must be >= 1");
  }
  if (std::isnan(x) || x < 0) {
    throw InvalidArgument("chi_squared_sf: x must be >= 0, got " +
                          std::to_string(x));
  }
  return regularized_gamma_q(static_cast<double>(dof) / 2.0, x / 2.0);
}

}  // namespace repsim
