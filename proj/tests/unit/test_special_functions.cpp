#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "repsim/errors.hpp"
#include "repsim/special_functions.hpp"

TEST_SUITE_BEGIN("special_functions");

TEST_CASE("chi_squared_sf anchor values") {
  CHECK(repsim::chi_squared_sf(0.0, 1) == doctest::Approx(1.0));
  CHECK(repsim::chi_squared_sf(0.0, 37) == doctest::Approx(1.0));
  // dof 1: 2 * (1 - Phi(1)) = 0.31731...
  CHECK(repsim::chi_squared_sf(1.0, 1) ==
        doctest::Approx(0.3173105078629141).epsilon(1e-9));
  // dof 2 is exponential with mean 2.
  CHECK(repsim::chi_squared_sf(2.0, 2) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(repsim::chi_squared_sf(10.0, 2) ==
        doctest::Approx(std::exp(-5.0)).epsilon(1e-12));
}

TEST_CASE("chi_squared_sf rejects bad arguments") {
  CHECK_THROWS_AS((void)repsim::chi_squared_sf(-0.5, 3),
                  repsim::InvalidArgument);
  CHECK_THROWS_AS((void)repsim::chi_squared_sf(1.0, 0),
                  repsim::InvalidArgument);
}

TEST_CASE("chi_squared_sf agrees with quadrature of the density") {
  for (std::size_t dof : {1ul, 2ul, 3ul, 5ul, 10ul, 23ul, 50ul}) {
    for (double x : {0.0, 0.01, 0.5, 1.0, 3.0, 7.5, 20.0, 55.0, 100.0}) {
      const double got = repsim::chi_squared_sf(x, dof);
      const double expected = oracles::chi_squared_sf_quadrature(x, dof);
      CHECK(std::abs(got - expected) < 1e-6);
    }
  }
}

TEST_CASE("chi_squared_sf is monotone and bounded") {
  for (std::size_t dof : {1ul, 4ul, 30ul}) {
    double prev = 1.0;
    for (double x = 0.0; x <= 60.0; x += 0.5) {
      const double v = repsim::chi_squared_sf(x, dof);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_SUITE_END();
