#include "branchode/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace branchode;

TEST_CASE("integrate polynomials exactly") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(integrate([](double) { return 1.0; }, -2.0, 5.0) == doctest::Approx(7.0));
    CHECK(integrate([](double x) { return x; }, 3.0, 3.0) == 0.0);
}

TEST_CASE("integrate transcendental integrands") {
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 30.0) ==
          doctest::Approx(1.0).epsilon(1e-11));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, 3.141592653589793) ==
          doctest::Approx(2.0).epsilon(1e-11));
    // reversed orientation flips the sign
    CHECK(integrate([](double x) { return std::sin(x); }, 3.141592653589793, 0.0) ==
          doctest::Approx(-2.0).epsilon(1e-11));
}

TEST_CASE("integrate handles a mildly singular-looking integrand") {
    // integrand of the gamma(1/2) tail shifted off zero
    const double v = integrate([](double x) { return std::exp(-x) / std::sqrt(x); }, 0.25, 40.0);
    CHECK(v == doctest::Approx(std::sqrt(3.141592653589793) * std::erfc(0.5)).epsilon(1e-10));
}

TEST_CASE("bisect finds simple roots") {
    CHECK(bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    CHECK(bisect([](double x) { return std::cos(x); }, 0.0, 2.0) ==
          doctest::Approx(1.5707963267948966).epsilon(1e-13));
    // works when f is decreasing over the bracket
    CHECK(bisect([](double x) { return 1.0 - x; }, 0.0, 5.0) == doctest::Approx(1.0));
}
