#include "doctest.h"

#include "otcut/errors.hpp"
#include "otcut/quadrature.hpp"

#include <cmath>
#include <limits>

using namespace otcut;

TEST_CASE("integrate matches closed-form antiderivatives") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-12));
    // degenerate interval
    CHECK(integrate([](double x) { return x; }, 2.0, 2.0) == 0.0);
    // orientation-free inputs are not part of the contract; a < b throughout
    CHECK(integrate([](double) { return 1.0; }, -1.0, 3.0) == doctest::Approx(4.0));
}

TEST_CASE("integrate rejects non-finite integrands") {
    CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, -1.0, 1.0),
                    DivergentIntegral);
    CHECK_THROWS_AS(
        integrate([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0.0,
                  1.0),
        DivergentIntegral);
}

TEST_CASE("integrate_to_infinity handles decaying tails") {
    CHECK(integrate_to_infinity([](double r) { return std::exp(-r); }, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
    // Rayleigh integrand: int_0^inf r e^{-r^2/2} dr = 1
    CHECK(integrate_to_infinity([](double r) { return r * std::exp(-0.5 * r * r); },
                                0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(integrate_to_infinity(
              [](double r) { return 1.0 / ((1.0 + r) * (1.0 + r)); }, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
    // shifted start: int_2^inf e^{-r} dr = e^{-2}
    CHECK(integrate_to_infinity([](double r) { return std::exp(-r); }, 2.0) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
}

TEST_CASE("integrate_to_infinity flags divergence") {
    CHECK_THROWS_AS(
        integrate_to_infinity([](double r) { return 1.0 / (1.0 + r); }, 0.0),
        DivergentIntegral);
}

TEST_CASE("integrate_2d on separable and radial integrands") {
    CHECK(integrate_2d([](double x, double y) { return x * y; }, 0, 1, 0, 1) ==
          doctest::Approx(0.25).epsilon(1e-9));
    // standard planar Gaussian over [-6,6]^2 captures all but ~e^{-18} of the mass
    const double g = integrate_2d(
        [](double x, double y) { return std::exp(-0.5 * (x * x + y * y)); }, -6, 6, -6,
        6, 1e-10);
    CHECK(g == doctest::Approx(2.0 * M_PI).epsilon(1e-7));
}
