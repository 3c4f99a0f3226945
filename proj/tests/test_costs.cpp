#include "doctest.h"

#include "otcut/costs.hpp"
#include "otcut/errors.hpp"

#include <cmath>

using namespace otcut;

TEST_CASE("builtin costs evaluate their closed forms") {
    CostFunction q = builtin_cost("quadratic");
    CHECK(q.h(2.0) == doctest::Approx(2.0));
    CHECK(q.h(0.0) == 0.0);
    CHECK(q.h_prime(3.0) == doctest::Approx(3.0));
    REQUIRE(q.growth().has_value());
    // M = 2 is the smallest constant with |h'(r)| = r <= (M/2) r
    CHECK(q.growth()->M == doctest::Approx(2.0));
    CHECK(q.growth()->k == 1);
    CHECK(q.growth_envelope(3.0) == doctest::Approx(3.0));

    CostFunction p4 = builtin_cost("power_4");
    CHECK(p4.h(2.0) == doctest::Approx(4.0));
    // growth equality case: |h'(3)| = 27 = (M/2^k) 3^{2^k-1} with M = 4, k = 2
    REQUIRE(p4.growth().has_value());
    CHECK(std::fabs(p4.h_prime(3.0)) == doctest::Approx(27.0));
    CHECK(p4.growth_envelope(3.0) == doctest::Approx(27.0));

    CostFunction ch = builtin_cost("cosh_minus_one");
    CHECK(ch.h(1.0) == doctest::Approx(std::cosh(1.0) - 1.0));
    CHECK_FALSE(ch.growth().has_value()); // no polynomial growth certificate

    CHECK(builtin_cost("power_2").h(2.0) == doctest::Approx(2.0)); // alias
    CHECK_THROWS_AS(builtin_cost("cubic"), UnknownCost);
}

TEST_CASE("cost hypotheses hold on a log grid for every builtin") {
    for (const char* name : {"quadratic", "power_4", "cosh_minus_one"}) {
        CAPTURE(name);
        CostFunction c = builtin_cost(name);
        CHECK(c.h(0.0) == 0.0);
        double prev_r = 0.0, prev_h = 0.0;
        for (int i = 0; i <= 1000; i++) {
            // log grid over (0, 100]; cosh overflows past ~700 anyway
            const double r = 100.0 * std::pow(10.0, -3.0 * (1.0 - i / 1000.0));
            const double hv = c.h(r);
            CHECK(hv > prev_h); // strictly increasing
            // midpoint strict convexity against the previous sample
            if (prev_r > 0.0) {
                const double mid = 0.5 * (prev_r + r);
                CHECK(c.h(mid) < 0.5 * (prev_h + hv) + 1e-15);
            }
            if (c.growth())
                CHECK(std::fabs(c.h_prime(r)) <= c.growth_envelope(r) * (1.0 + 1e-12));
            prev_r = r;
            prev_h = hv;
        }
    }
}

TEST_CASE("construction validates the hypotheses") {
    // h(0) != 0
    CHECK_THROWS_AS(CostFunction("shifted", [](double t) { return t * t + 1.0; },
                                 [](double t) { return 2.0 * t; }),
                    HypothesisViolated);
    // concave h
    CHECK_THROWS_AS(CostFunction("sqrt", [](double t) { return std::sqrt(t); },
                                 [](double t) { return 0.5 / std::sqrt(t); }),
                    HypothesisViolated);
    // overstated growth certificate: claims |h'| <= (1/2) r but h' = 2r
    CHECK_THROWS_AS(CostFunction("fast", [](double t) { return t * t; },
                                 [](double t) { return 2.0 * t; }, GrowthData{1.0, 1}),
                    HypothesisViolated);
    // a valid custom cost with a bounded-derivative certificate (k = 0)
    CostFunction flat("pseudo_huber", [](double t) { return std::sqrt(1.0 + t * t) - 1.0; },
                      [](double t) { return t / std::sqrt(1.0 + t * t); },
                      GrowthData{1.0, 0});
    CHECK(flat.growth_envelope(7.0) == doctest::Approx(1.0)); // (M/2^0) r^0
}
