#include "doctest.h"

#include "otcut/errors.hpp"
#include "otcut/oracles.hpp"
#include "otcut/tabular.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

using namespace otcut;

TEST_CASE("discrete 1D transport pairs order statistics") {
    auto pairing = oracle::discrete_ot_1d({3, 1, 4, 2}, {8, 2, 6, 4});
    REQUIRE(pairing.size() == 4);
    CHECK(pairing[0] == std::pair<double, double>{1, 2});
    CHECK(pairing[1] == std::pair<double, double>{2, 4});
    CHECK(pairing[2] == std::pair<double, double>{3, 6});
    CHECK(pairing[3] == std::pair<double, double>{4, 8});

    auto ident = oracle::discrete_ot_1d({5, 1, 3}, {1, 3, 5});
    for (const auto& [a, b] : ident)
        CHECK(a == b);

    CHECK_THROWS_AS(oracle::discrete_ot_1d({1, 2}, {1, 2, 3}), LengthMismatch);
}

TEST_CASE("discrete pairing of uniform vs exponential quantiles tracks -ln(1-s)") {
    const int N = 10000;
    std::vector<double> us(N), es(N);
    for (int i = 0; i < N; i++) {
        const double s = (i + 0.5) / N;
        us[i] = s;
        es[i] = -std::log1p(-s);
    }
    auto pairing = oracle::discrete_ot_1d(us, es);
    double sup = 0.0;
    for (const auto& [u, e] : pairing)
        sup = std::max(sup, std::fabs(e - (-std::log1p(-u))));
    CHECK(sup <= 2.0 / N);
}

TEST_CASE("exact 1D W1 on closed-form pairs") {
    auto F = [](double t) { return t < 0 ? 0.0 : (t > 1 ? 1.0 : t); };
    CHECK(oracle::w1_exact_1d(F, F, -1, 2) == doctest::Approx(0.0));

    auto G = [](double t) { return t < 1 ? 0.0 : (t > 2 ? 1.0 : t - 1.0); };
    CHECK(oracle::w1_exact_1d(F, G, -1, 3) == doctest::Approx(1.0).epsilon(1e-9));

    // Exp(1) against its cutoff at R = 2
    auto E = [](double t) { return t < 0 ? 0.0 : 1.0 - std::exp(-t); };
    auto ER = [](double t) {
        if (t < 0) return 0.0;
        if (t >= 2) return 1.0;
        return (1.0 - std::exp(-t)) / (1.0 - std::exp(-2.0));
    };
    const double e2 = std::exp(-2.0);
    const double closed = e2 * (1.0 + e2) / (1.0 - e2) + e2;
    CHECK(oracle::w1_exact_1d(E, ER, 0, 60) == doctest::Approx(closed).epsilon(1e-8));
}

TEST_CASE("finite-difference gradient check") {
    auto f = [](const std::vector<double>& x) {
        return 0.5 * (x[0] * x[0] + x[1] * x[1]);
    };
    auto rep = oracle::fd_gradient_check(f, {1.0, 1.0}, 1e-5, {1.0, 1.0});
    CHECK(rep.max_deviation <= 1e-9);
    REQUIRE(rep.fd_gradient.size() == 2);
    CHECK(rep.fd_gradient[0] == doctest::Approx(1.0).epsilon(1e-9));

    auto c = [](const std::vector<double>&) { return 7.0; };
    CHECK(oracle::fd_gradient_check(c, {0.3, -0.2}, 1e-5, {0.0, 0.0}).max_deviation <=
          1e-10);
}

TEST_CASE("manufactured cases are internally consistent") {
    for (const char* name : {"identity", "affine_diag(2,0.5)", "quartic_bump"}) {
        CAPTURE(name);
        oracle::ManufacturedCase c = oracle::make_manufactured(name);
        auto [m0, m1] = c.mass_consistency();
        CHECK(std::fabs(m0 - m1) <= 1e-6);

        // gradient and Hessian data agree with finite differences at probe points
        for (double px : {0.3, 0.7}) {
            for (double py : {0.4, 0.6}) {
                const double x = c.domain[0] + px * (c.domain[2] - c.domain[0]);
                const double y = c.domain[1] + py * (c.domain[3] - c.domain[1]);
                auto g = c.grad_u(x, y);
                auto rep = oracle::fd_gradient_check(
                    [&](const std::vector<double>& p) { return c.u_star(p[0], p[1]); },
                    {x, y}, 1e-5, {g[0], g[1]});
                CHECK(rep.max_deviation <= 1e-7);
                // f0 = f1(grad u*) det D^2 u* by construction
                CHECK(c.f0(x, y) ==
                      doctest::Approx(c.f1(g[0], g[1]) * c.det_hessian(x, y))
                          .epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(oracle::make_manufactured("cubic_ramp"), UnknownCase);
}

TEST_CASE("identity case is the quadratic with unit data") {
    oracle::ManufacturedCase c = oracle::make_manufactured("identity");
    CHECK(c.u_star(0.3, 0.8) == doctest::Approx(0.5 * (0.09 + 0.64)));
    CHECK(c.det_hessian(0.5, 0.5) == doctest::Approx(1.0));
    auto g = c.grad_u(0.25, 0.75);
    CHECK(g[0] == doctest::Approx(0.25));
    CHECK(g[1] == doctest::Approx(0.75));
}

TEST_CASE("affine_diag scales the image rectangle by its diagonal") {
    oracle::ManufacturedCase c = oracle::make_manufactured("affine_diag(2,0.5)");
    CHECK(c.det_hessian(0.1, 0.9) == doctest::Approx(1.0)); // 2 * 0.5
    auto g = c.grad_u(1.0, 1.0);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(0.5));
    CHECK(c.image[2] == doctest::Approx(2.0 * c.domain[2]));
    CHECK(c.image[3] == doctest::Approx(0.5 * c.domain[3]));
}

TEST_CASE("fixtures: written, manifested, and matching their closed forms") {
    oracle::write_fixtures("fixtures");

    Table manifest = read_csv("fixtures/manifest.csv");
    REQUIRE(manifest.columns ==
            std::vector<std::string>{"file", "generator", "seed", "tolerance"});
    std::map<std::string, double> tol;
    for (const auto& row : manifest.rows) {
        CHECK_FALSE(row[1].empty()); // every fixture names its generator
        tol[row[0]] = std::stod(row[3]);
    }
    REQUIRE(tol.count("quantile_pairs.csv"));
    REQUIRE(tol.count("radial_worked.csv"));
    REQUIRE(tol.count("rate_worked.csv"));
    REQUIRE(tol.count("envelope_worked.csv"));

    Table qp = read_csv("fixtures/quantile_pairs.csv");
    REQUIRE(qp.rows.size() == 10000);
    // spot-check the closed-form quantiles at the median row
    const auto& mid = qp.rows[4999];
    const double s = std::stod(mid[1]);
    CHECK(s == doctest::Approx((5000.0 - 0.5) / 10000.0));
    CHECK(std::stod(mid[2]) == doctest::Approx(std::sqrt(-2.0 * std::log1p(-s))));
    CHECK(std::stod(mid[3]) == doctest::Approx(std::sqrt(s)));

    // worked radial values against independent recomputation here
    std::map<std::string, double> rw;
    for (const auto& row : read_csv("fixtures/radial_worked.csv").rows)
        rw[row[0]] = std::stod(row[1]);
    const double e_half = std::exp(-0.5), e_two = std::exp(-2.0);
    CHECK(rw.at("s_gauss_disk_at_1") ==
          doctest::Approx(std::sqrt(1.0 - e_half)).epsilon(1e-12));
    CHECK(rw.at("s_gauss_disk_cut2_at_1") ==
          doctest::Approx(std::sqrt((1.0 - e_half) / (1.0 - e_two))).epsilon(1e-12));
    CHECK(rw.at("t_unif_exp_at_half") == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(rw.at("w2_line_translation") == doctest::Approx(1.0));

    // frozen rate-bound constants: these digits are the regression anchor for
    // the map bound chain (value also asserted downstream in test_rate_bounds)
    std::map<std::string, double> rb;
    for (const auto& row : read_csv("fixtures/rate_worked.csv").rows)
        rb[row[0]] = std::stod(row[1]);
    CHECK(rb.at("map_bound_R2") ==
          doctest::Approx(0.21575237624090854).epsilon(1e-13));
    CHECK(rb.at("map_c_gauss_disk") ==
          doctest::Approx(1.0 / std::sqrt(1.0 - e_half)).epsilon(1e-13));
    CHECK(rb.at("r0_gauss2") ==
          doctest::Approx(std::sqrt(2.0 * std::log(2.0))).epsilon(1e-13));
    CHECK(rb.at("dm_map_exponent_p5_n2") == doctest::Approx(5.0 / 62.0).epsilon(1e-15));
    CHECK(rb.at("dm_potential_exponent") == 0.5);

    // frozen envelope constants
    std::map<std::string, double> ev;
    for (const auto& row : read_csv("fixtures/envelope_worked.csv").rows)
        ev[row[0]] = std::stod(row[1]);
    CHECK(ev.at("beta_n2_alpha_half") == doctest::Approx(M_PI / 7.5).epsilon(1e-13));
    CHECK(ev.at("envelope_bound_h_0p01") ==
          doctest::Approx(0.47378605958693043).epsilon(1e-13));
    CHECK(ev.at("exponent_alpha_half_n2") == doctest::Approx(0.2).epsilon(1e-15));
}
