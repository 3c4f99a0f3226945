#include "doctest.h"

#include "otcut/errors.hpp"
#include "otcut/radial_ot.hpp"
#include "otcut/rate_bounds.hpp"
#include "otcut/tabular.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

using namespace otcut;

namespace {

std::map<std::string, double> worked(const std::string& file) {
    std::map<std::string, double> out;
    for (const auto& row : read_csv(file).rows)
        out[row[0]] = std::stod(row[1]);
    return out;
}

} // namespace

TEST_CASE("monotone rearrangement on closed-form 1D pairs") {
    auto unif = RadialDensity::uniform_ball(1);
    auto expo = RadialDensity::exponential_radial(1);
    auto T = monotone_rearrangement_1d(cumulative_profile(unif), cumulative_profile(expo));
    CHECK(T(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    CHECK(T(0.5) == doctest::Approx(worked("fixtures/radial_worked.csv")
                                        .at("t_unif_exp_at_half"))
                        .epsilon(1e-8));

    auto I = monotone_rearrangement_1d(cumulative_profile(unif), cumulative_profile(unif));
    for (double r : {0.1, 0.35, 0.5, 0.8, 0.99})
        CHECK(I(r) == doctest::Approx(r).epsilon(1e-8));

    // shifting the support by one unit shifts the rearrangement by one unit
    auto shifted = RadialDensity::from_line_density(
        [](double t) { return (t >= 1.0 && t <= 2.0) ? 1.0 : 0.0; }, 2.0, "unit_shift");
    auto Tp = monotone_rearrangement_1d(cumulative_profile(unif), cumulative_profile(shifted));
    for (double r : {0.2, 0.5, 0.8})
        CHECK(Tp(r) == doctest::Approx(r + 1.0).epsilon(1e-6));
}

TEST_CASE("radial map hits the worked Gaussian-to-disk values") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    auto rw = worked("fixtures/radial_worked.csv");

    RadialMap S = radial_map(disk, gauss, MapDirection::nu_to_mu);
    CHECK(S.scalar(1.0) == doctest::Approx(rw.at("s_gauss_disk_at_1")).epsilon(1e-9));
    CHECK(S.scalar(0.0) == 0.0);

    // the swapped construction transports the same pair the same way
    RadialMap S2 = radial_map(gauss, disk, MapDirection::mu_to_nu);
    for (double r : {0.3, 1.0, 1.7})
        CHECK(S2.scalar(r) == doctest::Approx(S.scalar(r)).epsilon(1e-12));

    auto cut2 = cutoff(gauss, CutoffShape::ball, 2.0).renormalized_radial();
    RadialMap Sc = radial_map(disk, cut2, MapDirection::nu_to_mu);
    CHECK(Sc.scalar(1.0) ==
          doctest::Approx(rw.at("s_gauss_disk_cut2_at_1")).epsilon(1e-9));

    CHECK_THROWS_AS(radial_map(RadialDensity::uniform_ball(2), RadialDensity::gaussian(3),
                               MapDirection::nu_to_mu),
                    DimensionMismatch);
}

TEST_CASE("radial map agrees with the closed-form quantile fixture") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    RadialMap S = radial_map(disk, gauss, MapDirection::nu_to_mu);

    Table qp = read_csv("fixtures/quantile_pairs.csv");
    Table manifest = read_csv("fixtures/manifest.csv");
    double tol = 0.0;
    for (const auto& row : manifest.rows)
        if (row[0] == "quantile_pairs.csv")
            tol = std::stod(row[3]);
    REQUIRE(tol > 0.0);

    double sup = 0.0;
    for (const auto& row : qp.rows) {
        const double r = std::stod(row[2]);
        const double y = std::stod(row[3]);
        sup = std::max(sup, std::fabs(S.scalar(r) - y));
    }
    CHECK(sup <= tol + 1e-10);
}

TEST_CASE("radial map is nondecreasing and lands in the target support") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    RadialMap S = radial_map(disk, gauss, MapDirection::nu_to_mu);

    double prev = 0.0;
    for (int i = 1; i <= 300; i++) {
        const double r = 6.0 * i / 300.0;
        const double s = S.scalar(r);
        CHECK(s >= prev - 1e-12);
        CHECK(s <= 1.0 + 1e-9);
        prev = s;
    }

    // ambient evaluation scales the direction and fixes the origin
    std::vector<double> x = {0.6, -0.8};
    auto y = S(x);
    REQUIRE(y.size() == 2);
    const double s1 = S.scalar(1.0);
    CHECK(y[0] == doctest::Approx(0.6 * s1).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-0.8 * s1).epsilon(1e-12));
    auto origin = S(std::vector<double>{0.0, 0.0});
    CHECK(origin[0] == 0.0);
    CHECK(origin[1] == 0.0);
}

TEST_CASE("cutoff maps decrease to the uncut map as R grows") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    RadialMap S = radial_map(disk, gauss, MapDirection::nu_to_mu);
    const double base = S.scalar(0.8);

    double prev = std::numeric_limits<double>::infinity();
    for (double R : {1.0, 2.0, 3.0, 4.0}) {
        auto cut = cutoff(gauss, CutoffShape::ball, R).renormalized_radial();
        const double sr = radial_map(disk, cut, MapDirection::nu_to_mu).scalar(0.8);
        CHECK(sr >= base - 1e-12);
        CHECK(sr < prev);
        prev = sr;
    }
    CHECK(prev - base <= 1e-4); // R = 4 is already close at this radius
}

TEST_CASE("map onto an unbounded target diverges at the source boundary") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    RadialMap S = radial_map(disk, gauss, MapDirection::mu_to_nu);
    CHECK(std::isinf(S.scalar(1.0)));
    CHECK(std::isfinite(S.scalar(0.999)));
}

TEST_CASE("radial potential of the quadratic cost") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    auto rw = worked("fixtures/radial_worked.csv");

    RadialPotential phi = radial_potential(builtin_cost("quadratic"),
                                           radial_map(disk, gauss, MapDirection::nu_to_mu));
    CHECK(phi.radial(0.0) == doctest::Approx(0.0));
    CHECK(phi.radial(1.0) == doctest::Approx(rw.at("phi_gauss_disk_at_1")).epsilon(1e-8));
    CHECK(phi.constant() == 0.0);

    // ambient value only depends on the norm
    std::vector<double> a = {1.0, 0.0}, b = {0.6, 0.8};
    CHECK(phi(a) == doctest::Approx(phi(b)).epsilon(1e-12));

    // identity map has zero potential everywhere
    RadialPotential zero = radial_potential(builtin_cost("quadratic"),
                                            radial_map(disk, disk, MapDirection::nu_to_mu));
    for (double r : {0.2, 0.5, 0.9})
        CHECK(zero.radial(r) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("W2 on closed-form pairs") {
    auto disk = RadialDensity::uniform_ball(2);
    CHECK(w2_radial(disk, disk) == doctest::Approx(0.0).epsilon(1e-7));

    auto unif = RadialDensity::uniform_ball(1);
    auto shifted = RadialDensity::from_line_density(
        [](double t) { return (t >= 1.0 && t <= 2.0) ? 1.0 : 0.0; }, 2.0, "unit_shift");
    CHECK(w2_radial(unif, shifted) ==
          doctest::Approx(worked("fixtures/radial_worked.csv").at("w2_line_translation"))
              .epsilon(1e-6));
}

TEST_CASE("W2 against cutoffs converges monotonically to the uncut distance") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    const double limit = w2_radial(disk, gauss);
    CHECK(limit > 0.7); // sanity: the pair is genuinely apart

    double prev_gap = std::numeric_limits<double>::infinity();
    for (double R : {1.0, 2.0, 3.0, 4.0}) {
        auto cut = cutoff(gauss, CutoffShape::ball, R).renormalized_radial();
        const double gap = std::fabs(w2_radial(disk, cut) - limit);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }

    auto cut6 = cutoff(gauss, CutoffShape::ball, 6.0).renormalized_radial();
    CHECK(std::fabs(w2_radial(disk, cut6) - limit) <= 1e-6);
}

TEST_CASE("exact radial W1 against the exponential cutoff closed form") {
    auto expo = RadialDensity::exponential_radial(1);
    CHECK(w1_exact_radial(expo, expo) == doctest::Approx(0.0).epsilon(1e-9));

    auto cut2 = cutoff(expo, CutoffShape::ball, 2.0).renormalized_radial();
    const double w1 = w1_exact_radial(expo, cut2);
    CHECK(w1 == doctest::Approx(worked("fixtures/radial_worked.csv").at("w1_exp_cut2"))
                    .epsilon(1e-7));

    // the coupling bound dominates the exact distance
    CHECK(w1 <= w1_cutoff_bound(expo, CutoffShape::ball, 2.0) + 1e-9);

    auto gauss = RadialDensity::gaussian(2);
    auto gcut = cutoff(gauss, CutoffShape::ball, 2.0).renormalized_radial();
    CHECK(w1_exact_radial(gauss, gcut) <=
          w1_cutoff_bound(gauss, CutoffShape::ball, 2.0) + 1e-9);
}
