#include "doctest.h"

#include "otcut/errors.hpp"
#include "otcut/radial_ot.hpp"
#include "otcut/rate_bounds.hpp"
#include "otcut/tabular.hpp"

#include <cmath>
#include <map>
#include <string>

using namespace otcut;

namespace {

std::map<std::string, double> worked(const std::string& file) {
    std::map<std::string, double> out;
    for (const auto& row : read_csv(file).rows)
        out[row[0]] = std::stod(row[1]);
    return out;
}

const auto& rate_fixture() {
    static const std::map<std::string, double> rw = worked("fixtures/rate_worked.csv");
    return rw;
}

} // namespace

TEST_CASE("validity threshold r_zero on the planar Gaussian") {
    auto F = cumulative_profile(RadialDensity::gaussian(2));
    CHECK(r_zero(F) == doctest::Approx(rate_fixture().at("r0_gauss2")).epsilon(1e-8));
    CHECK(r_zero(cumulative_profile(RadialDensity::uniform_ball(2))) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));
}

TEST_CASE("map error bound: worked constants, dominance, validity gate") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    RateBound b = map_error_bound_inverse(disk, gauss, 1.0);
    const auto& rw = rate_fixture();

    CHECK(b.name == "map_error_inverse");
    CHECK(b.constants.at("C") == doctest::Approx(rw.at("map_c_gauss_disk")).epsilon(1e-8));
    CHECK(b.constants.at("p_x") ==
          doctest::Approx(worked("fixtures/radial_worked.csv").at("s_gauss_disk_at_1"))
              .epsilon(1e-8));
    CHECK(b.constants.at("C") ==
          doctest::Approx(2.0 / (b.constants.at("m") * unit_sphere_area(2) *
                                 b.constants.at("p_x")))
              .epsilon(1e-12));
    CHECK(b.value(2.0) == doctest::Approx(rw.at("map_bound_R2")).epsilon(1e-8));

    // the bound dominates the measured gap at its own evaluation point
    RadialMap S = radial_map(disk, gauss, MapDirection::nu_to_mu);
    auto cut2 = cutoff(gauss, CutoffShape::ball, 2.0).renormalized_radial();
    RadialMap S2 = radial_map(disk, cut2, MapDirection::nu_to_mu);
    const double measured = std::fabs(S2.scalar(1.0) - S.scalar(1.0));
    CHECK(measured == doctest::Approx(rw.at("map_gap_at_1_R2")).epsilon(1e-7));
    CHECK(measured <= b.value(2.0));

    CHECK(b.r_min == doctest::Approx(rw.at("r0_gauss2")).epsilon(1e-8));
    CHECK(b.valid_at(2.0));
    CHECK_FALSE(b.valid_at(1.0));

    // nonincreasing in R across the validity range
    double prev = b.value(b.r_min);
    for (double R = b.r_min + 0.25; R <= 6.0; R += 0.25) {
        CHECK(b.value(R) <= prev + 1e-12);
        prev = b.value(R);
    }

    // a target with unbounded support admits no profile lower bound
    CHECK_THROWS_AS(map_error_bound_inverse(gauss, disk, 0.5), NotBoundedBelow);
}

TEST_CASE("preimage error bound: worked constants and dominance") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    const auto& rw = rate_fixture();

    RateBound b = preimage_error_bound(disk, gauss, 0.5);
    CHECK(b.name == "preimage_error");
    CHECK(b.constants.at("q_y") ==
          doctest::Approx(rw.at("preimage_q_half_gauss_disk")).epsilon(1e-8));
    CHECK(b.constants.at("C") ==
          doctest::Approx(rw.at("preimage_c_gauss_disk")).epsilon(1e-8));
    CHECK(b.value(2.0) == doctest::Approx(rw.at("preimage_bound_R2")).epsilon(1e-8));

    // measured preimage gap at |y| = 1/2 under the R = 2 cutoff
    RadialMap Q = radial_map(gauss, disk, MapDirection::nu_to_mu);
    auto cut2 = cutoff(gauss, CutoffShape::ball, 2.0).renormalized_radial();
    RadialMap Q2 = radial_map(cut2, disk, MapDirection::nu_to_mu);
    const double measured = std::fabs(Q.scalar(0.5) - Q2.scalar(0.5));
    CHECK(measured == doctest::Approx(rw.at("preimage_gap_at_half_R2")).epsilon(1e-6));
    CHECK(measured <= b.value(2.0));

    // the modulus variant coincides on a constant-profile target
    RateBound bm = preimage_error_bound_modulus(disk, gauss, 0.5);
    CHECK(bm.name == "preimage_error_modulus");
    for (double R : {1.5, 2.0, 3.0, 4.0})
        CHECK(bm.value(R) == doctest::Approx(b.value(R)).epsilon(1e-6));

    // the bound degenerates with the evaluation point, not silently
    CHECK_THROWS_AS(preimage_error_bound(disk, gauss, 1.0), BoundaryPoint);
    CHECK_THROWS_AS(preimage_error_bound(disk, gauss, 1.5), BoundaryPoint);
    CHECK_THROWS_AS(preimage_error_bound(disk, gauss, 0.0), OutOfRange);
    CHECK_THROWS_AS(preimage_error_bound(disk, gauss, -0.5), OutOfRange);
}

TEST_CASE("potential error bound: worked value, growth gating, eps role") {
    auto disk = RadialDensity::uniform_ball(2);
    auto gauss = RadialDensity::gaussian(2);
    const auto& rw = rate_fixture();

    RateBound b =
        potential_error_bound_inverse(builtin_cost("quadratic"), disk, gauss, 1.0, 0.05);
    CHECK(b.name == "potential_error_inverse");
    CHECK(b.constants.at("M") == doctest::Approx(2.0));
    CHECK(b.constants.at("k") == doctest::Approx(1.0));
    CHECK(b.constants.at("gamma") == doctest::Approx(2.05).epsilon(1e-10));
    CHECK(b.value(2.0) ==
          doctest::Approx(rw.at("potential_bound_R2_eps0p05")).epsilon(1e-8));
    CHECK(b.r_min >= rw.at("r0_gauss2") - 1e-9);

    // measured potential gap at |x| = 1 under the R = 2 cutoff
    auto cost = builtin_cost("quadratic");
    RadialPotential phi =
        radial_potential(cost, radial_map(disk, gauss, MapDirection::nu_to_mu));
    auto cut2 = cutoff(gauss, CutoffShape::ball, 2.0).renormalized_radial();
    RadialPotential phi2 =
        radial_potential(cost, radial_map(disk, cut2, MapDirection::nu_to_mu));
    CHECK(b.valid_at(2.05)); // the measured gap drops below eps just before R = 2
    if (b.valid_at(2.0))
        CHECK(std::fabs(phi.radial(1.0) - phi2.radial(1.0)) <= b.value(2.0));

    // a growth certificate with k = 0 removes the gamma factor, so the value is
    // independent of eps (the validity threshold may still move)
    CostFunction huber("pseudo_huber", [](double t) { return std::sqrt(1.0 + t * t) - 1.0; },
                       [](double t) { return t / std::sqrt(1.0 + t * t); },
                       GrowthData{1.0, 0});
    RateBound h1 = potential_error_bound_inverse(huber, disk, gauss, 1.0, 0.05);
    RateBound h2 = potential_error_bound_inverse(huber, disk, gauss, 1.0, 0.5);
    CHECK(h1.value(3.0) == doctest::Approx(h2.value(3.0)).epsilon(1e-12));

    // no growth certificate, no bound
    CHECK_THROWS_AS(potential_error_bound_inverse(builtin_cost("cosh_minus_one"), disk,
                                                  gauss, 1.0, 0.05),
                    HypothesisViolated);
    // unbounded target support is rejected before any scanning
    CHECK_THROWS_AS(potential_error_bound_inverse(cost, gauss, disk, 1.0, 0.05),
                    HypothesisViolated);
}

TEST_CASE("moment tail bound dominates the exact Gaussian tail") {
    auto gauss = RadialDensity::gaussian(2);
    auto F = cumulative_profile(gauss);
    const auto& rw = rate_fixture();
    CHECK(tail_bound_moment(gauss, 2, 2.0) ==
          doctest::Approx(rw.at("tail_moment_bound_p2_R2")).epsilon(1e-8));

    for (double R : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) {
        const double exact = tail_mass(F, R);
        CHECK(exact <= tail_bound_moment(gauss, 2, R) + 1e-12);
    }
    CHECK(tail_mass(F, 2.0) == doctest::Approx(rw.at("tail_exact_gauss2_R2")).epsilon(1e-8));

    // the bound scales exactly like R^{-p}
    CHECK(tail_bound_moment(gauss, 2, 20.0) * 4.0 ==
          doctest::Approx(tail_bound_moment(gauss, 2, 10.0)).epsilon(1e-12));

    CHECK_THROWS_AS(tail_bound_moment(RadialDensity::pareto_tail(2, 3), 3, 2.0),
                    InfiniteMoment);
    CHECK_THROWS_AS(tail_bound_moment(gauss, 2, 0.0), OutOfRange);
    CHECK_THROWS_AS(tail_bound_moment(gauss, 2, -1.0), OutOfRange);
}

TEST_CASE("log-concave tail bound: worked constant, dominance, anchors") {
    auto lc = LogConcaveDensity::gaussian(2);
    auto F = cumulative_profile(lc.as_radial());
    const auto& rw = rate_fixture();

    RadialAnchor anchor = lc.tangent_anchor(1.0);
    CHECK(anchor.y == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tail_bound_logconcave(lc, anchor, 2.0) ==
          doctest::Approx(rw.at("tail_lc_bound_R2")).epsilon(1e-8));
    CHECK(rw.at("tail_lc_bound_R2") ==
          doctest::Approx(2.0 * M_PI * rw.at("tail_lc_c_gauss2") * 2.0 * std::exp(-2.0))
              .epsilon(1e-10));

    for (double R : {1.0, 2.0, 3.0, 4.0, 5.0})
        CHECK(tail_mass(F, R) <= tail_bound_logconcave(lc, anchor, R) + 1e-12);

    // the exact tail beats the bound by an ever-growing factor
    CHECK(tail_mass(F, 4.0) / tail_bound_logconcave(lc, anchor, 4.0) < 0.1);

    // a tuned anchor can only tighten the default one at its target radius
    RadialAnchor tuned = best_radial_anchor(lc, 4.0);
    CHECK(tail_bound_logconcave(lc, tuned, 4.0) <=
          tail_bound_logconcave(lc, anchor, 4.0) + 1e-12);
    CHECK(tail_mass(F, 4.0) <= tail_bound_logconcave(lc, tuned, 4.0) + 1e-12);

    CHECK_THROWS_AS(tail_bound_logconcave(lc, RadialAnchor{1.0, -1.0}, 2.0), BadAnchor);
    CHECK_THROWS_AS(tail_bound_logconcave(lc, anchor, 0.5), OutOfRange);
}

TEST_CASE("W1 cutoff bound: worked exponential value and decay") {
    auto expo = RadialDensity::exponential_radial(1);
    const auto& rw = rate_fixture();
    CHECK(w1_cutoff_bound(expo, CutoffShape::ball, 2.0) ==
          doctest::Approx(rw.at("w1_cut_bound_exp1_R2")).epsilon(1e-8));

    auto gauss = RadialDensity::gaussian(2);
    double prev = w1_cutoff_bound(gauss, CutoffShape::ball, 1.0);
    for (double R : {2.0, 3.0, 4.0, 5.0, 6.0}) {
        const double v = w1_cutoff_bound(gauss, CutoffShape::ball, R);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev <= 1e-6); // R = 6 tail of the planar Gaussian

    // cube variant: defined, positive, and also decaying
    const double c2 = w1_cutoff_bound(gauss, CutoffShape::cube, 2.0);
    const double c4 = w1_cutoff_bound(gauss, CutoffShape::cube, 4.0);
    CHECK(c2 > 0.0);
    CHECK(c4 < c2);

    // p = 1 has no first moment, so the coupling bound cannot exist
    CHECK_THROWS_AS(w1_cutoff_bound(RadialDensity::pareto_tail(2, 1), CutoffShape::ball, 2.0),
                    DivergentIntegral);
}

TEST_CASE("W1 moment bound: worked value and hypothesis gates") {
    auto gauss = RadialDensity::gaussian(2);
    const auto& rw = rate_fixture();
    CHECK(w1_moment_bound(gauss, 2, 2.0) ==
          doctest::Approx(rw.at("w1_moment_bound_p2_R2")).epsilon(1e-8));
    CHECK(w1_moment_bound(gauss, 2, 1.0) == doctest::Approx(4.0).epsilon(1e-8));

    CHECK_THROWS_AS(w1_moment_bound(gauss, 1, 2.0), OutOfRange);
    CHECK_THROWS_AS(w1_moment_bound(RadialDensity::pareto_tail(2, 3), 3, 2.0),
                    InfiniteMoment);
}

TEST_CASE("W1 log-concave bound: worked constants and the full chain") {
    auto lc = LogConcaveDensity::gaussian(2);
    auto gauss = RadialDensity::gaussian(2);
    const auto& rw = rate_fixture();

    GlobalAnchor ga = lc.tangent_global_anchor(1.0);
    CHECK(ga.a == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ga.b == doctest::Approx(rw.at("w1_lc_anchor_b_gauss2")).epsilon(1e-8));
    CHECK(w1_logconcave_bound(lc, ga, 2.0) ==
          doctest::Approx(rw.at("w1_lc_bound_gauss2_R2")).epsilon(1e-8));
    CHECK(rw.at("w1_lc_bound_gauss2_R2") ==
          doctest::Approx(rw.at("w1_lc_factor_n2_a1") * std::exp(0.5) * 4.0 *
                          std::exp(-2.0))
              .epsilon(1e-10));

    // exact W1 <= coupling bound <= log-concave bound, for every R in the scan
    for (double R : {1.0, 2.0, 3.0, 4.0, 5.0}) {
        auto cut = cutoff(gauss, CutoffShape::ball, R).renormalized_radial();
        const double exact = w1_exact_radial(gauss, cut);
        const double coupling = w1_cutoff_bound(gauss, CutoffShape::ball, R);
        const double lc_val = w1_logconcave_bound(lc, ga, R);
        CHECK(exact <= coupling + 1e-10);
        CHECK(coupling <= lc_val + 1e-10);
    }

    CHECK(w1_logconcave_bound(lc, ga, 12.0) <= 1e-3);
    CHECK_THROWS_AS(w1_logconcave_bound(lc, GlobalAnchor{-1.0, 0.0}, 2.0), BadAnchor);
    CHECK_THROWS_AS(w1_logconcave_bound(lc, ga, 0.5), OutOfRange);

    // the grid-searched global anchor is admissible too
    GlobalAnchor best = best_global_anchor(lc, 3.0);
    auto cut3 = cutoff(gauss, CutoffShape::ball, 3.0).renormalized_radial();
    CHECK(w1_exact_radial(gauss, cut3) <= w1_logconcave_bound(lc, best, 3.0) + 1e-10);
}

TEST_CASE("L2 rate transfer: exponents and gates") {
    const auto& rw = rate_fixture();
    L2Rates r = l2_rate_bound(0.5, 5, 2);
    CHECK(r.map_exponent == doctest::Approx(rw.at("dm_map_exponent_p5_n2")).epsilon(1e-12));
    CHECK(r.potential_exponent == doctest::Approx(rw.at("dm_potential_exponent")));
    CHECK(r.map_value == doctest::Approx(std::pow(0.5, 5.0 / 62.0)).epsilon(1e-12));
    CHECK(r.potential_value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

    L2Rates z = l2_rate_bound(0.0, 5, 2);
    CHECK(z.map_value == 0.0);
    CHECK(z.potential_value == 0.0);

    CHECK_THROWS_AS(l2_rate_bound(0.5, 3, 2), HypothesisViolated); // needs p >= 4
    CHECK_THROWS_AS(l2_rate_bound(0.5, 4, 4), HypothesisViolated); // needs p > n
    CHECK_THROWS_AS(l2_rate_bound(-0.1, 5, 2), OutOfRange);
}
