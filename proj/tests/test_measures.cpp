#include "doctest.h"

#include "otcut/errors.hpp"
#include "otcut/measures.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace otcut;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("unit sphere areas") {
    CHECK(unit_sphere_area(1) == doctest::Approx(2.0));
    CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * M_PI));
    CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * M_PI));
}

TEST_CASE("density zoo normalizes to unit mass") {
    for (const RadialDensity& d :
         {RadialDensity::uniform_ball(2), RadialDensity::gaussian(2),
          RadialDensity::exponential_radial(2), RadialDensity::pareto_tail(2, 3),
          RadialDensity::gaussian(3), RadialDensity::uniform_ball(1, 2.0)}) {
        CAPTURE(d.name());
        CHECK(cumulative_profile(d).total() == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("cumulative profile of the uniform disk is t^2") {
    CumulativeProfile F = cumulative_profile(RadialDensity::uniform_ball(2));
    CHECK(F(0.0) == 0.0);
    CHECK(F(0.5) == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(F(0.9) == doctest::Approx(0.81).epsilon(1e-10));
    CHECK(F(1.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(F(2.0) == doctest::Approx(1.0).epsilon(1e-10)); // past the support
}

TEST_CASE("cumulative profile of the planar Gaussian is 1 - e^{-r^2/2}") {
    CumulativeProfile F = cumulative_profile(RadialDensity::gaussian(2));
    CHECK(F(1.0) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-10));
    CHECK(F(2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-10));
    CHECK(F(0.0) == 0.0);
}

TEST_CASE("cumulative profile rejects non-normalizable densities") {
    RadialDensity half(2, [](double) { return 0.5 / M_PI; }, 1.0, std::nullopt, "half");
    CHECK_THROWS_AS(cumulative_profile(half), NonNormalizable);
}

TEST_CASE("generalized inverse: closed form, endpoints, flat intervals") {
    CumulativeProfile F = cumulative_profile(RadialDensity::uniform_ball(2));
    CHECK(inverse_profile(F, 0.25) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(inverse_profile(F, 0.0) == 0.0);
    CHECK(inverse_profile(F, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(inverse_profile(F, -0.1), OutOfRange);
    CHECK_THROWS_AS(inverse_profile(F, 1.1), OutOfRange);

    // profile with a gap: f~ = c on [0,1] and on [2,3], zero on (1,2); the
    // inverse at the plateau level must return the left endpoint of the gap
    const double c = 1.0 / (M_PI * (1.0 + 9.0 - 4.0)); // normalizes r-weighted mass
    RadialDensity gap(
        2, [c](double r) { return (r <= 1.0 || r >= 2.0) ? c : 0.0; }, 3.0,
        std::nullopt, "gap");
    CumulativeProfile G = cumulative_profile(gap);
    const double level = G(1.0);
    CHECK(G(1.5) == doctest::Approx(level).epsilon(1e-12)); // flat across the gap
    CHECK(G.inverse(level) <= 1.0 + 1e-9);
    // strictly above the plateau the inverse jumps past the gap
    CHECK(G.inverse(level + 1e-6) >= 2.0 - 1e-3);
}

TEST_CASE("generalized inverse consistency F^{[-1]}(F(t)) <= t") {
    CumulativeProfile F = cumulative_profile(RadialDensity::gaussian(2));
    for (double t : {0.1, 0.5, 1.0, 1.7, 2.5, 4.0}) {
        CHECK(F.inverse(F(t)) <= t + 1e-9);
        CHECK(F.inverse(F(t)) == doctest::Approx(t).epsilon(1e-7)); // strictly increasing F
    }
}

TEST_CASE("inverse at s=1 on unbounded support reports +inf") {
    CumulativeProfile F = cumulative_profile(RadialDensity::gaussian(2));
    CHECK(F.inverse(1.0) == kInf);
}

TEST_CASE("monotonicity of F and its inverse on grids") {
    CumulativeProfile F = cumulative_profile(RadialDensity::pareto_tail(2, 4));
    double prev = -1.0;
    for (int i = 0; i <= 100; i++) {
        const double v = F(0.08 * i);
        CHECK(v >= prev);
        prev = v;
    }
    prev = -1.0;
    for (int i = 0; i <= 40; i++) {
        const double t = F.inverse(0.024 * i);
        CHECK(t >= prev);
        prev = t;
    }
}

TEST_CASE("ball cutoff of the Gaussian keeps mass 1 - e^{-R^2/2}") {
    RadialDensity gauss = RadialDensity::gaussian(2);
    CutoffMeasure cm = cutoff(gauss, CutoffShape::ball, 2.0);
    CHECK(cm.mass() == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-9));
    CHECK(cm.shape() == CutoffShape::ball);
    CHECK(cm.radius() == 2.0);

    RadialDensity renorm = cm.renormalized_radial();
    CHECK(cumulative_profile(renorm).total() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(renorm.profile(2.5) == 0.0); // exactly zero outside the region
    CHECK(renorm.profile(1.0) ==
          doctest::Approx(gauss.profile(1.0) / cm.mass()).epsilon(1e-12));
}

TEST_CASE("cutoff at or past the support radius is the identity") {
    RadialDensity disk = RadialDensity::uniform_ball(2);
    CHECK(cutoff(disk, CutoffShape::ball, 1.0).mass() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cutoff(disk, CutoffShape::ball, 5.0).mass() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cube cutoff mass exceeds the inscribed ball mass") {
    RadialDensity gauss = RadialDensity::gaussian(2);
    const double ball = cutoff(gauss, CutoffShape::ball, 2.0).mass();
    const double cube = cutoff(gauss, CutoffShape::cube, 2.0).mass();
    CHECK(cube > ball);
    CHECK(cube < 1.0);
    // ambient density: renormalized inside, exactly zero outside the cube
    CutoffMeasure cm = cutoff(gauss, CutoffShape::cube, 2.0);
    CHECK(cm.density({1.9, 1.9}) ==
          doctest::Approx(gauss.profile(std::hypot(1.9, 1.9)) / cube).epsilon(1e-12));
    CHECK(cm.density({2.1, 0.0}) == 0.0);
}

TEST_CASE("cutoff nesting: mass monotone in R") {
    RadialDensity gauss = RadialDensity::gaussian(2);
    double prev = 0.0;
    for (double R : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
        const double m = cutoff(gauss, CutoffShape::ball, R).mass();
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("empty cutoff is rejected") {
    RadialDensity gauss = RadialDensity::gaussian(2);
    CHECK_THROWS_AS(cutoff(gauss, CutoffShape::ball, 1e-7), EmptyCutoff);
}

TEST_CASE("moments: Gaussian closed forms and divergence detection") {
    RadialDensity gauss = RadialDensity::gaussian(2);
    CHECK(moment(gauss, 2) == doctest::Approx(2.0).epsilon(1e-8));

    // narrow bump near the origin: p-th moment tends to zero with the width
    auto bump_moment = [](double w) {
        const double c = 1.0 / (M_PI * w * w);
        RadialDensity bump(2, [c, w](double r) { return r <= w ? c : 0.0; }, w,
                           std::nullopt, "bump");
        return moment(bump, 2);
    };
    CHECK(bump_moment(0.1) < 0.01);
    CHECK(bump_moment(0.01) < bump_moment(0.1));

    RadialDensity par3 = RadialDensity::pareto_tail(2, 3);
    CHECK(moment(par3, 3) == kInf);
    // pareto_tail(p) has M_{p-1} = p exactly (Beta-function identity)
    CHECK(moment(par3, 2) == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(moment(RadialDensity::pareto_tail(2, 4), 3) == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("tail mass values and Markov dominance") {
    RadialDensity gauss = RadialDensity::gaussian(2);
    CumulativeProfile F = cumulative_profile(gauss);
    CHECK(tail_mass(F, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
    CHECK(tail_mass(F, 0.0) == doctest::Approx(1.0));
    CHECK(tail_mass(cumulative_profile(RadialDensity::uniform_ball(2)), 1.0) ==
          doctest::Approx(0.0));

    const double m2 = moment(gauss, 2);
    for (double R : {1.0, 1.5, 2.0, 3.0, 4.0})
        CHECK(tail_mass(F, R) <= m2 / (R * R) + 1e-12);
    RadialDensity par4 = RadialDensity::pareto_tail(2, 4);
    CumulativeProfile Fp = cumulative_profile(par4);
    const double m3 = moment(par4, 3);
    for (double R : {1.0, 2.0, 5.0, 10.0})
        CHECK(tail_mass(Fp, R) <= m3 / (R * R * R) + 1e-12);
}

TEST_CASE("profile bounds: declared and sampled") {
    RadialDensity disk = RadialDensity::uniform_ball(2);
    CHECK(disk.min_profile(1.0) == doctest::Approx(1.0 / M_PI));
    CHECK(disk.max_profile(1.0) == doctest::Approx(1.0 / M_PI));
    RadialDensity gauss = RadialDensity::gaussian(2);
    CHECK(gauss.min_profile(2.0) ==
          doctest::Approx(std::exp(-2.0) / (2.0 * M_PI)).epsilon(1e-4));
    CHECK(gauss.max_profile(2.0) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-6));
}

TEST_CASE("line densities wrap into the n=1 radial convention") {
    RadialDensity exp1 = RadialDensity::from_line_density(
        [](double t) { return std::exp(-t); }, kInf, "exp1");
    CumulativeProfile F = cumulative_profile(exp1);
    CHECK(F(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
    CHECK(F.inverse(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("grid densities interpolate bilinearly and vanish outside") {
    GridDensity gd = GridDensity::sample(
        [](double x, double y) { return 1.0 + x + 2.0 * y; }, 0, 0, 1, 1, 9, 9);
    CHECK(gd(0.5, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(gd(0.3, 0.7) == doctest::Approx(1.0 + 0.3 + 1.4).epsilon(1e-12));
    CHECK(gd(1.5, 0.5) == 0.0);
    CHECK(gd(0.5, -0.1) == 0.0);
    CHECK(gd.mass() == doctest::Approx(2.5).epsilon(1e-12)); // exact for bilinear data
}

TEST_CASE("log-concave densities: convexity, anchors, normalization") {
    LogConcaveDensity lg = LogConcaveDensity::gaussian(2);
    // midpoint convexity of phi on sampled triples
    for (double s : {0.2, 0.7, 1.4}) {
        for (double t : {1.9, 2.8, 3.5}) {
            CHECK(lg.phi(0.5 * (s + t)) <= 0.5 * (lg.phi(s) + lg.phi(t)) + 1e-10);
        }
    }
    CHECK(cumulative_profile(lg.as_radial()).total() ==
          doctest::Approx(1.0).epsilon(1e-8));

    // a tangent anchor is a supporting line of phi
    RadialAnchor a = lg.tangent_anchor(1.0);
    CHECK(a.r0 == doctest::Approx(1.0));
    CHECK(a.y == doctest::Approx(1.0).epsilon(1e-6)); // phi'(r) = r for the Gaussian
    for (double t : {0.0, 0.5, 1.5, 3.0})
        CHECK(lg.phi(t) >= a.y * (t - a.r0) + lg.phi(a.r0) - 1e-9);

    GlobalAnchor ga = lg.tangent_global_anchor(1.0);
    CHECK(ga.a == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ga.b == doctest::Approx(std::log(2.0 * M_PI) - 0.5).epsilon(1e-6));

    LogConcaveDensity le = LogConcaveDensity::exponential(2);
    CHECK(cumulative_profile(le.as_radial()).total() ==
          doctest::Approx(1.0).epsilon(1e-8));
}
