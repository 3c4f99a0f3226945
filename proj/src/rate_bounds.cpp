#include "otcut/rate_bounds.hpp"
#include "otcut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace otcut {

namespace {

constexpr int ANCHOR_GRID = 99;
constexpr int MODULUS_SAMPLES = 1000;
constexpr int R1_MAX_DOUBLINGS = 200;
constexpr int R1_BISECTIONS = 100;
constexpr long W1_CUBE_MC_SAMPLES = 1000000;
constexpr std::uint64_t W1_CUBE_MC_SEED = 20240817;

double clamp01(double s) { return std::min(1.0, std::max(0.0, s)); }

std::string fmt_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

/// positive lower bound for the profile of d on [0, tau]; prefers the declared
/// certificate, falls back to the sampled minimum
double profile_floor(const RadialDensity& d, double tau, const char* role) {
    if (!std::isfinite(tau)) {
        throw NotBoundedBelow(std::string(role) + " density '" + d.name() +
                              "' has unbounded support, no uniform profile floor exists");
    }
    const double m = d.min_profile(tau);
    if (!(m > 0.0)) {
        throw NotBoundedBelow("profile of " + std::string(role) + " density '" + d.name() +
                              "' is not bounded away from zero on [0, " + fmt_double(tau) +
                              "]");
    }
    return m;
}

/// shared geometry of the preimage bound: q = F_nu^{[-1]} o F_mu evaluated at
/// y and y/2, plus the source profile floor on [0, q(y)]
struct PreimageParts {
    double q_y;
    double q_half;
    double m;
    double r0;
    CumulativeProfile f_nu;
};

PreimageParts preimage_parts(const RadialDensity& mu, const RadialDensity& nu,
                             double y_norm, double tol) {
    if (mu.dim() != nu.dim()) {
        throw DimensionMismatch("preimage bound needs equal dimensions, got " +
                                std::to_string(mu.dim()) + " and " + std::to_string(nu.dim()));
    }
    if (!(y_norm > 0.0)) {
        throw OutOfRange("preimage bound needs y_norm > 0, got " + fmt_double(y_norm));
    }
    if (y_norm >= mu.support_radius()) {
        throw BoundaryPoint("|y| = " + fmt_double(y_norm) +
                            " is not interior to the target support of radius " +
                            fmt_double(mu.support_radius()));
    }
    const CumulativeProfile f_mu = cumulative_profile(mu, tol);
    CumulativeProfile f_nu = cumulative_profile(nu, tol);
    const double q_y = f_nu.inverse(clamp01(f_mu(y_norm)));
    const double q_half = f_nu.inverse(clamp01(f_mu(0.5 * y_norm)));
    const double m = profile_floor(nu, q_y, "source");
    const double r0 = r_zero(f_nu);
    return {q_y, q_half, m, r0, std::move(f_nu)};
}

double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

/// first-moment integral of nu outside the cube [-R,R]^n and the cube's mass,
/// by seeded Monte Carlo over radius (inverse CDF) and uniform direction
struct CubeTail {
    double outside_first_moment;
    double cube_mass;
};

CubeTail cube_tail_mc(const CumulativeProfile& F, int n, double R) {
    std::mt19937_64 rng(W1_CUBE_MC_SEED);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double outside = 0.0;
    long inside = 0;
    std::vector<double> dir(static_cast<std::size_t>(n));
    for (long s = 0; s < W1_CUBE_MC_SAMPLES; ++s) {
        const double r = F.inverse(unif(rng));
        double norm2 = 0.0;
        for (auto& c : dir) {
            c = gauss(rng);
            norm2 += c * c;
        }
        const double scale = norm2 > 0.0 ? r / std::sqrt(norm2) : 0.0;
        double max_coord = 0.0;
        for (const double c : dir) max_coord = std::max(max_coord, std::fabs(c) * scale);
        if (max_coord <= R) {
            ++inside;
        } else {
            outside += r;
        }
    }
    const double inv = 1.0 / static_cast<double>(W1_CUBE_MC_SAMPLES);
    return {outside * inv, static_cast<double>(inside) * inv};
}

} // namespace

double r_zero(const CumulativeProfile& F) { return F.inverse(0.5); }

RateBound map_error_bound_inverse(const RadialDensity& mu, const RadialDensity& nu,
                                  double x_norm, double tol) {
    if (mu.dim() != nu.dim()) {
        throw DimensionMismatch("map bound needs equal dimensions, got " +
                                std::to_string(mu.dim()) + " and " + std::to_string(nu.dim()));
    }
    if (!(x_norm > 0.0)) {
        throw OutOfRange("map bound needs x_norm > 0, got " + fmt_double(x_norm));
    }
    const int n = mu.dim();
    const double m = profile_floor(mu, mu.support_radius(), "target");
    const CumulativeProfile f_mu = cumulative_profile(mu, tol);
    CumulativeProfile f_nu = cumulative_profile(nu, tol);
    const double p_x = f_mu.inverse(clamp01(f_nu(x_norm)));
    if (!(p_x > 0.0)) {
        throw OutOfRange("mapped radius p(x) vanishes at |x| = " + fmt_double(x_norm));
    }
    const double c = 2.0 / (m * unit_sphere_area(n) * std::pow(p_x, n - 1));
    RateBound b;
    b.name = "map_error_inverse";
    b.constants = {{"m", m}, {"p_x", p_x}, {"C", c}, {"x_norm", x_norm}};
    b.r_min = r_zero(f_nu);
    b.constants["r0"] = b.r_min;
    b.value = [c, F = std::move(f_nu)](double R) { return c * tail_mass(F, R); };
    return b;
}

RateBound preimage_error_bound(const RadialDensity& mu, const RadialDensity& nu,
                               double y_norm, double tol) {
    PreimageParts parts = preimage_parts(mu, nu, y_norm, tol);
    const int n = mu.dim();
    const double big_m = mu.max_profile(y_norm);
    if (!std::isfinite(big_m)) {
        return preimage_error_bound_modulus(mu, nu, y_norm, tol);
    }
    const double c = big_m * std::pow(y_norm, n) /
                     (parts.m * std::pow(parts.q_half, n - 1));
    RateBound b;
    b.name = "preimage_error";
    b.constants = {{"m", parts.m}, {"M", big_m},   {"q_y", parts.q_y},
                   {"q_half", parts.q_half}, {"C", c}, {"y_norm", y_norm},
                   {"r0", parts.r0}};
    b.r_min = parts.r0;
    b.value = [c, F = std::move(parts.f_nu)](double R) { return c * tail_mass(F, R); };
    return b;
}

RateBound preimage_error_bound_modulus(const RadialDensity& mu, const RadialDensity& nu,
                                       double y_norm, double tol) {
    PreimageParts parts = preimage_parts(mu, nu, y_norm, tol);
    const int n = mu.dim();
    double lip = 0.0;
    for (int i = 1; i <= MODULUS_SAMPLES; ++i) {
        const double r = y_norm * static_cast<double>(i) / MODULUS_SAMPLES;
        const double slope = mu.profile(r) * std::pow(r, n - 1);
        if (std::isfinite(slope)) lip = std::max(lip, slope);
    }
    if (!(lip > 0.0)) {
        throw NotBoundedBelow("modulus of the target CDF degenerates on [0, " +
                              fmt_double(y_norm) + "]");
    }
    const double denom = parts.m * std::pow(parts.q_half, n - 1);
    RateBound b;
    b.name = "preimage_error_modulus";
    b.constants = {{"m", parts.m}, {"L", lip},     {"q_y", parts.q_y},
                   {"q_half", parts.q_half}, {"y_norm", y_norm}, {"r0", parts.r0}};
    b.r_min = parts.r0;
    b.value = [lip, denom, y_norm, F = std::move(parts.f_nu)](double R) {
        return lip * (y_norm * tail_mass(F, R)) / denom;
    };
    return b;
}

RateBound potential_error_bound_inverse(const CostFunction& cost, const RadialDensity& mu,
                                        const RadialDensity& nu, double x_norm, double eps,
                                        double tol) {
    if (!cost.growth()) {
        throw HypothesisViolated("cost '" + cost.name() +
                                 "' carries no growth certificate, the potential bound "
                                 "needs one");
    }
    if (!std::isfinite(mu.support_radius())) {
        throw HypothesisViolated("potential bound needs a compactly supported target, '" +
                                 mu.name() + "' is unbounded");
    }
    if (!(eps > 0.0)) {
        throw OutOfRange("potential bound needs eps > 0, got " + fmt_double(eps));
    }
    RateBound map_bound = map_error_bound_inverse(mu, nu, x_norm, tol);
    const double c_map = map_bound.constants.at("C");
    const double p_x = map_bound.constants.at("p_x");
    const double r0 = map_bound.r_min;

    const CumulativeProfile f_mu = cumulative_profile(mu, tol);
    CumulativeProfile f_nu = cumulative_profile(nu, tol);
    const double s_x = clamp01(f_nu(x_norm));
    const auto gap = [&](double R) {
        const double mass = clamp01(f_nu(R));
        return f_mu.inverse(clamp01(s_x / mass)) - p_x;
    };

    // R1 = inf{R : measured map gap <= eps}, located by doubling then bisection
    double r1 = r0;
    if (gap(r0) > eps) {
        double lo = r0, hi = 2.0 * r0;
        int doublings = 0;
        while (gap(hi) > eps) {
            lo = hi;
            hi *= 2.0;
            if (++doublings > R1_MAX_DOUBLINGS) {
                throw NoConvergence(static_cast<std::size_t>(doublings), gap(hi),
                                    "map gap never reached eps = " + fmt_double(eps));
            }
        }
        for (int i = 0; i < R1_BISECTIONS; ++i) {
            const double mid = 0.5 * (lo + hi);
            (gap(mid) <= eps ? hi : lo) = mid;
        }
        r1 = hi;
    }

    const GrowthData g = *cost.growth();
    const double gamma = x_norm + mu.support_radius() + eps;
    const double exponent = std::ldexp(1.0, g.k) - 1.0;
    const double c = 2.0 * g.M * c_map * std::pow(gamma, exponent);
    RateBound b;
    b.name = "potential_error_inverse";
    b.constants = {{"M", g.M},     {"k", static_cast<double>(g.k)},
                   {"gamma", gamma}, {"C_map", c_map},
                   {"C", c},       {"r0", r0},
                   {"r1", r1},     {"eps", eps}};
    b.r_min = std::max(r0, r1);
    b.value = [c, F = std::move(f_nu)](double R) { return c * tail_mass(F, R); };
    return b;
}

double tail_bound_moment(const RadialDensity& nu, int p, double R) {
    if (!(R > 0.0)) {
        throw OutOfRange("tail bound needs R > 0, got " + fmt_double(R));
    }
    const double mp = moment(nu, p);
    if (!std::isfinite(mp)) {
        throw InfiniteMoment("moment of order " + std::to_string(p) + " of '" + nu.name() +
                             "' diverges");
    }
    return mp * std::pow(R, -p);
}

double tail_bound_logconcave(const LogConcaveDensity& nu, const RadialAnchor& anchor,
                             double R) {
    if (R < 1.0) {
        throw OutOfRange("log-concave tail bound is stated for R >= 1, got " +
                         fmt_double(R));
    }
    if (!(anchor.y > 0.0)) {
        throw BadAnchor("tail bound needs a positive subgradient, got y = " +
                        fmt_double(anchor.y));
    }
    const int n = nu.dim();
    const double y = anchor.y;
    const double fact = factorial(n - 1);
    const double series = 1.0 + fact * (std::exp(y) - std::pow(y, n - 1) / fact);
    const double c =
        std::exp(y * anchor.r0 - nu.phi(anchor.r0)) * series / std::pow(y, n);
    return unit_sphere_area(n) * c * std::pow(R, n - 1) * std::exp(-y * R);
}

double tail_bound_logconcave(const LogConcaveDensity& nu, double R) {
    if (R < 1.0) {
        throw OutOfRange("log-concave tail bound is stated for R >= 1, got " +
                         fmt_double(R));
    }
    const RadialAnchor anchor =
        nu.radial_anchor() ? *nu.radial_anchor() : best_radial_anchor(nu, R);
    return tail_bound_logconcave(nu, anchor, R);
}

RadialAnchor best_radial_anchor(const LogConcaveDensity& nu, double r_star) {
    const double r_eval = std::max(1.0, r_star);
    bool found = false;
    RadialAnchor best{0.0, 0.0};
    double best_value = 0.0;
    for (int i = 0; i < ANCHOR_GRID; ++i) {
        const double r0 = 0.1 + 4.9 * static_cast<double>(i) / (ANCHOR_GRID - 1);
        const double y = nu.phi_prime(r0);
        if (!(y > 0.0) || !std::isfinite(y)) continue;
        const double v = tail_bound_logconcave(nu, {r0, y}, r_eval);
        if (!std::isfinite(v)) continue;
        if (!found || v < best_value) {
            found = true;
            best = {r0, y};
            best_value = v;
        }
    }
    if (!found) {
        throw BadAnchor("no tangent of '" + nu.name() +
                        "' on [0.1, 5] has a positive finite slope");
    }
    return best;
}

GlobalAnchor best_global_anchor(const LogConcaveDensity& nu, double r_star) {
    const double r_eval = std::max(1.0, r_star);
    bool found = false;
    GlobalAnchor best{0.0, 0.0};
    double best_value = 0.0;
    for (int i = 0; i < ANCHOR_GRID; ++i) {
        const double r0 = 0.1 + 4.9 * static_cast<double>(i) / (ANCHOR_GRID - 1);
        const double y = nu.phi_prime(r0);
        if (!(y > 0.0) || !std::isfinite(y)) continue;
        const GlobalAnchor cand{y, nu.phi(r0) - y * r0};
        const double v = w1_logconcave_bound(nu, cand, r_eval);
        if (!std::isfinite(v)) continue;
        if (!found || v < best_value) {
            found = true;
            best = cand;
            best_value = v;
        }
    }
    if (!found) {
        throw BadAnchor("no tangent of '" + nu.name() +
                        "' on [0.1, 5] has a positive finite slope");
    }
    return best;
}

double w1_cutoff_bound(const RadialDensity& nu, CutoffShape shape, double R, double tol) {
    if (!(R > 0.0)) {
        throw OutOfRange("cutoff bound needs R > 0, got " + fmt_double(R));
    }
    const double m1 = moment(nu, 1);
    if (!std::isfinite(m1)) {
        throw DivergentIntegral("first absolute moment of '" + nu.name() + "' diverges");
    }
    const int n = nu.dim();
    const double area = unit_sphere_area(n);
    const CumulativeProfile F = cumulative_profile(nu, tol);
    const ScalarFn ambient_first = [&nu, n, area](double r) {
        return area * std::pow(r, n) * nu.profile(r);
    };
    if (shape == CutoffShape::ball || n == 1) {
        const double cap = nu.support_radius();
        double outside = 0.0;
        if (R < cap) {
            outside = std::isfinite(cap) ? integrate(ambient_first, R, cap, tol)
                                         : integrate_to_infinity(ambient_first, R, tol);
        }
        // for n = 1 the cube [-R,R] is the ball, and sqrt(n) = 1
        return outside + R * tail_mass(F, R);
    }
    if (n == 2) {
        const double inside =
            4.0 * integrate_2d(
                      [&nu](double x, double y) {
                          const double r = std::hypot(x, y);
                          return r * nu.profile(r);
                      },
                      0.0, R, 0.0, R, std::max(tol, 1e-11));
        const double cube_mass = cutoff(nu, CutoffShape::cube, R, tol).mass();
        return std::max(0.0, m1 - inside) + std::sqrt(2.0) * R * (1.0 - cube_mass);
    }
    const CubeTail mc = cube_tail_mc(F, n, R);
    return mc.outside_first_moment +
           std::sqrt(static_cast<double>(n)) * R * (1.0 - mc.cube_mass);
}

double w1_moment_bound(const RadialDensity& nu, int p, double R) {
    if (p < 2) {
        throw OutOfRange("W1 moment bound needs p >= 2, got " + std::to_string(p));
    }
    if (!(R > 0.0)) {
        throw OutOfRange("W1 moment bound needs R > 0, got " + fmt_double(R));
    }
    const double mp = moment(nu, p);
    if (!std::isfinite(mp)) {
        throw InfiniteMoment("moment of order " + std::to_string(p) + " of '" + nu.name() +
                             "' diverges");
    }
    return 2.0 * mp * std::pow(R, 1 - p);
}

double w1_logconcave_bound(const LogConcaveDensity& nu, const GlobalAnchor& anchor,
                           double R) {
    if (R < 1.0) {
        throw OutOfRange("log-concave W1 bound is stated for R >= 1, got " + fmt_double(R));
    }
    if (!(anchor.a > 0.0)) {
        throw BadAnchor("W1 bound needs a positive slope, got a = " + fmt_double(anchor.a));
    }
    const int n = nu.dim();
    const double a = anchor.a;
    double series = 0.0;
    for (int k = 1; k <= n + 1; ++k) {
        series += factorial(n) / (std::pow(a, k) * factorial(n - k + 1));
    }
    for (int k = 1; k <= n; ++k) {
        series += factorial(n - 1) / (std::pow(a, k) * factorial(n - k));
    }
    const double c = series * unit_sphere_area(n) * std::exp(-anchor.b);
    return c * std::pow(R, n) * std::exp(-a * R);
}

double w1_logconcave_bound(const LogConcaveDensity& nu, double R) {
    if (R < 1.0) {
        throw OutOfRange("log-concave W1 bound is stated for R >= 1, got " + fmt_double(R));
    }
    const GlobalAnchor anchor =
        nu.global_anchor() ? *nu.global_anchor() : best_global_anchor(nu, R);
    return w1_logconcave_bound(nu, anchor, R);
}

L2Rates l2_rate_bound(double w1_value, int p, int n) {
    if (p <= n || p < 4) {
        throw HypothesisViolated("L2 rate transfer needs p > n and p >= 4, got p = " +
                                 std::to_string(p) + ", n = " + std::to_string(n));
    }
    if (w1_value < 0.0) {
        throw OutOfRange("W1 value must be nonnegative, got " + fmt_double(w1_value));
    }
    L2Rates rates;
    rates.map_exponent = static_cast<double>(p) / static_cast<double>(6 * p + 16 * n);
    rates.potential_exponent = 0.5;
    rates.map_value = std::pow(w1_value, rates.map_exponent);
    rates.potential_value = std::pow(w1_value, rates.potential_exponent);
    return rates;
}

} // namespace otcut
