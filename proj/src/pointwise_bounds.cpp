#include "otcut/pointwise_bounds.hpp"
#include "otcut/errors.hpp"
#include "otcut/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>

namespace otcut {

namespace {

constexpr int GATE_MAX_DOUBLINGS = 140;
constexpr int GATE_BISECTIONS = 100;

std::string fmt_double(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_holder(const HolderData& hd) {
    if (!(hd.c_h > 0.0)) {
        throw OutOfRange("Holder constant must be positive, got " + fmt_double(hd.c_h));
    }
    if (!(hd.alpha > 0.0) || hd.alpha > 1.0) {
        throw OutOfRange("Holder exponent must lie in (0,1], got " + fmt_double(hd.alpha));
    }
}

double alpha_product(double alpha, int n) {
    double prod = 1.0;
    for (int i = 1; i <= n; ++i) prod *= alpha + i;
    return prod;
}

/// smallest R with h(R) <= cap, assuming h nonincreasing; 0 when already below
/// at the smallest probe, infinity when never reached
double first_radius_below(const ScalarFn& h, double cap) {
    double hi = 1.0 / 1024.0;
    if (h(hi) <= cap) return 0.0;
    double lo = hi;
    hi *= 2.0;
    int doublings = 0;
    while (h(hi) > cap) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > GATE_MAX_DOUBLINGS) {
            return std::numeric_limits<double>::infinity();
        }
    }
    for (int i = 0; i < GATE_BISECTIONS; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) <= cap ? hi : lo) = mid;
    }
    return hi;
}

void check_rate_inputs(const HolderData& hd, int p, int n) {
    if (p <= n || p < 4) {
        throw HypothesisViolated("pointwise rate needs p > n and p >= 4, got p = " +
                                 std::to_string(p) + ", n = " + std::to_string(n));
    }
    check_holder(hd);
    const double alpha = 1.0 - static_cast<double>(n) / p;
    if (std::fabs(hd.alpha - alpha) > 1e-9) {
        throw HypothesisViolated("Holder exponent " + fmt_double(hd.alpha) +
                                 " is inconsistent with 1 - n/p = " + fmt_double(alpha));
    }
}

/// lower convex hull (indices) of the strictly increasing abscissae x with
/// ordinates v, Andrew's monotone chain
std::vector<std::size_t> lower_hull(const std::vector<double>& x,
                                    const std::vector<double>& v) {
    std::vector<std::size_t> hull;
    hull.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            const double cross =
                (x[b] - x[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (x[i] - x[a]);
            if (cross <= 0.0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }
    return hull;
}

void check_increasing(const std::vector<double>& x, const char* label) {
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
            throw OutOfRange(std::string(label) + " grid must be strictly increasing");
        }
    }
}

bool is_quadratic(const CostFunction& cost) {
    return cost.name() == "quadratic" || cost.name() == "power_2";
}

} // namespace

HolderData HolderData::from_moments(int n, int p, double c_np_omega, double m_p, double m,
                                    std::variant<EpsBallDomain, RectDomain> domain) {
    if (p <= n) {
        throw HypothesisViolated("moment-derived Holder data needs p > n, got p = " +
                                 std::to_string(p) + ", n = " + std::to_string(n));
    }
    if (!(m > 0.0) || !(m_p > 0.0) || !std::isfinite(m_p) || !(c_np_omega > 0.0)) {
        throw OutOfRange("moment-derived Holder data needs c > 0 and 0 < M_p < inf, m > 0");
    }
    HolderData hd;
    hd.alpha = 1.0 - static_cast<double>(n) / p;
    hd.c_h = c_np_omega * std::pow(m_p / m, 1.0 / p);
    hd.domain = std::move(domain);
    return hd;
}

double envelope_beta(const HolderData& hd, int n) {
    check_holder(hd);
    return 0.25 * hd.c_h * unit_sphere_area(n) * std::tgamma(static_cast<double>(n)) /
           alpha_product(hd.alpha, n);
}

double envelope_beta_rect(const HolderData& hd, int n) {
    return envelope_beta(hd, n) * std::ldexp(1.0, 2 - n);
}

double envelope_max_bound(const HolderData& hd, int n, double h_mass) {
    check_holder(hd);
    if (h_mass < 0.0) {
        throw OutOfRange("L1 mass must be nonnegative, got " + fmt_double(h_mass));
    }
    const auto* ball = std::get_if<EpsBallDomain>(&hd.domain);
    if (ball == nullptr) {
        throw OutOfRange("envelope_max_bound needs the eps-ball domain");
    }
    if (h_mass == 0.0) return 0.0;
    const double beta = envelope_beta(hd, n);
    const double dx = std::pow(h_mass / beta, 1.0 / (hd.alpha + n));
    if (dx > 2.0 * ball->eps) {
        throw ValidityExceeded("envelope radius " + fmt_double(dx) +
                               " exceeds the ball diameter " + fmt_double(2.0 * ball->eps) +
                               ", the mass " + fmt_double(h_mass) + " is not yet small enough");
    }
    return hd.c_h * std::pow(dx, hd.alpha);
}

RateBound pointwise_rate_bound_ball(const HolderData& hd, int p, int n, ScalarFn h_of_R) {
    check_rate_inputs(hd, p, n);
    const auto* ball = std::get_if<EpsBallDomain>(&hd.domain);
    if (ball == nullptr) {
        throw OutOfRange("pointwise_rate_bound_ball needs the eps-ball domain");
    }
    if (!(ball->eps > 0.0)) {
        throw OutOfRange("eps-ball radius must be positive, got " + fmt_double(ball->eps));
    }
    const double beta = envelope_beta(hd, n);
    const double alpha = hd.alpha;
    const double expo = alpha / (alpha + n);
    const double cap = beta * std::pow(2.0 * ball->eps, alpha + n);
    RateBound b;
    b.name = "pointwise_ball";
    b.constants = {{"C_H", hd.c_h}, {"alpha", alpha},
                   {"beta", beta},  {"exponent", expo},
                   {"p", static_cast<double>(p)}, {"n", static_cast<double>(n)},
                   {"eps", ball->eps}};
    b.r_min = first_radius_below(h_of_R, cap);
    b.value = [c_h = hd.c_h, beta, expo, h = std::move(h_of_R)](double R) {
        return c_h * std::pow(std::max(0.0, h(R)) / beta, expo);
    };
    return b;
}

RateBound pointwise_rate_bound_rect(const HolderData& hd, int p, int n, ScalarFn h_of_R) {
    check_rate_inputs(hd, p, n);
    const auto* rect = std::get_if<RectDomain>(&hd.domain);
    if (rect == nullptr) {
        throw OutOfRange("pointwise_rate_bound_rect needs the rectangle domain");
    }
    if (rect->a.size() != static_cast<std::size_t>(n) || rect->b.size() != rect->a.size()) {
        throw DimensionMismatch("rectangle has " + std::to_string(rect->a.size()) +
                                " extents, expected " + std::to_string(n));
    }
    double min_extent = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rect->a.size(); ++i) {
        min_extent = std::min(min_extent, rect->b[i] - rect->a[i]);
    }
    if (!(rect->dx_bar > 0.0) || !(rect->dx_bar < min_extent)) {
        throw OutOfRange("envelope cap dx_bar must lie in (0, min extent), got " +
                         fmt_double(rect->dx_bar));
    }
    const double beta = envelope_beta_rect(hd, n);
    const double alpha = hd.alpha;
    const double expo = alpha / (alpha + n);
    const double cap = beta * std::pow(rect->dx_bar, alpha + n);
    RateBound b;
    b.name = "pointwise_rect";
    b.constants = {{"C_H", hd.c_h}, {"alpha", alpha},
                   {"beta_rect", beta}, {"exponent", expo},
                   {"p", static_cast<double>(p)}, {"n", static_cast<double>(n)},
                   {"dx_bar", rect->dx_bar}};
    b.r_min = first_radius_below(h_of_R, cap);
    b.value = [c_h = hd.c_h, beta, alpha, n, cap_dx = rect->dx_bar,
               h = std::move(h_of_R)](double R) {
        const double dx =
            std::min(cap_dx, std::pow(std::max(0.0, h(R)) / beta, 1.0 / (alpha + n)));
        return c_h * std::pow(dx, alpha);
    };
    return b;
}

std::vector<double> legendre_1d(const std::vector<double>& x, const std::vector<double>& v,
                                const std::vector<double>& y) {
    if (x.empty() || y.empty()) {
        throw EmptyGrid("legendre_1d needs nonempty grids");
    }
    if (x.size() != v.size()) {
        throw LengthMismatch("legendre_1d got " + std::to_string(x.size()) +
                             " abscissae and " + std::to_string(v.size()) + " values");
    }
    check_increasing(x, "abscissa");
    const std::vector<std::size_t> hull = lower_hull(x, v);

    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&y](std::size_t a, std::size_t b) { return y[a] < y[b]; });

    std::vector<double> out(y.size());
    std::size_t k = 0;
    for (const std::size_t j : order) {
        const double s = y[j];
        // advance while the next hull edge still improves x*s - v
        while (k + 1 < hull.size() &&
               v[hull[k + 1]] - v[hull[k]] <= s * (x[hull[k + 1]] - x[hull[k]])) {
            ++k;
        }
        out[j] = x[hull[k]] * s - v[hull[k]];
    }
    return out;
}

std::vector<double> legendre_2d(const std::vector<double>& xs, const std::vector<double>& ys,
                                const std::vector<double>& v, const std::vector<double>& us,
                                const std::vector<double>& vs) {
    const std::size_t nx = xs.size(), ny = ys.size();
    if (nx == 0 || ny == 0 || us.empty() || vs.empty()) {
        throw EmptyGrid("legendre_2d needs nonempty grids");
    }
    if (v.size() != nx * ny) {
        throw LengthMismatch("legendre_2d got " + std::to_string(v.size()) +
                             " values for a " + std::to_string(nx) + " x " +
                             std::to_string(ny) + " grid");
    }
    // pass 1: conjugate in y for every x column
    std::vector<double> column(ny), partial(vs.size() * nx);
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) column[iy] = v[iy * nx + ix];
        const std::vector<double> t = legendre_1d(ys, column, vs);
        for (std::size_t jv = 0; jv < vs.size(); ++jv) partial[jv * nx + ix] = t[jv];
    }
    // pass 2: conjugate in x of -partial for every v row
    std::vector<double> row(nx), out(us.size() * vs.size());
    for (std::size_t jv = 0; jv < vs.size(); ++jv) {
        for (std::size_t ix = 0; ix < nx; ++ix) row[ix] = -partial[jv * nx + ix];
        const std::vector<double> t = legendre_1d(xs, row, us);
        for (std::size_t ju = 0; ju < us.size(); ++ju) out[jv * us.size() + ju] = t[ju];
    }
    return out;
}

std::vector<double> c_transform_1d(const std::vector<double>& x,
                                   const std::vector<double>& phi, const CostFunction& cost,
                                   const std::vector<double>& y) {
    if (x.empty() || y.empty()) {
        throw EmptyGrid("c_transform_1d needs nonempty grids");
    }
    if (x.size() != phi.size()) {
        throw LengthMismatch("c_transform_1d got " + std::to_string(x.size()) +
                             " abscissae and " + std::to_string(phi.size()) + " values");
    }
    if (is_quadratic(cost)) {
        std::vector<double> psi(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) psi[i] = 0.5 * x[i] * x[i] - phi[i];
        std::vector<double> conj = legendre_1d(x, psi, y);
        for (std::size_t j = 0; j < y.size(); ++j) conj[j] = 0.5 * y[j] * y[j] - conj[j];
        return conj;
    }
    std::vector<double> out(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.size(); ++i) {
            best = std::min(best, cost.h(std::fabs(x[i] - y[j])) - phi[i]);
        }
        out[j] = best;
    }
    return out;
}

std::vector<double> c_transform_2d(const std::vector<double>& xs,
                                   const std::vector<double>& ys,
                                   const std::vector<double>& phi, const CostFunction& cost,
                                   const std::vector<double>& us,
                                   const std::vector<double>& vs) {
    const std::size_t nx = xs.size(), ny = ys.size();
    if (nx == 0 || ny == 0 || us.empty() || vs.empty()) {
        throw EmptyGrid("c_transform_2d needs nonempty grids");
    }
    if (phi.size() != nx * ny) {
        throw LengthMismatch("c_transform_2d got " + std::to_string(phi.size()) +
                             " values for a " + std::to_string(nx) + " x " +
                             std::to_string(ny) + " grid");
    }
    if (is_quadratic(cost)) {
        std::vector<double> psi(phi.size());
        for (std::size_t iy = 0; iy < ny; ++iy) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                psi[iy * nx + ix] =
                    0.5 * (xs[ix] * xs[ix] + ys[iy] * ys[iy]) - phi[iy * nx + ix];
            }
        }
        std::vector<double> conj = legendre_2d(xs, ys, psi, us, vs);
        for (std::size_t jv = 0; jv < vs.size(); ++jv) {
            for (std::size_t ju = 0; ju < us.size(); ++ju) {
                conj[jv * us.size() + ju] =
                    0.5 * (us[ju] * us[ju] + vs[jv] * vs[jv]) - conj[jv * us.size() + ju];
            }
        }
        return conj;
    }
    std::vector<double> out(us.size() * vs.size());
    for (std::size_t jv = 0; jv < vs.size(); ++jv) {
        for (std::size_t ju = 0; ju < us.size(); ++ju) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t iy = 0; iy < ny; ++iy) {
                for (std::size_t ix = 0; ix < nx; ++ix) {
                    const double d = std::hypot(xs[ix] - us[ju], ys[iy] - vs[jv]);
                    best = std::min(best, cost.h(d) - phi[iy * nx + ix]);
                }
            }
            out[jv * us.size() + ju] = best;
        }
    }
    return out;
}

LipschitzReport lipschitz_check_inverse_potential(const std::vector<double>& x,
                                                  const std::vector<double>& phi,
                                                  double r_tilde, double slack) {
    if (x.size() < 2) {
        throw EmptyGrid("Lipschitz check needs at least two samples");
    }
    if (x.size() != phi.size()) {
        throw LengthMismatch("Lipschitz check got " + std::to_string(x.size()) +
                             " abscissae and " + std::to_string(phi.size()) + " values");
    }
    check_increasing(x, "abscissa");
    double max_slope = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        max_slope = std::max(max_slope, std::fabs(phi[i] - phi[i - 1]) / (x[i] - x[i - 1]));
    }
    const double limit = r_tilde + slack;
    return {max_slope, limit, max_slope <= limit};
}

LipschitzReport lipschitz_check_inverse_potential(int nx, int ny, double hx, double hy,
                                                  const std::vector<double>& phi,
                                                  double r_tilde, double slack) {
    if (nx < 2 || ny < 2) {
        throw EmptyGrid("Lipschitz check needs at least a 2 x 2 grid");
    }
    if (phi.size() != static_cast<std::size_t>(nx) * ny) {
        throw LengthMismatch("Lipschitz check got " + std::to_string(phi.size()) +
                             " values for a " + std::to_string(nx) + " x " +
                             std::to_string(ny) + " grid");
    }
    if (!(hx > 0.0) || !(hy > 0.0)) {
        throw OutOfRange("grid spacings must be positive");
    }
    double max_slope = 0.0;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix + 1 < nx; ++ix) {
            max_slope = std::max(
                max_slope, std::fabs(phi[iy * nx + ix + 1] - phi[iy * nx + ix]) / hx);
        }
    }
    for (int iy = 0; iy + 1 < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            max_slope = std::max(
                max_slope, std::fabs(phi[(iy + 1) * nx + ix] - phi[iy * nx + ix]) / hy);
        }
    }
    const double limit = r_tilde + slack;
    return {max_slope, limit, max_slope <= limit};
}

RateBound duality_rate_transfer(ScalarFn k_of_R, double r_min) {
    RateBound b;
    b.name = "duality_transfer";
    b.value = std::move(k_of_R);
    b.r_min = r_min;
    return b;
}

RateBound duality_rate_transfer(const RateBound& forward) {
    RateBound b = forward;
    b.name = forward.name + "_transferred";
    return b;
}

} // namespace otcut
