#include "otcut/quadrature.hpp"
#include <limits>
#include "otcut/errors.hpp"

#include <cmath>
#include <string>

namespace otcut {

namespace {

/// refinement depth cap; 2^48 panels is far beyond any sane integrand here
const int MAX_DEPTH = 48;

double simpson(double fa, double fm, double fb, double width)
{
    return width / 6.0 * (fa + 4.0 * fm + fb);
}

/// classic recursive rule: accept when the two-panel refinement changes the
/// estimate by less than 15*tol, add the Richardson correction term
double adapt(const ScalarFn& f, double a, double b, double fa, double fm, double fb,
             double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm))
        throw DivergentIntegral("non-finite integrand near [" + std::to_string(a) + "," +
                                std::to_string(b) + "]");
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double err = left + right - whole;
    // the noise floor stops refinement once err is dominated by cancellation in
    // the panel sums; without it a halving tolerance chases roundoff to max depth
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                         (std::fabs(left) + std::fabs(right) + std::fabs(whole));
    if (std::fabs(err) <= 15.0 * tol || std::fabs(err) <= noise)
        return left + right + err / 15.0;
    if (depth >= MAX_DEPTH)
        throw DivergentIntegral("adaptive refinement exhausted on [" + std::to_string(a) + "," +
                                std::to_string(b) + "]");
    return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

} // namespace

double integrate(const ScalarFn& f, double a, double b, double abs_tol)
{
    if (a == b)
        return 0.0;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
        throw DivergentIntegral("non-finite integrand at a panel endpoint");
    const double whole = simpson(fa, fm, fb, b - a);
    return sign * adapt(f, a, b, fa, fm, fb, whole, abs_tol, 0);
}

double integrate_to_infinity(const ScalarFn& f, double a, double abs_tol)
{
    // r = a + s/(1-s), dr = ds/(1-s)^2; the s=1 endpoint is forced to zero,
    // which is exact whenever the original integral converges absolutely
    auto g = [&f, a](double s) -> double {
        if (s >= 1.0)
            return 0.0;
        const double om = 1.0 - s;
        return f(a + s / om) / (om * om);
    };
    return integrate(g, 0.0, 1.0, abs_tol);
}

double integrate_2d(const std::function<double(double, double)>& f,
                    double ax, double bx, double ay, double by, double abs_tol)
{
    // inner integrals one decade tighter so their error does not pollute the outer rule
    const double inner_tol = abs_tol * 0.1 / (1.0 + std::fabs(bx - ax));
    auto row = [&](double x) { return integrate([&](double y) { return f(x, y); }, ay, by, inner_tol); };
    return integrate(row, ax, bx, abs_tol);
}

} // namespace otcut
