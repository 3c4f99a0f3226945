#pragma once
#include <functional>

namespace otcut {

using ScalarFn = std::function<double(double)>;

/// default absolute tolerance per quadrature panel used throughout the toolkit
inline constexpr double kPanelTol = 1e-10;

/// Adaptive Simpson integration of f over the finite interval [a,b].
/// Throws DivergentIntegral if the refinement depth is exhausted before the
/// requested absolute tolerance is met, or if f produces non-finite values.
double integrate(const ScalarFn& f, double a, double b, double abs_tol = kPanelTol);

/// Integral of f over [a, +inf) via the substitution r = a + s/(1-s), which maps
/// [0,1) onto [a,inf). The integrand must decay fast enough for the transformed
/// integral to be proper; otherwise DivergentIntegral is thrown.
double integrate_to_infinity(const ScalarFn& f, double a, double abs_tol = kPanelTol);

/// Nested adaptive Simpson over the rectangle [ax,bx] x [ay,by].
double integrate_2d(const std::function<double(double, double)>& f,
                    double ax, double bx, double ay, double by,
                    double abs_tol = 1e-9);

} // namespace otcut
