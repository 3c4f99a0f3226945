#pragma once
#include "otcut/costs.hpp"
#include "otcut/rate_bounds.hpp"

#include <variant>
#include <vector>

namespace otcut {

/// domain carrying the inner eps-ball property
struct EpsBallDomain {
    double eps;
};

/// axis-aligned box prod_i [a_i, b_i] with the envelope cap dx_bar < min_i (b_i - a_i)
struct RectDomain {
    std::vector<double> a;
    std::vector<double> b;
    double dx_bar;
};

/// Holder data (constant, exponent, domain) of a potential gap function.
struct HolderData {
    double c_h;
    double alpha;
    std::variant<EpsBallDomain, RectDomain> domain;

    /// moment-derived data: alpha = 1 - n/p (needs p > n) and
    /// C_H = c_np_omega (M_p / m)^{1/p}
    static HolderData from_moments(int n, int p, double c_np_omega, double m_p, double m,
                                   std::variant<EpsBallDomain, RectDomain> domain);
};

/// envelope constant beta = (1/4) C_H |S^{n-1}| (n-1)! / prod_{i=1}^n (alpha + i)
double envelope_beta(const HolderData& hd, int n);
/// rectangular variant beta~ = 2^{2-n} beta (the corner fraction 2^{-n} replaces 1/4)
double envelope_beta_rect(const HolderData& hd, int n);

/// Sharp bound on the max of a nonnegative Holder function with a zero in the
/// closed eps-ball and L1 mass <= h_mass: C_H dx^alpha with
/// dx = (h_mass / beta)^{1/(alpha+n)}. Throws ValidityExceeded when dx > 2 eps
/// (the extremal construction leaves the ball), OutOfRange on bad data.
double envelope_max_bound(const HolderData& hd, int n, double h_mass);

/// Pointwise potential rate on an eps-ball domain: value(R) =
/// C_H (h_of_R(R) / beta)^{alpha/(alpha+n)} with alpha = 1 - n/p. The validity
/// threshold r_min is the first R at which the envelope radius obeys
/// dx <= 2 eps, located by scan plus bisection on h_of_R (infinity when the
/// supplied h never gets small enough). Throws HypothesisViolated unless
/// p > n, p >= 4 and hd.alpha matches 1 - n/p.
RateBound pointwise_rate_bound_ball(const HolderData& hd, int p, int n, ScalarFn h_of_R);

/// Rectangular variant: same exponent, beta~ in place of beta, and the
/// envelope radius capped at dx_bar (value stays total through the cap).
RateBound pointwise_rate_bound_rect(const HolderData& hd, int p, int n, ScalarFn h_of_R);

/// Discrete Legendre transform sup_i (x_i y - v_i) evaluated at each y, by a
/// lower-convex-hull walk, O(N + M) after sorting. x must be strictly
/// increasing. Throws EmptyGrid / LengthMismatch / OutOfRange.
std::vector<double> legendre_1d(const std::vector<double>& x, const std::vector<double>& v,
                                const std::vector<double>& y);

/// Separable 2D Legendre transform over the tensor grid xs x ys (values
/// row-major, v[iy * nx + ix]), evaluated on the tensor grid us x vs.
std::vector<double> legendre_2d(const std::vector<double>& xs, const std::vector<double>& ys,
                                const std::vector<double>& v, const std::vector<double>& us,
                                const std::vector<double>& vs);

/// Discrete c-transform phi^c(y) = min_i { h(|x_i - y|) - phi_i }. Quadratic
/// costs route through the Legendre identity phi^c(y) = y^2/2 - psi*(y) with
/// psi(x) = x^2/2 - phi(x); other costs scan.
std::vector<double> c_transform_1d(const std::vector<double>& x,
                                   const std::vector<double>& phi, const CostFunction& cost,
                                   const std::vector<double>& y);

/// 2D c-transform on tensor grids; quadratic costs use two axis-separable
/// Legendre passes, other costs scan all grid pairs.
std::vector<double> c_transform_2d(const std::vector<double>& xs,
                                   const std::vector<double>& ys,
                                   const std::vector<double>& phi, const CostFunction& cost,
                                   const std::vector<double>& us,
                                   const std::vector<double>& vs);

/// result of the gradient-size check on a sampled potential
struct LipschitzReport {
    double max_slope;
    double limit;
    bool passes;
};

/// Max finite-difference slope over consecutive samples of a 1D potential,
/// compared against the Lipschitz constant R~ = sup_{x in Omega} |x| plus a
/// discretization slack.
LipschitzReport lipschitz_check_inverse_potential(const std::vector<double>& x,
                                                  const std::vector<double>& phi,
                                                  double r_tilde, double slack = 1e-6);

/// Same check over the horizontal and vertical edges of a uniform 2D grid
/// sampling (values row-major, phi[iy * nx + ix]).
LipschitzReport lipschitz_check_inverse_potential(int nx, int ny, double hx, double hy,
                                                  const std::vector<double>& phi,
                                                  double r_tilde, double slack = 1e-6);

/// The duality transfer: a uniform forward-potential bound k(R) on the target
/// domain bounds the inverse potentials on the source support verbatim.
RateBound duality_rate_transfer(ScalarFn k_of_R, double r_min = 0.0);
RateBound duality_rate_transfer(const RateBound& forward);

} // namespace otcut
