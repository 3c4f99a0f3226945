#pragma once
#include "otcut/costs.hpp"
#include "otcut/measures.hpp"

#include <functional>
#include <map>
#include <string>

namespace otcut {

/// A computable cutoff error bound R |-> value(R), the named constants that
/// assemble it, and the validity threshold r_min below which the bound is not
/// asserted. value stays total for every R > 0; callers gate with valid_at.
struct RateBound {
    std::string name;
    std::function<double(double)> value;
    std::map<std::string, double> constants;
    double r_min = 0.0;

    bool valid_at(double R) const { return R >= r_min; }
};

/// smallest R with F(R) >= 1/2, the validity threshold shared by the map,
/// preimage and potential bounds
double r_zero(const CumulativeProfile& F);

/// Bound on the map gap |T_R(x) - T(x)| at |x| = x_norm for the rearrangement
/// of nu onto mu: value(R) = C (1 - F_nu(R)) with C = 2/(m |S^{n-1}| p^{n-1})
/// and p = F_mu^{[-1]}(F_nu(x_norm)). m is a positive lower bound for the
/// target profile on its whole support; NotBoundedBelow when none exists
/// (unbounded target support, or the sampled minimum vanishes).
RateBound map_error_bound_inverse(const RadialDensity& mu, const RadialDensity& nu,
                                  double x_norm, double tol = kPanelTol);

/// Bound on the preimage gap |T^{-1}(y) - T_R^{-1}(y)| at |y| = y_norm:
/// value(R) = M y^n (1 - F_nu(R)) / (m q(y/2)^{n-1}) with q = F_nu^{[-1]} o F_mu,
/// m a positive lower bound for the source profile on [0, q(y)], and M the
/// sampled sup of the target profile on [0, y]. Throws BoundaryPoint when y
/// leaves the interior of the target support, OutOfRange when y_norm <= 0.
RateBound preimage_error_bound(const RadialDensity& mu, const RadialDensity& nu,
                               double y_norm, double tol = kPanelTol);

/// Modulus-of-continuity variant of the preimage bound, for targets without a
/// usable sup: value(R) = omega(y (1 - F_nu(R))) / (m q(y/2)^{n-1}) with the
/// linear modulus omega(s) = L s, L the sampled Lipschitz constant of the
/// unnormalized 1-d CDF of mu on [0, y]. Coincides with preimage_error_bound
/// whenever the target profile is constant on [0, y] (for instance a ball).
RateBound preimage_error_bound_modulus(const RadialDensity& mu, const RadialDensity& nu,
                                       double y_norm, double tol = kPanelTol);

/// Bound on the potential gap |phi_R(x) - phi(x)| at |x| = x_norm:
/// value(R) = 2 M C_map gamma^{2^k - 1} (1 - F_nu(R)) with gamma = x_norm +
/// diam(supp mu)/2 + eps and (M, k) the cost growth certificate. Valid for
/// R >= max{r_zero, R1} where R1 is the smallest radius at which the measured
/// map gap falls below eps (located by scan plus bisection). Throws
/// HypothesisViolated when the cost carries no growth data or the target
/// support is unbounded; propagates NotBoundedBelow from the map bound.
RateBound potential_error_bound_inverse(const CostFunction& cost, const RadialDensity& mu,
                                        const RadialDensity& nu, double x_norm, double eps,
                                        double tol = kPanelTol);

/// Tail mass bound 1 - F_nu(R) <= M_p R^{-p} with M_p the ambient p-th moment.
/// Throws InfiniteMoment when the moment diverges, OutOfRange when R <= 0.
double tail_bound_moment(const RadialDensity& nu, int p, double R);

/// Tail mass bound for a radial log-concave density with supporting line
/// anchor (r0, y), y > 0: |S^{n-1}| C(y, r0, n) R^{n-1} e^{-yR} with
/// C = e^{y r0 - phi(r0)} (1 + (n-1)! (e^y - y^{n-1}/(n-1)!)) / y^n.
/// Requires R >= 1; throws BadAnchor when y <= 0.
double tail_bound_logconcave(const LogConcaveDensity& nu, const RadialAnchor& anchor,
                             double R);

/// Same bound with the density's stored anchor, or, when none is stored, the
/// tangent anchor grid-searched to minimize the bound at this R.
double tail_bound_logconcave(const LogConcaveDensity& nu, double R);

/// Tangent-line anchor minimizing tail_bound_logconcave at radius r_star,
/// searched over r0 in [0.1, 5]. Throws BadAnchor when no grid point yields a
/// positive subgradient.
RadialAnchor best_radial_anchor(const LogConcaveDensity& nu, double r_star);

/// Global supporting-line anchor (a, b) minimizing w1_logconcave_bound at
/// r_star, searched over tangent points r0 in [0.1, 5].
GlobalAnchor best_global_anchor(const LogConcaveDensity& nu, double r_star);

/// W1(nu, nu_R) bound from the identity-inside coupling. Ball:
/// int_{|x|>R} |x| dnu + R (1 - F(R)). Cube: the same first-moment tail over
/// the complement of the cube [-R,R]^n plus sqrt(n) R times the cube's tail
/// mass. Throws DivergentIntegral when the first moment diverges.
double w1_cutoff_bound(const RadialDensity& nu, CutoffShape shape, double R,
                       double tol = kPanelTol);

/// W1(nu, nu_R) <= 2 M_p R^{1-p}. Requires p >= 2; throws InfiniteMoment when
/// the p-th moment diverges.
double w1_moment_bound(const RadialDensity& nu, int p, double R);

/// W1(nu, nu_R) bound for a log-concave density with global anchor
/// phi(x) >= a|x| + b: C(a, b, n) R^n e^{-aR} where C sums the two incomplete
/// factorial series and carries |S^{n-1}| e^{-b}. The cube variant uses the
/// identical constant. Requires R >= 1; throws BadAnchor when a <= 0.
double w1_logconcave_bound(const LogConcaveDensity& nu, const GlobalAnchor& anchor,
                           double R);

/// Same bound with the density's stored global anchor, or a grid-searched
/// tangent anchor when none is stored.
double w1_logconcave_bound(const LogConcaveDensity& nu, double R);

/// L2 convergence rates transferred from a W1 value: the map rate carries
/// exponent p/(6p+16n), the potential rate exponent 1/2. The multiplicative
/// constant of the underlying stability theorem is unknown, so the returned
/// values are w1^exponent with unit scale; studies compare slopes only.
struct L2Rates {
    double map_exponent;
    double potential_exponent;
    double map_value;
    double potential_value;
};

/// Throws HypothesisViolated unless p > n and p >= 4; OutOfRange when w1 < 0.
L2Rates l2_rate_bound(double w1_value, int p, int n);

} // namespace otcut
