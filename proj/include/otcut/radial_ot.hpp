#pragma once
#include "otcut/costs.hpp"
#include "otcut/measures.hpp"

#include <vector>

namespace otcut {

/// transport direction for a radial map: which measure is pushed onto which
enum class MapDirection { nu_to_mu, mu_to_nu };

/// The exact radial optimal map x |-> S(|x|) x/|x| between two radial measures,
/// with S the monotone rearrangement of the radial CDFs and S(0) = 0.
class RadialMap {
public:
    RadialMap(CumulativeProfile source_cdf, CumulativeProfile target_cdf,
              MapDirection direction);

    /// scalar factor S(r) = F_target^{[-1]}(F_source(r)); S(0) = 0
    double scalar(double r) const;
    /// ambient map; the origin is fixed
    std::vector<double> operator()(const std::vector<double>& x) const;

    const CumulativeProfile& source_cdf() const { return source_; }
    const CumulativeProfile& target_cdf() const { return target_; }
    MapDirection direction() const { return direction_; }
    int dim() const { return source_.dim(); }

private:
    CumulativeProfile source_;
    CumulativeProfile target_;
    MapDirection direction_;
};

/// monotone rearrangement T = G^{[-1]} o F as a callable; nondecreasing by
/// construction since both factors are
ScalarFn monotone_rearrangement_1d(const CumulativeProfile& F, const CumulativeProfile& G);

/// Exact radial optimal map between mu and nu. nu_to_mu gives S = F_mu^{[-1]} o F_nu
/// (transports nu onto mu); mu_to_nu swaps the roles. Throws DimensionMismatch.
RadialMap radial_map(const RadialDensity& mu, const RadialDensity& nu,
                     MapDirection direction, double tol = kPanelTol);
/// same, from precomputed cumulative profiles
RadialMap radial_map(CumulativeProfile F_mu, CumulativeProfile F_nu, MapDirection direction);

/// The c-concave potential phi(x) = h(| |x| - S(|x|) |) associated with a radial
/// map, with additive constant fixed to 0.
class RadialPotential {
public:
    RadialPotential(CostFunction cost, RadialMap map);

    /// radial profile h(| r - S(r) |)
    double radial(double r) const;
    /// ambient evaluation phi(x)
    double operator()(const std::vector<double>& x) const;

    double constant() const { return 0.0; }
    const CostFunction& cost() const { return cost_; }
    const RadialMap& map() const { return map_; }

private:
    CostFunction cost_;
    RadialMap map_;
};

/// potential of a map under a cost (constant 0)
RadialPotential radial_potential(CostFunction cost, RadialMap map);

/// Wasserstein-2 distance between radial measures, computed through the exact map:
/// W2^2 = |S^{n-1}| int (r - S(r))^2 f~_nu(r) r^{n-1} dr with S = F_mu^{[-1]} o F_nu.
/// Throws DivergentIntegral when the tail quadrature fails (infinite second moment).
double w2_radial(const RadialDensity& mu, const RadialDensity& nu, double tol = kPanelTol);

/// Exact Wasserstein-1 distance between the radial-profile pushforwards:
/// int_0^inf |F_nu(t) - F_{nu_R}(t)| dt. Lower-bounds the ambient W1 surrogate.
double w1_exact_radial(const RadialDensity& nu, const RadialDensity& nu_R,
                       double tol = kPanelTol);

} // namespace otcut
