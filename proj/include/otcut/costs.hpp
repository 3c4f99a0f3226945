#pragma once
#include "otcut/quadrature.hpp"

#include <optional>
#include <string>

namespace otcut {

/// growth certificate for a cost: |h'(r)| <= (M / 2^k) r^{2^k - 1} for all r > 0
struct GrowthData {
    double M;
    int k;
};

/// A radial transport cost c(x,y) = h(|x-y|) with h increasing, strictly convex,
/// h(0) = 0. Construction samples these hypotheses and rejects violations, so a
/// held CostFunction is always admissible.
class CostFunction {
public:
    /// Validates on a 1000-point log grid over (0, r_max]; throws HypothesisViolated
    /// if h(0) != 0, monotonicity or midpoint convexity fails, or the growth data
    /// overstates its bound. Samples where h overflows to non-finite are skipped.
    CostFunction(std::string name, ScalarFn h, ScalarFn h_prime,
                 std::optional<GrowthData> growth = std::nullopt, double r_max = 1e3);

    const std::string& name() const { return name_; }
    double h(double r) const { return h_(r); }
    double h_prime(double r) const { return h_prime_(r); }
    const std::optional<GrowthData>& growth() const { return growth_; }

    /// the certified envelope (M / 2^k) r^{2^k - 1}; requires growth data
    double growth_envelope(double r) const;

private:
    std::string name_;
    ScalarFn h_;
    ScalarFn h_prime_;
    std::optional<GrowthData> growth_;
};

/// Costs selectable by name: quadratic (t^2/2), power_2 (alias of quadratic),
/// power_4 (t^4/4), cosh_minus_one (cosh t - 1, no polynomial growth data).
/// Throws UnknownCost for any other name.
CostFunction builtin_cost(const std::string& name);

} // namespace otcut
