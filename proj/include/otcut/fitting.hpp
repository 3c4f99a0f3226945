#pragma once
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace otcut {

/// model for an empirical rate fit
enum class FitModel { power, exponential };

/// abscissa the slope refers to (log R for power fits in R, plain R for
/// exponential fits, h for grid-refinement fits)
enum class FitAbscissa { R, log_R, h };

/// least-squares line through the transformed points, with its fit quality
struct RateFit {
    FitAbscissa abscissa = FitAbscissa::R;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;        // coefficient of determination, never dropped
    std::size_t window = 0; // number of points used
};

/// Fit y = exp(intercept) * x^slope (power: regress log y on log x) or
/// y = exp(intercept + slope x) (exponential: regress log y on x) by least
/// squares. Requires at least 4 points with y > 0 (and x > 0 for the power
/// model); throws DegenerateFit when there are too few points, a nonpositive
/// value blocks the log transform, or the transformed abscissae are all equal.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points, FitModel model);

/// name <-> enum helpers for config files ("power", "exponential")
FitModel fit_model_from_name(const std::string& name);
std::string fit_model_name(FitModel model);

} // namespace otcut
