#include "otcut/fitting.hpp"
#include "otcut/errors.hpp"

#include <cmath>

namespace otcut {

RateFit fit_rate(const std::vector<std::pair<double, double>>& points, FitModel model) {
    if (points.size() < 4)
        throw DegenerateFit("rate fit needs at least 4 points, got " +
                            std::to_string(points.size()));
    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [x, y] : points) {
        if (!(y > 0.0))
            throw DegenerateFit("ordinate must be positive for the log transform, got " +
                                std::to_string(y));
        if (model == FitModel::power) {
            if (!(x > 0.0))
                throw DegenerateFit("power fit needs positive abscissae, got " +
                                    std::to_string(x));
            xs.push_back(std::log(x));
        } else {
            xs.push_back(x);
        }
        ys.push_back(std::log(y));
    }

    std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    double scale = 0.0;
    for (double x : xs)
        scale = std::max(scale, std::abs(x));
    if (sxx <= 1e-24 * (1.0 + scale * scale) * double(n))
        throw DegenerateFit("abscissae are degenerate (no spread) after the "
                            "model transform");

    RateFit fit;
    fit.abscissa = model == FitModel::power ? FitAbscissa::log_R : FitAbscissa::R;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    // r2 = 1 for an exact fit; a constant ordinate is fit exactly by slope 0
    fit.r2 = syy <= 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.window = n;
    return fit;
}

FitModel fit_model_from_name(const std::string& name) {
    if (name == "power")
        return FitModel::power;
    if (name == "exponential")
        return FitModel::exponential;
    throw OutOfRange("unknown fit model '" + name + "' (power, exponential)");
}

std::string fit_model_name(FitModel model) {
    return model == FitModel::power ? "power" : "exponential";
}

} // namespace otcut
