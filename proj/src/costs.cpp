#include "otcut/costs.hpp"
#include "otcut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace otcut {

namespace {

const int VALIDATION_SAMPLES = 1000;
const double VALIDATION_R_MIN = 1e-6;
/// relative slack for the growth inequality (quadratic and power_4 hit equality)
const double GROWTH_SLACK = 1e-9;
/// absolute slack for the midpoint convexity test; costs that vanish
/// quadratically at zero (cosh - 1, pseudo-Huber) evaluate there through a
/// cancellation that leaves errors near machine epsilon of the un-subtracted
/// value, far above the true midpoint gap on the finest grid panels
const double CONVEXITY_SLACK = 1e-12;

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g(n);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; i++)
        g[i] = std::exp(la + (lb - la) * i / (n - 1));
    return g;
}

} // namespace

CostFunction::CostFunction(std::string name, ScalarFn h, ScalarFn h_prime,
                           std::optional<GrowthData> growth, double r_max)
    : name_(std::move(name)), h_(std::move(h)), h_prime_(std::move(h_prime)), growth_(growth)
{
    if (!(r_max > 0))
        throw HypothesisViolated("cost '" + name_ + "': r_max must be positive");
    if (std::fabs(h_(0.0)) > 1e-12)
        throw HypothesisViolated("cost '" + name_ + "': h(0) = " + std::to_string(h_(0.0)) +
                                 ", expected 0");
    if (growth_ && (growth_->M < 0 || growth_->k < 0))
        throw HypothesisViolated("cost '" + name_ + "': growth data needs M >= 0, k >= 0");

    const std::vector<double> grid = log_grid(VALIDATION_R_MIN, r_max, VALIDATION_SAMPLES);
    double prev_r = 0.0, prev_h = 0.0;
    bool have_prev = true; // (0, h(0)=0) seeds the monotonicity chain
    for (double r : grid) {
        const double v = h_(r);
        if (!std::isfinite(v)) {
            have_prev = false; // overflowed sample; comparisons resume at the next finite one
            continue;
        }
        if (have_prev) {
            if (!(v > prev_h))
                throw HypothesisViolated("cost '" + name_ + "': h not strictly increasing at r=" +
                                         std::to_string(r));
            const double mid = h_(0.5 * (prev_r + r));
            const double slack = CONVEXITY_SLACK * std::max(1.0, std::fabs(v));
            if (std::isfinite(mid) && !(prev_h + v - 2.0 * mid > -slack))
                throw HypothesisViolated("cost '" + name_ +
                                         "': midpoint convexity fails on [" +
                                         std::to_string(prev_r) + ", " + std::to_string(r) + "]");
        }
        if (growth_) {
            const double env = growth_envelope(r);
            const double d = h_prime_(r);
            if (std::isfinite(d) && !(std::fabs(d) <= env * (1.0 + GROWTH_SLACK)))
                throw HypothesisViolated("cost '" + name_ + "': |h'(" + std::to_string(r) +
                                         ")| = " + std::to_string(std::fabs(d)) +
                                         " exceeds growth envelope " + std::to_string(env));
        }
        prev_r = r;
        prev_h = v;
        have_prev = true;
    }
}

double CostFunction::growth_envelope(double r) const
{
    if (!growth_)
        throw HypothesisViolated("cost '" + name_ + "' carries no growth data");
    const double two_k = std::ldexp(1.0, growth_->k);
    return growth_->M / two_k * std::pow(r, two_k - 1.0);
}

CostFunction builtin_cost(const std::string& name)
{
    if (name == "quadratic" || name == "power_2")
        return CostFunction(name, [](double t) { return 0.5 * t * t; },
                            [](double t) { return t; }, GrowthData{2.0, 1});
    if (name == "power_4")
        return CostFunction(name, [](double t) { return 0.25 * t * t * t * t; },
                            [](double t) { return t * t * t; }, GrowthData{4.0, 2});
    if (name == "cosh_minus_one")
        return CostFunction(name, [](double t) { return std::cosh(t) - 1.0; },
                            [](double t) { return std::sinh(t); }, std::nullopt);
    throw UnknownCost("no builtin cost named '" + name + "'");
}

} // namespace otcut
