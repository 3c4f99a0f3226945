#pragma once
#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace otcut::oracle {

/// Brute-force references used by the test suite. Everything in this namespace is
/// implemented from scratch on top of <cmath> so a bug in the main numeric kernels
/// cannot hide inside its own oracle.

/// Pair i-th order statistic with i-th order statistic (the discrete optimal
/// coupling for strictly convex costs of the difference). Inputs are copied and
/// sorted. Throws LengthMismatch when the arrays differ in size.
std::vector<std::pair<double, double>>
discrete_ot_1d(std::vector<double> samples_F, std::vector<double> samples_G);

/// Exact 1D Wasserstein-1 distance int_lo^hi |F(t) - G(t)| dt by composite Simpson
/// with interval doubling until the estimate moves less than tol. Throws
/// DivergentIntegral when doubling exhausts without stabilizing.
double w1_exact_1d(const std::function<double(double)>& F,
                   const std::function<double(double)>& G, double lo, double hi,
                   double tol = 1e-10);

/// central-difference gradient versus a supplied analytic gradient
struct GradientReport {
    std::vector<double> fd_gradient;
    double max_deviation;
};
GradientReport fd_gradient_check(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& point, double h_fd,
                                 const std::vector<double>& analytic_gradient);

/// A closed-form convex u* on a rectangle X, with the densities it manufactures:
/// f0(x) = f1(grad u*(x)) det(D^2 u*(x)) on X, f1 constant on Omega = grad u*(X).
struct ManufacturedCase {
    std::string name;
    std::array<double, 4> domain; // {ax, ay, bx, by} for X
    std::array<double, 4> image;  // {ax, ay, bx, by} for Omega
    std::function<double(double, double)> u_star;
    std::function<std::array<double, 2>(double, double)> grad_u;
    std::function<double(double, double)> det_hessian;
    std::function<double(double, double)> f0;
    std::function<double(double, double)> f1;

    /// masses of f0 over X and f1 over Omega by composite Simpson (513 nodes per
    /// axis); the invariant is |first - second| <= 1e-6
    std::pair<double, double> mass_consistency() const;
};

/// name in {identity, affine_diag(2,0.5), quartic_bump}; throws UnknownCase
ManufacturedCase make_manufactured(const std::string& name);

/// Write every oracle fixture CSV plus manifest.csv into dir (created if absent).
/// Values come from closed forms evaluated here, never from the main modules.
void write_fixtures(const std::string& dir);

} // namespace otcut::oracle
