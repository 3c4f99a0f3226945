#pragma once
#include "otcut/quadrature.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace otcut {

/// surface area |S^{n-1}| of the unit sphere in R^n
double unit_sphere_area(int n);

/// lower profile bound: f~(t) >= m > 0 for t in [0, tau]
struct ProfileLowerBound {
    double m;
    double tau;
};

/// A radial probability density on R^n described by its profile f~(r), so that
/// the ambient density is x |-> f~(|x|). Immutable and cheap to copy.
class RadialDensity {
public:
    RadialDensity(int dim, ScalarFn profile, double support_radius,
                  std::optional<ProfileLowerBound> lower_bound = std::nullopt,
                  std::string name = "custom");

    int dim() const { return dim_; }
    /// profile value f~(r); exactly 0 beyond the support radius
    double profile(double r) const;
    double support_radius() const { return support_radius_; }
    const std::optional<ProfileLowerBound>& lower_bound() const { return lower_bound_; }
    const std::string& name() const { return name_; }

    /// sampled min of f~ over [0, tau] (uses the declared lower bound when it covers the range)
    double min_profile(double tau, int samples = 1000) const;
    /// sampled max of f~ over [0, tau]
    double max_profile(double tau, int samples = 1000) const;

    // density zoo
    static RadialDensity uniform_ball(int n, double radius = 1.0);
    static RadialDensity gaussian(int n);
    static RadialDensity exponential_radial(int n);
    static RadialDensity pareto_tail(int n, int p);
    /// a plain 1D density f on [0,inf), wrapped in the n=1 radial convention (profile f/2)
    static RadialDensity from_line_density(ScalarFn f, double support, std::string name = "line");

private:
    int dim_;
    ScalarFn profile_;
    double support_radius_;
    std::optional<ProfileLowerBound> lower_bound_;
    std::string name_;
};

/// Radial CDF F(t) = |S^{n-1}| integral_0^t f~(tau) tau^{n-1} dtau with a
/// generalized (left-continuous infimum) inverse. Monotone on its knot grid by
/// construction: knot values are cumulative sums of clamped panel integrals.
class CumulativeProfile {
public:
    double operator()(double t) const;
    /// generalized inverse F^{[-1]}(s) = inf{t : F(t) >= s}
    double inverse(double s) const;

    int dim() const;
    double support_radius() const;
    /// 1D pushforward density f^(r) = |S^{n-1}| f~(r) r^{n-1}
    double density(double r) const;
    /// profile value f~(r) of the generating density
    double profile(double r) const;
    const std::vector<double>& grid() const;
    /// F at the last knot (1 within tolerance for probability densities)
    double total() const;

private:
    friend CumulativeProfile cumulative_profile(const RadialDensity&, double);
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Build the cumulative profile of d with absolute quadrature error <= tol.
/// Throws NonNormalizable if the total mass deviates from 1 by more than 100*tol.
CumulativeProfile cumulative_profile(const RadialDensity& d, double tol = kPanelTol);

/// F^{[-1]}(s); OutOfRange unless s in [0,1]
double inverse_profile(const CumulativeProfile& F, double s);

/// 1 - F(R), clamped to [0,1]
double tail_mass(const CumulativeProfile& F, double R);

/// p-th moment M_p = |S^{n-1}| integral tau^{n-1+p} f~(tau) dtau, or +inf when the
/// adaptive tail integral diverges (non-decreasing log-spaced panel sums)
double moment(const RadialDensity& d, int p);

/// A non-radial density sampled on a uniform rectangular grid (ma_solver input).
class GridDensity {
public:
    GridDensity(double ax, double ay, double bx, double by, int nx, int ny,
                std::vector<double> values);
    static GridDensity sample(const std::function<double(double, double)>& f,
                              double ax, double ay, double bx, double by, int nx, int ny);

    /// bilinear interpolation; 0 outside the rectangle
    double operator()(double x, double y) const;
    /// trapezoidal mass over the full rectangle
    double mass() const;

    double ax() const { return ax_; }
    double ay() const { return ay_; }
    double bx() const { return bx_; }
    double by() const { return by_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    const std::vector<double>& values() const { return v_; }

private:
    double ax_, ay_, bx_, by_;
    int nx_, ny_;
    std::vector<double> v_;
};

enum class CutoffShape { ball, cube };

/// A measure restricted to B_R(0) or to the cube R*C_1(0) and renormalized.
class CutoffMeasure {
public:
    CutoffShape shape() const { return shape_; }
    double radius() const { return radius_; }
    double mass() const { return mass_; }

    bool is_radial() const;
    const RadialDensity& base_radial() const;
    /// ball case only: the renormalized density as a RadialDensity (profile f~/mass on [0,R])
    RadialDensity renormalized_radial() const;
    /// renormalized ambient density at a point (any case)
    double density(const std::vector<double>& x) const;

private:
    friend CutoffMeasure cutoff(const RadialDensity&, CutoffShape, double, double,
                                std::uint64_t, long);
    friend CutoffMeasure cutoff(const GridDensity&, CutoffShape, double);
    CutoffMeasure() = default;
    std::variant<std::monostate, RadialDensity, GridDensity> base_;
    CutoffShape shape_ = CutoffShape::ball;
    double radius_ = 0;
    double mass_ = 0;
};

/// Cutoff of a radial density. Ball mass comes from the cumulative profile; cube mass
/// from 2D tensor quadrature (n=2) or seeded Monte Carlo (n>=3, documented error bar
/// ~ mass/sqrt(samples)). Throws EmptyCutoff when the region mass <= 10*tol.
CutoffMeasure cutoff(const RadialDensity& d, CutoffShape shape, double R,
                     double tol = kPanelTol, std::uint64_t mc_seed = 20240817,
                     long mc_samples = 1000000);

/// Cutoff of a grid density to the cube [-R,R]^n intersected with its rectangle.
CutoffMeasure cutoff(const GridDensity& d, CutoffShape shape, double R);

/// anchor of a log-concave density: a supporting line of its log-potential
struct RadialAnchor {
    double r0;
    double y; // subgradient of phi at r0, must be > 0 for the tail bounds
};
struct GlobalAnchor {
    double a;
    double b; // phi(x) >= a|x| + b
};

/// Density e^{-phi(|x|)} with convex phi; carries the anchors the tail bounds need.
class LogConcaveDensity {
public:
    LogConcaveDensity(int dim, ScalarFn phi,
                      std::optional<RadialAnchor> radial_anchor = std::nullopt,
                      std::optional<GlobalAnchor> global_anchor = std::nullopt,
                      std::string name = "logconcave");

    int dim() const { return dim_; }
    double phi(double r) const { return phi_(r); }
    /// numeric derivative of phi (central difference), the default subgradient choice
    double phi_prime(double r) const;
    const std::optional<RadialAnchor>& radial_anchor() const { return radial_anchor_; }
    const std::optional<GlobalAnchor>& global_anchor() const { return global_anchor_; }
    const std::string& name() const { return name_; }

    /// the same measure as a RadialDensity (profile e^{-phi(r)})
    RadialDensity as_radial() const;

    /// tangent-line anchors at r0
    RadialAnchor tangent_anchor(double r0) const;
    GlobalAnchor tangent_global_anchor(double r0) const;

    static LogConcaveDensity gaussian(int n);
    static LogConcaveDensity exponential(int n);

private:
    int dim_;
    ScalarFn phi_;
    std::optional<RadialAnchor> radial_anchor_;
    std::optional<GlobalAnchor> global_anchor_;
    std::string name_;
};

} // namespace otcut
