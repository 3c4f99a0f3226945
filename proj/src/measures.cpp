#include "otcut/measures.hpp"
#include "otcut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace otcut {

namespace {

/// bisection iterations for the generalized inverse (bracket ~ width * 2^-60)
const int INVERSE_BISECTIONS = 60;
/// Newton polish steps after bracketing
const int INVERSE_NEWTON_STEPS = 3;
/// number of knots in each half (linear + geometric) of the cumulative grid
const int GRID_KNOTS = 256;
/// decades scanned before declaring a moment integral divergent
const int MOMENT_MAX_DECADES = 30;

double clamp01(double x)
{
    return std::min(1.0, std::max(0.0, x));
}

} // namespace

double unit_sphere_area(int n)
{
    if (n < 1)
        throw OutOfRange("dimension must be >= 1, got " + std::to_string(n));
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

// --- RadialDensity ---------------------------------------------------------

RadialDensity::RadialDensity(int dim, ScalarFn profile, double support_radius,
                             std::optional<ProfileLowerBound> lower_bound, std::string name)
    : dim_(dim), profile_(std::move(profile)), support_radius_(support_radius),
      lower_bound_(lower_bound), name_(std::move(name))
{
    if (dim_ < 1)
        throw OutOfRange("dimension must be >= 1");
    if (!(support_radius_ > 0))
        throw OutOfRange("support radius must be positive");
}

double RadialDensity::profile(double r) const
{
    if (r < 0 || r > support_radius_)
        return 0.0;
    return profile_(r);
}

double RadialDensity::min_profile(double tau, int samples) const
{
    if (lower_bound_ && tau <= lower_bound_->tau)
        return lower_bound_->m;
    double lo = profile(0.0);
    for (int i = 1; i <= samples; i++)
        lo = std::min(lo, profile(tau * i / samples));
    return lo;
}

double RadialDensity::max_profile(double tau, int samples) const
{
    double hi = profile(0.0);
    for (int i = 1; i <= samples; i++)
        hi = std::max(hi, profile(tau * i / samples));
    return hi;
}

RadialDensity RadialDensity::uniform_ball(int n, double radius)
{
    const double vol = std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0) * std::pow(radius, n);
    const double val = 1.0 / vol;
    return RadialDensity(n, [val](double) { return val; }, radius,
                         ProfileLowerBound{val, radius}, "uniform_ball");
}

RadialDensity RadialDensity::gaussian(int n)
{
    const double norm = std::pow(2.0 * M_PI, -0.5 * n);
    return RadialDensity(n, [norm](double r) { return norm * std::exp(-0.5 * r * r); },
                         std::numeric_limits<double>::infinity(), std::nullopt, "gaussian");
}

RadialDensity RadialDensity::exponential_radial(int n)
{
    const double norm = 1.0 / (unit_sphere_area(n) * std::tgamma(n));
    return RadialDensity(n, [norm](double r) { return norm * std::exp(-r); },
                         std::numeric_limits<double>::infinity(), std::nullopt,
                         "exponential_radial");
}

RadialDensity RadialDensity::pareto_tail(int n, int p)
{
    if (p < 1)
        throw OutOfRange("pareto_tail needs p >= 1");
    // normalization: |S^{n-1}| * c * B(n, p) = 1 with B the Beta function
    const double beta = std::tgamma(n) * std::tgamma(p) / std::tgamma(n + p);
    const double c = 1.0 / (unit_sphere_area(n) * beta);
    const double expo = n + p;
    return RadialDensity(n, [c, expo](double r) { return c * std::pow(1.0 + r, -expo); },
                         std::numeric_limits<double>::infinity(), std::nullopt,
                         "pareto_tail(" + std::to_string(p) + ")");
}

RadialDensity RadialDensity::from_line_density(ScalarFn f, double support, std::string name)
{
    // |S^0| = 2, so the profile f/2 reproduces F(t) = integral_0^t f
    return RadialDensity(1, [f = std::move(f)](double r) { return 0.5 * f(r); }, support,
                         std::nullopt, std::move(name));
}

// --- CumulativeProfile ------------------------------------------------------

struct CumulativeProfile::Impl {
    int dim;
    double support;      // declared support radius (may be +inf)
    double cap;          // last knot; == support when finite
    double tol;
    ScalarFn pushforward; // f^(r) = |S^{n-1}| f~(r) r^{n-1}
    ScalarFn profile;
    std::vector<double> knots;
    std::vector<double> cum; // cum[i] = F(knots[i]), exact cumulative sums

    double cdf(double t) const
    {
        if (t <= 0)
            return 0.0;
        if (t >= cap) {
            double extra = 0.0;
            if (t > cap && t < support)
                extra = std::max(0.0, integrate(pushforward, cap, t, tol));
            return cum.back() + extra;
        }
        const auto it = std::upper_bound(knots.begin(), knots.end(), t);
        const size_t k = (it - knots.begin()) - 1; // knots[k] <= t < knots[k+1]
        const double part = integrate(pushforward, knots[k], t, tol);
        return cum[k] + std::max(0.0, part);
    }
};

double CumulativeProfile::operator()(double t) const
{
    return impl_->cdf(t);
}

int CumulativeProfile::dim() const { return impl_->dim; }
double CumulativeProfile::support_radius() const { return impl_->support; }
double CumulativeProfile::density(double r) const { return impl_->pushforward(r); }
double CumulativeProfile::profile(double r) const { return impl_->profile(r); }
const std::vector<double>& CumulativeProfile::grid() const { return impl_->knots; }
double CumulativeProfile::total() const { return impl_->cum.back(); }

double CumulativeProfile::inverse(double s) const
{
    const Impl& im = *impl_;
    if (s < 0.0 || s > 1.0)
        throw OutOfRange("inverse_profile argument " + std::to_string(s) + " outside [0,1]");
    if (s <= 0.0)
        return 0.0;
    if (s > im.cum.back()) {
        // beyond the tabulated mass: finite support ends at the support radius,
        // unbounded support diverges (the map "reports +inf radius")
        if (std::isfinite(im.support))
            return im.support;
        if (s >= 1.0) // F(t) < 1 at every finite t, so the infimum is empty
            return std::numeric_limits<double>::infinity();
        double t = im.cap, F = im.cum.back();
        while (F < s && t < 1e15) {
            const double add = integrate(im.pushforward, t, 2.0 * t, im.tol);
            F += std::max(0.0, add);
            t *= 2.0;
            if (F >= s)
                return t; // coarse, refined below only for s within the table
        }
        return std::numeric_limits<double>::infinity();
    }
    // first knot with cum >= s, then monotone bisection inside the panel;
    // the lo/hi update keeps lo strictly below the crossing, so the limit is
    // inf{t : F(t) >= s} even across flat (zero-density) stretches
    const auto it = std::lower_bound(im.cum.begin(), im.cum.end(), s);
    const size_t k = it - im.cum.begin();
    if (k == 0)
        return 0.0;
    double lo = im.knots[k - 1], hi = im.knots[k];
    if (im.cdf(lo) >= s)
        return lo;
    for (int i = 0; i < INVERSE_BISECTIONS && (hi - lo) > 1e-15 * (1.0 + hi); i++) {
        const double mid = 0.5 * (lo + hi);
        if (im.cdf(mid) >= s)
            hi = mid;
        else
            lo = mid;
    }
    // Newton polish where the density is positive; stay inside the bracket
    double t = hi;
    for (int i = 0; i < INVERSE_NEWTON_STEPS; i++) {
        const double f = im.pushforward(t);
        if (!(f > 0))
            break;
        const double step = (im.cdf(t) - s) / f;
        const double next = t - step;
        if (next < lo || next > hi)
            break;
        t = next;
    }
    return t;
}

CumulativeProfile cumulative_profile(const RadialDensity& d, double tol)
{
    auto im = std::make_shared<CumulativeProfile::Impl>();
    im->dim = d.dim();
    im->support = d.support_radius();
    im->tol = tol;
    const double area = unit_sphere_area(d.dim());
    const int n = d.dim();
    im->pushforward = [d, area, n](double r) {
        return area * d.profile(r) * (n == 1 ? 1.0 : std::pow(r, n - 1));
    };
    im->profile = [d](double r) { return d.profile(r); };

    // effective cap: the support radius, or a horizon with negligible tail mass
    double cap = im->support;
    if (!std::isfinite(cap)) {
        cap = 1.0;
        for (int i = 0; i < 60; i++) {
            double tail;
            try {
                tail = integrate_to_infinity(im->pushforward, cap, tol);
            } catch (const DivergentIntegral&) {
                tail = 1.0; // keep expanding
            }
            if (tail < 0.01 * tol)
                break;
            cap *= 2.0;
            if (i == 59)
                throw NonNormalizable("tail mass of '" + d.name() + "' does not vanish");
        }
    }
    im->cap = cap;

    // knot layout: linear coverage plus geometric refinement toward the origin
    std::vector<double> knots;
    knots.reserve(2 * GRID_KNOTS + 2);
    knots.push_back(0.0);
    for (int i = 1; i <= GRID_KNOTS; i++)
        knots.push_back(cap * i / GRID_KNOTS);
    for (int i = 0; i < GRID_KNOTS; i++)
        knots.push_back(cap * std::pow(10.0, -8.0 * (GRID_KNOTS - i) / GRID_KNOTS));
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const double panel_tol = tol / (4.0 * knots.size());
    std::vector<double> cum(knots.size(), 0.0);
    for (size_t i = 1; i < knots.size(); i++) {
        const double panel = integrate(im->pushforward, knots[i - 1], knots[i], panel_tol);
        cum[i] = cum[i - 1] + std::max(0.0, panel);
    }
    im->knots = std::move(knots);
    im->cum = std::move(cum);

    double total = im->cum.back();
    if (!std::isfinite(im->support)) {
        try {
            total += std::max(0.0, integrate_to_infinity(im->pushforward, im->cap, tol));
        } catch (const DivergentIntegral&) {
            throw NonNormalizable("tail integral of '" + d.name() + "' diverges");
        }
    }
    if (std::fabs(total - 1.0) > 100.0 * tol)
        throw NonNormalizable("total mass of '" + d.name() + "' is " + std::to_string(total));

    CumulativeProfile F;
    F.impl_ = std::move(im);
    return F;
}

double inverse_profile(const CumulativeProfile& F, double s)
{
    return F.inverse(s);
}

double tail_mass(const CumulativeProfile& F, double R)
{
    if (R < 0)
        throw OutOfRange("tail_mass needs R >= 0");
    return clamp01(1.0 - F(R));
}

// --- moment -----------------------------------------------------------------

double moment(const RadialDensity& d, int p)
{
    if (p < 1)
        throw OutOfRange("moment order must be a positive integer");
    const double area = unit_sphere_area(d.dim());
    const double expo = d.dim() - 1 + p;
    auto g = [&d, expo](double r) { return std::pow(r, expo) * d.profile(r); };

    if (std::isfinite(d.support_radius()))
        return area * integrate(g, 0.0, d.support_radius(), 1e-12);

    double acc = integrate(g, 0.0, 10.0, 1e-12);
    double prev = std::numeric_limits<double>::infinity();
    int nondecreasing = 0;
    double lo = 10.0;
    for (int k = 0; k < MOMENT_MAX_DECADES; k++) {
        const double hi = lo * 10.0;
        const double panel = integrate(g, lo, hi, 1e-12);
        if (panel >= prev - 1e-300)
            nondecreasing++;
        else
            nondecreasing = 0;
        if (nondecreasing >= 3)
            return std::numeric_limits<double>::infinity();
        acc += panel;
        if (panel < 1e-14 * (1.0 + acc))
            return area * acc;
        prev = panel;
        lo = hi;
    }
    return std::numeric_limits<double>::infinity();
}

// --- GridDensity --------------------------------------------------------------

GridDensity::GridDensity(double ax, double ay, double bx, double by, int nx, int ny,
                         std::vector<double> values)
    : ax_(ax), ay_(ay), bx_(bx), by_(by), nx_(nx), ny_(ny), v_(std::move(values))
{
    if (nx_ < 2 || ny_ < 2 || !(bx_ > ax_) || !(by_ > ay_))
        throw OutOfRange("grid density needs at least 2x2 nodes over a proper rectangle");
    if (v_.size() != static_cast<size_t>(nx_) * ny_)
        throw OutOfRange("grid density value count mismatch");
}

GridDensity GridDensity::sample(const std::function<double(double, double)>& f,
                                double ax, double ay, double bx, double by, int nx, int ny)
{
    std::vector<double> vals(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; j++)
        for (int i = 0; i < nx; i++)
            vals[static_cast<size_t>(j) * nx + i] =
                f(ax + (bx - ax) * i / (nx - 1), ay + (by - ay) * j / (ny - 1));
    return GridDensity(ax, ay, bx, by, nx, ny, std::move(vals));
}

double GridDensity::operator()(double x, double y) const
{
    if (x < ax_ || x > bx_ || y < ay_ || y > by_)
        return 0.0;
    const double fx = (x - ax_) / (bx_ - ax_) * (nx_ - 1);
    const double fy = (y - ay_) / (by_ - ay_) * (ny_ - 1);
    const int i = std::min(nx_ - 2, static_cast<int>(fx));
    const int j = std::min(ny_ - 2, static_cast<int>(fy));
    const double tx = fx - i, ty = fy - j;
    auto at = [&](int ii, int jj) { return v_[static_cast<size_t>(jj) * nx_ + ii]; };
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
           (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
}

double GridDensity::mass() const
{
    const double hx = (bx_ - ax_) / (nx_ - 1), hy = (by_ - ay_) / (ny_ - 1);
    double sum = 0.0;
    for (int j = 0; j < ny_; j++)
        for (int i = 0; i < nx_; i++) {
            double w = 1.0;
            if (i == 0 || i == nx_ - 1)
                w *= 0.5;
            if (j == 0 || j == ny_ - 1)
                w *= 0.5;
            sum += w * v_[static_cast<size_t>(j) * nx_ + i];
        }
    return sum * hx * hy;
}

// --- CutoffMeasure -------------------------------------------------------------

bool CutoffMeasure::is_radial() const
{
    return std::holds_alternative<RadialDensity>(base_);
}

const RadialDensity& CutoffMeasure::base_radial() const
{
    if (!is_radial())
        throw OutOfRange("cutoff measure has a grid base");
    return std::get<RadialDensity>(base_);
}

RadialDensity CutoffMeasure::renormalized_radial() const
{
    if (shape_ != CutoffShape::ball)
        throw OutOfRange("renormalized_radial is defined for ball cutoffs only");
    const RadialDensity& base = base_radial();
    const double R = radius_, mass = mass_;
    ScalarFn prof = [base, R, mass](double r) { return r <= R ? base.profile(r) / mass : 0.0; };
    std::optional<ProfileLowerBound> lb;
    if (base.lower_bound())
        lb = ProfileLowerBound{base.lower_bound()->m / mass,
                               std::min(base.lower_bound()->tau, R)};
    return RadialDensity(base.dim(), std::move(prof), std::min(R, base.support_radius()), lb,
                         base.name() + "_cut");
}

double CutoffMeasure::density(const std::vector<double>& x) const
{
    double rr = 0.0, linf = 0.0;
    for (double c : x) {
        rr += c * c;
        linf = std::max(linf, std::fabs(c));
    }
    const double r = std::sqrt(rr);
    const bool inside = shape_ == CutoffShape::ball ? (r <= radius_) : (linf <= radius_);
    if (!inside)
        return 0.0;
    if (is_radial())
        return base_radial().profile(r) / mass_;
    if (x.size() != 2)
        throw DimensionMismatch("grid cutoff density expects 2D points");
    return std::get<GridDensity>(base_)(x[0], x[1]) / mass_;
}

namespace {

/// Monte Carlo estimate of P(|X|_inf <= R) for a radial law, by inverse-CDF radius
/// sampling and uniform directions. Fixed seed; standard error ~ 1/sqrt(samples).
double cube_mass_mc(const RadialDensity& d, const CumulativeProfile& F, double R,
                    std::uint64_t seed, long samples)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    long hits = 0;
    const int n = d.dim();
    if (n > 16)
        throw OutOfRange("cube cutoff sampling supports dimension <= 16");
    for (long s = 0; s < samples; s++) {
        const double r = F.inverse(unif(rng));
        double dir[16];
        double norm = 0.0;
        for (int i = 0; i < n; i++) {
            dir[i] = gauss(rng);
            norm += dir[i] * dir[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0)
            continue;
        double linf = 0.0;
        for (int i = 0; i < n; i++)
            linf = std::max(linf, std::fabs(r * dir[i] / norm));
        if (linf <= R)
            hits++;
    }
    return static_cast<double>(hits) / samples;
}

} // namespace

CutoffMeasure cutoff(const RadialDensity& d, CutoffShape shape, double R, double tol,
                     std::uint64_t mc_seed, long mc_samples)
{
    if (!(R > 0))
        throw EmptyCutoff("cutoff radius must be positive");
    CutoffMeasure out;
    out.base_ = d;
    out.shape_ = shape;
    out.radius_ = R;

    double mass;
    if (R >= d.support_radius()) {
        mass = 1.0; // full support either way: the ball/cube of radius R contains spt
    } else if (shape == CutoffShape::ball || d.dim() == 1) {
        const CumulativeProfile F = cumulative_profile(d, tol);
        mass = clamp01(F(R));
    } else if (d.dim() == 2) {
        auto f2 = [&d](double x, double y) { return d.profile(std::hypot(x, y)); };
        mass = clamp01(4.0 * integrate_2d(f2, 0.0, R, 0.0, R, tol));
    } else {
        const CumulativeProfile F = cumulative_profile(d, tol);
        mass = cube_mass_mc(d, F, R, mc_seed, mc_samples);
    }
    if (mass <= 10.0 * tol)
        throw EmptyCutoff("cutoff region mass " + std::to_string(mass) + " at R=" +
                          std::to_string(R));
    out.mass_ = mass;
    return out;
}

CutoffMeasure cutoff(const GridDensity& d, CutoffShape shape, double R)
{
    if (shape != CutoffShape::cube)
        throw OutOfRange("grid densities support cube cutoffs only");
    if (!(R > 0))
        throw EmptyCutoff("cutoff radius must be positive");
    // restrict to the cube, then measure by trapezoid sums on the restricted grid
    auto clipped = GridDensity::sample(
        [&d, R](double x, double y) {
            return (std::fabs(x) <= R && std::fabs(y) <= R) ? d(x, y) : 0.0;
        },
        d.ax(), d.ay(), d.bx(), d.by(), d.nx(), d.ny());
    const double mass = clipped.mass();
    if (mass <= 1e-9)
        throw EmptyCutoff("grid cutoff mass " + std::to_string(mass));
    CutoffMeasure out;
    out.base_ = std::move(clipped);
    out.shape_ = shape;
    out.radius_ = R;
    out.mass_ = mass;
    return out;
}

// --- LogConcaveDensity ---------------------------------------------------------

LogConcaveDensity::LogConcaveDensity(int dim, ScalarFn phi,
                                     std::optional<RadialAnchor> radial_anchor,
                                     std::optional<GlobalAnchor> global_anchor,
                                     std::string name)
    : dim_(dim), phi_(std::move(phi)), radial_anchor_(radial_anchor),
      global_anchor_(global_anchor), name_(std::move(name))
{
    if (dim_ < 1)
        throw OutOfRange("dimension must be >= 1");
}

double LogConcaveDensity::phi_prime(double r) const
{
    const double h = 1e-6 * std::max(1.0, std::fabs(r));
    if (r < h)
        return (phi_(r + h) - phi_(r)) / h;
    return (phi_(r + h) - phi_(r - h)) / (2.0 * h);
}

RadialDensity LogConcaveDensity::as_radial() const
{
    ScalarFn phi = phi_;
    return RadialDensity(dim_, [phi](double r) { return std::exp(-phi(r)); },
                         std::numeric_limits<double>::infinity(), std::nullopt, name_);
}

RadialAnchor LogConcaveDensity::tangent_anchor(double r0) const
{
    const double y = phi_prime(r0);
    if (!(y > 0))
        throw BadAnchor("subgradient at r0=" + std::to_string(r0) + " is not positive");
    return RadialAnchor{r0, y};
}

GlobalAnchor LogConcaveDensity::tangent_global_anchor(double r0) const
{
    const RadialAnchor ra = tangent_anchor(r0);
    return GlobalAnchor{ra.y, phi_(r0) - ra.y * r0};
}

LogConcaveDensity LogConcaveDensity::gaussian(int n)
{
    const double c = 0.5 * n * std::log(2.0 * M_PI);
    return LogConcaveDensity(n, [c](double r) { return 0.5 * r * r + c; }, std::nullopt,
                             std::nullopt, "gaussian");
}

LogConcaveDensity LogConcaveDensity::exponential(int n)
{
    const double c = std::log(unit_sphere_area(n) * std::tgamma(n));
    return LogConcaveDensity(n, [c](double r) { return r + c; }, std::nullopt, std::nullopt,
                             "exponential_radial");
}

} // namespace otcut
