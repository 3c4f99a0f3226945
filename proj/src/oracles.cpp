#include "otcut/oracles.hpp"
#include "otcut/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace otcut::oracle {

namespace {

/// composite Simpson on a fixed node count (n even panels)
double simpson_fixed(const std::function<double(double)>& f, double a, double b, int panels)
{
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; i++)
        sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// doubling composite Simpson, independent of the main adaptive kernel
double simpson_doubling(const std::function<double(double)>& f, double a, double b, double tol)
{
    double prev = simpson_fixed(f, a, b, 64);
    for (int panels = 128; panels <= (1 << 22); panels *= 2) {
        const double cur = simpson_fixed(f, a, b, panels);
        if (std::fabs(cur - prev) <= tol && std::isfinite(cur))
            return cur;
        prev = cur;
    }
    throw DivergentIntegral("oracle quadrature did not stabilize on [" + std::to_string(a) +
                            "," + std::to_string(b) + "]");
}

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open fixture file " + path.string());
    auto line = [&out](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); i++)
            out << (i ? "," : "") << cells[i];
        out << "\r\n";
    };
    line(header);
    for (const auto& r : rows)
        line(r);
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::vector<std::pair<double, double>>
discrete_ot_1d(std::vector<double> samples_F, std::vector<double> samples_G)
{
    if (samples_F.size() != samples_G.size())
        throw LengthMismatch("discrete_ot_1d needs equal sample counts, got " +
                             std::to_string(samples_F.size()) + " and " +
                             std::to_string(samples_G.size()));
    std::sort(samples_F.begin(), samples_F.end());
    std::sort(samples_G.begin(), samples_G.end());
    std::vector<std::pair<double, double>> pairing(samples_F.size());
    for (size_t i = 0; i < samples_F.size(); i++)
        pairing[i] = {samples_F[i], samples_G[i]};
    return pairing;
}

double w1_exact_1d(const std::function<double(double)>& F,
                   const std::function<double(double)>& G, double lo, double hi, double tol)
{
    if (!(hi > lo))
        return 0.0;
    auto gap = [&F, &G](double t) { return std::fabs(F(t) - G(t)); };
    return simpson_doubling(gap, lo, hi, tol);
}

GradientReport fd_gradient_check(const std::function<double(const std::vector<double>&)>& f,
                                 const std::vector<double>& point, double h_fd,
                                 const std::vector<double>& analytic_gradient)
{
    if (analytic_gradient.size() != point.size())
        throw LengthMismatch("analytic gradient dimension mismatch");
    GradientReport rep;
    rep.fd_gradient.resize(point.size());
    rep.max_deviation = 0.0;
    for (size_t i = 0; i < point.size(); i++) {
        std::vector<double> hi = point, lo = point;
        hi[i] += h_fd;
        lo[i] -= h_fd;
        rep.fd_gradient[i] = (f(hi) - f(lo)) / (2.0 * h_fd);
        rep.max_deviation =
            std::max(rep.max_deviation, std::fabs(rep.fd_gradient[i] - analytic_gradient[i]));
    }
    return rep;
}

std::pair<double, double> ManufacturedCase::mass_consistency() const
{
    auto mass2d = [](const std::function<double(double, double)>& f,
                     const std::array<double, 4>& rect) {
        const int panels = 512;
        auto row = [&](double y) {
            return simpson_fixed([&f, y](double x) { return f(x, y); }, rect[0], rect[2],
                                 panels);
        };
        return simpson_fixed(row, rect[1], rect[3], panels);
    };
    return {mass2d(f0, domain), mass2d(f1, image)};
}

ManufacturedCase make_manufactured(const std::string& name)
{
    ManufacturedCase c;
    c.name = name;
    if (name == "identity") {
        c.domain = {0.0, 0.0, 1.0, 1.0};
        c.image = c.domain;
        c.u_star = [](double x, double y) { return 0.5 * (x * x + y * y); };
        c.grad_u = [](double x, double y) { return std::array<double, 2>{x, y}; };
        c.det_hessian = [](double, double) { return 1.0; };
        c.f1 = [](double, double) { return 1.0; };
        c.f0 = [](double, double) { return 1.0; };
        return c;
    }
    if (name == "affine_diag(2,0.5)") {
        c.domain = {0.0, 0.0, 1.0, 1.0};
        c.image = {0.0, 0.0, 2.0, 0.5};
        c.u_star = [](double x, double y) { return x * x + 0.25 * y * y; };
        c.grad_u = [](double x, double y) { return std::array<double, 2>{2.0 * x, 0.5 * y}; };
        c.det_hessian = [](double, double) { return 1.0; }; // 2 * 0.5
        c.f1 = [](double, double) { return 1.0; };
        c.f0 = [](double, double) { return 1.0; };
        return c;
    }
    if (name == "quartic_bump") {
        // u* = |x|^2/2 + 0.05 (x^4 + y^4); grad has components t + 0.2 t^3, so the
        // image edge is 1.2 + 0.2 * 1.2^3 = 1.5456 and det D^2 u* is separable
        const double edge = 1.2, iedge = edge + 0.2 * edge * edge * edge;
        const double f1c = 1.0 / (iedge * iedge); // unit mass on the image
        c.domain = {0.0, 0.0, edge, edge};
        c.image = {0.0, 0.0, iedge, iedge};
        c.u_star = [](double x, double y) {
            return 0.5 * (x * x + y * y) + 0.05 * (x * x * x * x + y * y * y * y);
        };
        c.grad_u = [](double x, double y) {
            return std::array<double, 2>{x + 0.2 * x * x * x, y + 0.2 * y * y * y};
        };
        c.det_hessian = [](double x, double y) {
            return (1.0 + 0.6 * x * x) * (1.0 + 0.6 * y * y);
        };
        c.f1 = [f1c](double, double) { return f1c; };
        c.f0 = [f1c](double x, double y) {
            return f1c * (1.0 + 0.6 * x * x) * (1.0 + 0.6 * y * y);
        };
        return c;
    }
    throw UnknownCase("no manufactured case named '" + name + "'");
}

void write_fixtures(const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::vector<std::vector<std::string>> manifest;
    auto record = [&manifest](const std::string& file, const std::string& generator,
                              const std::string& seed, double tolerance) {
        manifest.push_back({file, generator, seed, fmt(tolerance)});
    };

    // deterministic quantile pairing for the Gaussian(n=2) -> unit-disk map:
    // source CDF 1 - exp(-t^2/2) inverted in closed form, target CDF t^2 likewise
    {
        const int N = 10000;
        std::vector<std::vector<std::string>> rows;
        rows.reserve(N);
        for (int i = 1; i <= N; i++) {
            const double s = (i - 0.5) / N;
            const double r = std::sqrt(-2.0 * std::log1p(-s));
            const double y = std::sqrt(s);
            rows.push_back({std::to_string(i), fmt(s), fmt(r), fmt(y)});
        }
        write_csv(fs::path(dir) / "quantile_pairs.csv", {"i", "s", "r", "target"}, rows);
        record("quantile_pairs.csv",
               "closed-form quantiles of the Gaussian radial CDF and the unit-disk CDF at "
               "s=(i-0.5)/N, N=10000",
               "none", 2.0 / N);
    }

    const double e_half = std::exp(-0.5), e_two = std::exp(-2.0);
    const double s1 = std::sqrt(1.0 - e_half);              // S(1), Gaussian -> disk
    const double s1_cut = std::sqrt((1.0 - e_half) / (1.0 - e_two)); // cutoff R=2

    // worked radial-transport values (all closed forms)
    {
        std::vector<std::vector<std::string>> rows = {
            {"s_gauss_disk_at_1", fmt(s1)},
            {"s_gauss_disk_cut2_at_1", fmt(s1_cut)},
            {"phi_gauss_disk_at_1", fmt(0.5 * (1.0 - s1) * (1.0 - s1))},
            {"t_unif_exp_at_half", fmt(std::log(2.0))},
            {"f_gauss2_at_1", fmt(1.0 - e_half)},
            {"f_gauss2_at_2", fmt(1.0 - e_two)},
            {"w1_exp_cut2", fmt(e_two * (1.0 + e_two) / (1.0 - e_two) + e_two)},
            {"w2_line_translation", fmt(1.0)},
        };
        write_csv(fs::path(dir) / "radial_worked.csv", {"name", "value"}, rows);
        record("radial_worked.csv", "closed-form radial map and distance values", "none",
               1e-9);
    }

    // worked rate-bound constants for the Gaussian(n=2) -> unit-disk pair and the
    // associated tail and W1 bounds
    {
        const double pi = M_PI;
        const double c_map = 1.0 / s1; // 2 / (m |S^1| p(1)) with m = 1/pi
        const double gamma = 2.05;     // |x| + diam(disk)/2 + eps at |x| = 1, eps = 0.05
        const double cost_M = 2.0;     // quadratic growth data
        const double c_lc = std::exp(1.5) / (2.0 * pi);
        const double m2_gauss = 2.0;   // second moment of the planar Gaussian
        // preimage constants for the same pair at |y| = 1/2: q = F_nu^{-1} o F_mu,
        // m = min Gaussian profile on [0, q(1/2)], M = sup of the disk profile
        const double q_half = std::sqrt(-2.0 * std::log(0.75));
        const double q_quarter = std::sqrt(-2.0 * std::log(0.9375));
        const double pre_m = 0.75 / (2.0 * pi);
        const double pre_c = (1.0 / pi) * 0.25 / (pre_m * q_quarter);
        const double x_cut = std::sqrt(-2.0 * std::log(1.0 - 0.25 * (1.0 - e_two)));
        std::vector<std::vector<std::string>> rows = {
            {"r0_gauss2", fmt(std::sqrt(2.0 * std::log(2.0)))},
            {"map_c_gauss_disk", fmt(c_map)},
            {"map_bound_R2", fmt(c_map * e_two)},
            {"map_gap_at_1_R2", fmt(s1_cut - s1)},
            {"potential_bound_R2_eps0p05", fmt(2.0 * cost_M * c_map * gamma * e_two)},
            {"preimage_q_half_gauss_disk", fmt(q_half)},
            {"preimage_c_gauss_disk", fmt(pre_c)},
            {"preimage_bound_R2", fmt(pre_c * e_two)},
            {"preimage_gap_at_half_R2", fmt(q_half - x_cut)},
            {"tail_lc_c_gauss2", fmt(c_lc)},
            {"tail_lc_bound_R2", fmt(2.0 * pi * c_lc * 2.0 * e_two)},
            {"tail_exact_gauss2_R2", fmt(e_two)},
            {"tail_moment_bound_p2_R2", fmt(m2_gauss / 4.0)},
            {"w1_lc_factor_n2_a1", fmt(7.0)},
            {"w1_lc_anchor_b_gauss2", fmt(std::log(2.0 * pi) - 0.5)},
            {"w1_lc_bound_gauss2_R2", fmt(7.0 * std::exp(0.5) * 4.0 * e_two)},
            {"w1_cut_bound_exp1_R2", fmt(5.0 * e_two)},
            {"w1_moment_bound_p2_R2", fmt(2.0 * m2_gauss / 2.0)},
            {"dm_map_exponent_p5_n2", fmt(5.0 / 62.0)},
            {"dm_potential_exponent", fmt(0.5)},
        };
        write_csv(fs::path(dir) / "rate_worked.csv", {"name", "value"}, rows);
        record("rate_worked.csv", "closed-form cutoff error bound constants", "none", 1e-9);
    }

    // envelope bound for n=2, alpha=1/2, C_H=1, h=0.01 on the unit eps-ball domain
    {
        const double alpha = 0.5, h = 0.01;
        const double beta = 0.25 * (2.0 * M_PI) * 1.0 / ((alpha + 1.0) * (alpha + 2.0));
        const double dx = std::pow(h / beta, 1.0 / (alpha + 2.0));
        std::vector<std::vector<std::string>> rows = {
            {"beta_n2_alpha_half", fmt(beta)},
            {"dx_h_0p01", fmt(dx)},
            {"envelope_bound_h_0p01", fmt(std::pow(dx, alpha))},
            {"exponent_alpha_half_n2", fmt(alpha / (alpha + 2.0))},
        };
        write_csv(fs::path(dir) / "envelope_worked.csv", {"name", "value"}, rows);
        record("envelope_worked.csv", "closed-form envelope bound constants", "none", 1e-9);
    }

    write_csv(fs::path(dir) / "manifest.csv", {"file", "generator", "seed", "tolerance"},
              manifest);
}

} // namespace otcut::oracle
