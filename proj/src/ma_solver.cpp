#include "otcut/ma_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace otcut::ma {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxNodes = 4'000'000;

std::string fmt_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

void check_width(int w) {
    if (w < 3 || w % 2 == 0)
        throw OutOfRange("stencil width must be an odd integer >= 3, got " +
                         std::to_string(w));
}

int gcd_abs(int a, int b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b != 0) {
        int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/// second difference along d when both symmetric neighbors are in the grid
bool second_diff(const GridFunction& u, int i, int j, const Direction& d,
                 double* out) {
    const Grid& g = u.grid;
    if (!g.contains(i + d.p, j + d.q) || !g.contains(i - d.p, j - d.q))
        return false;
    *out = (u.at(i + d.p, j + d.q) - 2.0 * u.at(i, j) + u.at(i - d.p, j - d.q)) /
           d.step2;
    return true;
}

/// One upwind branch of the gradient constraint H(grad u) <= 0. The signed
/// distance to the convex target is sup over unit w of (w . grad u - sigma(w));
/// each signed primitive offset d supplies the candidate w = d_phys/|d_phys|
/// with the upwind difference (u(x) - u(x - d))/|d_phys|. At a boundary node
/// the fitting offsets are exactly those in the closed outward half-space (the
/// obliqueness of the second boundary-value problem makes that set sufficient).
struct HBranch {
    int p, q;
    double step;
    double sigma;
};

std::vector<HBranch> make_hbranches(const Grid& g, int width,
                                    const ConvexTarget& target) {
    int m = (width - 1) / 2;
    std::vector<HBranch> out;
    for (int p = -m; p <= m; ++p)
        for (int q = -m; q <= m; ++q) {
            if ((p == 0 && q == 0) || gcd_abs(p, q) != 1)
                continue;
            double s = std::hypot(p * g.hx, q * g.hy);
            out.push_back(HBranch{p, q, s, target.support(p * g.hx / s, q * g.hy / s)});
        }
    return out;
}

struct Stencil {
    std::vector<Direction> dirs;
    std::vector<std::array<int, 2>> pairs;
    int width;
};

Stencil build_stencil(const Grid& g, int width_override) {
    Grid gw = g;
    if (width_override > 0)
        gw.stencil_width = width_override;
    Stencil st;
    st.dirs = make_directions(gw);
    st.pairs = orthogonal_pairs(gw, st.dirs);
    st.width = gw.stencil_width;
    return st;
}

double checked_f1(const std::function<double(double, double)>& f1, double gx,
                  double gy) {
    double v = f1(gx, gy);
    if (!std::isfinite(v) || v < 0.0)
        throw HypothesisViolated("target density must be finite and nonnegative "
                                 "wherever iterate gradients land; got " +
                                 fmt_double(v) + " at (" + fmt_double(gx) + ", " +
                                 fmt_double(gy) + ")");
    return v;
}

/// residual with a prebuilt stencil and support cache (the public
/// assemble_residual wraps this)
void assemble_into(const GridFunction& u, const std::vector<double>& f0,
                   const std::function<double(double, double)>& f1,
                   const Stencil& st, const std::vector<HBranch>& hb,
                   double delta, GridFunction* res) {
    const Grid& g = u.grid;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double val = -kInf;
            double l1 = kInf;
            for (const Direction& d : st.dirs) {
                double dd;
                if (second_diff(u, i, j, d, &dd))
                    l1 = std::min(l1, dd);
            }
            if (l1 < kInf)
                val = std::max(val, -l1);
            if (i > 0 && j > 0 && i < g.nx - 1 && j < g.ny - 1) {
                double det = kInf;
                for (const auto& pr : st.pairs) {
                    double da, db;
                    if (second_diff(u, i, j, st.dirs[pr[0]], &da) &&
                        second_diff(u, i, j, st.dirs[pr[1]], &db))
                        det = std::min(det, std::max(da, 0.0) * std::max(db, 0.0));
                }
                if (det < kInf) {
                    double gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.hx);
                    double gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * g.hy);
                    val = std::max(val,
                                   -checked_f1(f1, gx, gy) * det + f0[g.idx(i, j)]);
                }
            } else {
                for (const HBranch& b : hb) {
                    if (!g.contains(i - b.p, j - b.q))
                        continue;
                    double h_val =
                        (u.at(i, j) - u.at(i - b.p, j - b.q)) / b.step - b.sigma;
                    val = std::max(val, h_val);
                }
            }
            res->v[g.idx(i, j)] = val - delta;
        }
    }
}

/// Closed-form nonlinear Gauss-Seidel update of one node: every branch of the
/// residual is increasing in the node's own value, so the root of the max is
/// the min of the per-branch roots.
void gauss_seidel_node(GridFunction& u, const std::vector<double>& f0,
                       const std::function<double(double, double)>& f1,
                       const Stencil& st, const std::vector<HBranch>& hb,
                       double delta, int i, int j) {
    const Grid& g = u.grid;
    double t = kInf;
    // convexity branch: -Delta_v(t) = delta
    for (const Direction& d : st.dirs) {
        if (!g.contains(i + d.p, j + d.q) || !g.contains(i - d.p, j - d.q))
            continue;
        double sum = u.at(i + d.p, j + d.q) + u.at(i - d.p, j - d.q);
        t = std::min(t, 0.5 * sum + 0.5 * delta * d.step2);
    }
    if (i > 0 && j > 0 && i < g.nx - 1 && j < g.ny - 1) {
        double gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.hx);
        double gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * g.hy);
        double f1v = checked_f1(f1, gx, gy);
        if (f1v > 0.0) {
            double gval = (f0[g.idx(i, j)] - delta) / f1v;
            if (gval > 0.0) {
                // determinant branch: per orthogonal pair solve
                // (alpha - beta t)(gamma - eta t) = gval for the smaller root,
                // where both clamped factors are still positive
                for (const auto& pr : st.pairs) {
                    const Direction& da = st.dirs[pr[0]];
                    const Direction& db = st.dirs[pr[1]];
                    if (!g.contains(i + da.p, j + da.q) ||
                        !g.contains(i - da.p, j - da.q) ||
                        !g.contains(i + db.p, j + db.q) ||
                        !g.contains(i - db.p, j - db.q))
                        continue;
                    double sa = u.at(i + da.p, j + da.q) + u.at(i - da.p, j - da.q);
                    double sb = u.at(i + db.p, j + db.q) + u.at(i - db.p, j - db.q);
                    double alpha = sa / da.step2, beta = 2.0 / da.step2;
                    double gamma = sb / db.step2, eta = 2.0 / db.step2;
                    double qa = beta * eta;
                    double qb = alpha * eta + gamma * beta;
                    double qc = alpha * gamma - gval;
                    // discriminant = (alpha eta - gamma beta)^2 + 4 beta eta gval > 0
                    double disc = qb * qb - 4.0 * qa * qc;
                    t = std::min(t, (qb - std::sqrt(disc)) / (2.0 * qa));
                }
            }
            // gval <= 0 means f0 <= delta: the branch tops out at f0 and never
            // reaches delta, so it imposes no root
        }
    } else {
        for (const HBranch& b : hb) {
            if (!g.contains(i - b.p, j - b.q))
                continue;
            t = std::min(t, u.at(i - b.p, j - b.q) + b.step * (b.sigma + delta));
        }
    }
    if (t < kInf)
        u.at(i, j) = t;
}

void gauss_seidel_sweep(GridFunction& u, const std::vector<double>& f0,
                        const std::function<double(double, double)>& f1,
                        const Stencil& st, const std::vector<HBranch>& hb,
                        double delta, int ordering) {
    const Grid& g = u.grid;
    // the four lexicographic orderings, as in fast-sweeping methods
    bool iup = ordering == 0 || ordering == 2;
    bool jup = ordering == 0 || ordering == 1;
    for (int jj = 0; jj < g.ny; ++jj) {
        int j = jup ? jj : g.ny - 1 - jj;
        for (int ii = 0; ii < g.nx; ++ii) {
            int i = iup ? ii : g.nx - 1 - ii;
            gauss_seidel_node(u, f0, f1, st, hb, delta, i, j);
        }
    }
}

double sup_abs_minus(const std::vector<double>& v, double level) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x - level));
    return m;
}

std::array<double, 4> target_bbox(const ConvexTarget& t) {
    // recover an axis-aligned bounding box from four support values
    return {-t.support(-1.0, 0.0), -t.support(0.0, -1.0), t.support(1.0, 0.0),
            t.support(0.0, 1.0)};
}

} // namespace

Grid Grid::make(double ax, double ay, double bx, double by, double h,
                int stencil_width) {
    if (!(bx > ax) || !(by > ay))
        throw DegenerateDomain("rectangle [" + fmt_double(ax) + ", " +
                               fmt_double(bx) + "] x [" + fmt_double(ay) + ", " +
                               fmt_double(by) + "] has empty interior");
    if (!(h > 0.0))
        throw OutOfRange("grid spacing must be positive, got " + fmt_double(h));
    check_width(stencil_width);
    Grid g;
    g.ax = ax;
    g.ay = ay;
    g.bx = bx;
    g.by = by;
    g.stencil_width = stencil_width;
    long nx = std::lround((bx - ax) / h) + 1;
    long ny = std::lround((by - ay) / h) + 1;
    if (nx < 2 || ny < 2)
        throw EmptyGrid("spacing " + fmt_double(h) +
                        " leaves fewer than two nodes along an axis");
    if (static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) > kMaxNodes)
        throw OutOfRange("grid would exceed " + std::to_string(kMaxNodes) +
                         " nodes");
    g.nx = static_cast<int>(nx);
    g.ny = static_cast<int>(ny);
    g.hx = (bx - ax) / (nx - 1);
    g.hy = (by - ay) / (ny - 1);
    return g;
}

GridFunction::GridFunction(const Grid& g, std::vector<double> values)
    : grid(g), v(std::move(values)) {
    if (v.size() != g.size())
        throw LengthMismatch("expected " + std::to_string(g.size()) +
                             " node values, got " + std::to_string(v.size()));
}

double GridFunction::mean() const {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

void GridFunction::normalize() {
    double m = mean();
    for (double& x : v)
        x -= m;
    m = mean();
    if (std::abs(m) > 1e-12)
        for (double& x : v)
            x -= m;
}

std::vector<Direction> make_directions(const Grid& g) {
    check_width(g.stencil_width);
    int m = (g.stencil_width - 1) / 2;
    std::vector<Direction> dirs;
    for (int p = 0; p <= m; ++p) {
        for (int q = -m; q <= m; ++q) {
            if (p == 0 && q <= 0)
                continue; // half-plane representatives: p > 0, or p = 0 and q > 0
            if (gcd_abs(p, q) != 1)
                continue;
            double sx = p * g.hx;
            double sy = q * g.hy;
            dirs.push_back(Direction{p, q, sx * sx + sy * sy});
        }
    }
    return dirs;
}

std::vector<std::array<int, 2>> orthogonal_pairs(const Grid& g,
                                                 const std::vector<Direction>& dirs) {
    std::vector<std::array<int, 2>> pairs;
    for (std::size_t a = 0; a < dirs.size(); ++a) {
        for (std::size_t b = a + 1; b < dirs.size(); ++b) {
            double dot = dirs[a].p * dirs[b].p * g.hx * g.hx +
                         dirs[a].q * dirs[b].q * g.hy * g.hy;
            double scale = std::sqrt(dirs[a].step2 * dirs[b].step2);
            if (std::abs(dot) <= 1e-9 * scale)
                pairs.push_back({int(a), int(b)});
        }
    }
    return pairs;
}

ConvexTarget ConvexTarget::rect(double ax, double ay, double bx, double by) {
    if (!(bx > ax) || !(by > ay))
        throw DegenerateDomain("target rectangle has empty interior");
    ConvexTarget t;
    t.shape_ = RectTarget{ax, ay, bx, by};
    return t;
}

ConvexTarget ConvexTarget::disk(double radius) {
    if (!(radius > 0.0))
        throw DegenerateDomain("target disk radius must be positive, got " +
                               fmt_double(radius));
    ConvexTarget t;
    t.shape_ = DiskTarget{radius};
    return t;
}

ConvexTarget ConvexTarget::polygon(std::vector<std::array<double, 2>> vertices) {
    std::size_t n = vertices.size();
    if (n < 3)
        throw DegenerateDomain("polygon needs at least 3 vertices, got " +
                               std::to_string(n));
    double scale = 1.0;
    for (const auto& v : vertices)
        scale = std::max({scale, std::abs(v[0]), std::abs(v[1])});
    for (std::size_t k = 0; k < n; ++k) {
        const auto& a = vertices[k];
        const auto& b = vertices[(k + 1) % n];
        const auto& c = vertices[(k + 2) % n];
        double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (cross <= 1e-12 * scale * scale)
            throw DegenerateDomain(
                "polygon vertices must be in strictly convex counterclockwise "
                "position (turn " +
                std::to_string(k) + " has cross product " + fmt_double(cross) + ")");
    }
    ConvexTarget t;
    t.shape_ = PolygonTarget{std::move(vertices)};
    return t;
}

double ConvexTarget::signed_distance(double x, double y) const {
    if (const auto* r = std::get_if<RectTarget>(&shape_)) {
        double dx = std::max(r->ax - x, x - r->bx);
        double dy = std::max(r->ay - y, y - r->by);
        if (dx <= 0.0 && dy <= 0.0)
            return std::max(dx, dy);
        return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
    }
    if (const auto* d = std::get_if<DiskTarget>(&shape_))
        return std::hypot(x, y) - d->radius;
    const auto& poly = std::get<PolygonTarget>(shape_).vertices;
    std::size_t n = poly.size();
    double inside = -kInf;
    double outside = kInf;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& a = poly[k];
        const auto& b = poly[(k + 1) % n];
        double ex = b[0] - a[0], ey = b[1] - a[1];
        double len = std::hypot(ex, ey);
        // outward normal of a counterclockwise edge
        double plane = ((x - a[0]) * ey - (y - a[1]) * ex) / len;
        inside = std::max(inside, plane);
        double t = ((x - a[0]) * ex + (y - a[1]) * ey) / (ex * ex + ey * ey);
        t = std::clamp(t, 0.0, 1.0);
        outside = std::min(outside, std::hypot(x - (a[0] + t * ex),
                                               y - (a[1] + t * ey)));
    }
    // inside a convex polygon the nearest boundary point is the perpendicular
    // foot on an edge, so the deepest half-plane value is the signed distance
    return inside <= 0.0 ? inside : outside;
}

double ConvexTarget::support(double wx, double wy) const {
    if (const auto* r = std::get_if<RectTarget>(&shape_))
        return std::max(wx * r->ax, wx * r->bx) + std::max(wy * r->ay, wy * r->by);
    if (const auto* d = std::get_if<DiskTarget>(&shape_))
        return d->radius * std::hypot(wx, wy);
    const auto& poly = std::get<PolygonTarget>(shape_).vertices;
    double best = -kInf;
    for (const auto& v : poly)
        best = std::max(best, wx * v[0] + wy * v[1]);
    return best;
}

double signed_distance_rect(const ConvexTarget& omega, double x, double y) {
    return omega.signed_distance(x, y);
}

double SchemeConfig::delta(double h) const {
    if (!(delta_gamma > 0.0))
        throw OutOfRange("delta exponent must be positive, got " +
                         fmt_double(delta_gamma));
    return std::pow(h, delta_gamma);
}

bool directional_second_difference(const GridFunction& u, int i, int j,
                                   const Direction& d, double* out) {
    return second_diff(u, i, j, d, out);
}

double lambda1_discrete(const GridFunction& u, int i, int j,
                        const std::vector<Direction>& dirs) {
    double l1 = kInf;
    for (const Direction& d : dirs) {
        double dd;
        if (second_diff(u, i, j, d, &dd))
            l1 = std::min(l1, dd);
    }
    return l1;
}

double det_discrete(const GridFunction& u, int i, int j,
                    const std::vector<Direction>& dirs,
                    const std::vector<std::array<int, 2>>& pairs) {
    double det = kInf;
    for (const auto& pr : pairs) {
        double da, db;
        if (second_diff(u, i, j, dirs[pr[0]], &da) &&
            second_diff(u, i, j, dirs[pr[1]], &db))
            det = std::min(det, std::max(da, 0.0) * std::max(db, 0.0));
    }
    return det;
}

std::array<double, 2> boundary_gradient(const GridFunction& u, int i, int j) {
    const Grid& g = u.grid;
    double gx, gy;
    if (i == 0)
        gx = (u.at(1, j) - u.at(0, j)) / g.hx;
    else if (i == g.nx - 1)
        gx = (u.at(i, j) - u.at(i - 1, j)) / g.hx;
    else
        gx = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * g.hx);
    if (j == 0)
        gy = (u.at(i, 1) - u.at(i, 0)) / g.hy;
    else if (j == g.ny - 1)
        gy = (u.at(i, j) - u.at(i, j - 1)) / g.hy;
    else
        gy = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * g.hy);
    return {gx, gy};
}

GridFunction assemble_residual(const GridFunction& u, const std::vector<double>& f0,
                               const std::function<double(double, double)>& f1,
                               const ConvexTarget& target, const SchemeConfig& cfg) {
    const Grid& g = u.grid;
    if (f0.size() != g.size())
        throw LengthMismatch("source density has " + std::to_string(f0.size()) +
                             " values for " + std::to_string(g.size()) + " nodes");
    Stencil st = build_stencil(g, cfg.stencil_width);
    std::vector<HBranch> hb = make_hbranches(g, st.width, target);
    GridFunction res(g);
    assemble_into(u, f0, f1, st, hb, cfg.delta(g.h()), &res);
    return res;
}

GridFunction solve_scheme(const Grid& grid, const std::vector<double>& f0,
                          const std::function<double(double, double)>& f1,
                          const ConvexTarget& target, const SchemeConfig& cfg,
                          SolveReport* report, const GridFunction* init) {
    if (f0.size() != grid.size())
        throw LengthMismatch("source density has " + std::to_string(f0.size()) +
                             " values for " + std::to_string(grid.size()) +
                             " nodes");
    double f0max = 0.0;
    for (std::size_t k = 0; k < f0.size(); ++k) {
        if (!std::isfinite(f0[k]) || f0[k] < 0.0)
            throw HypothesisViolated("source density must be finite and "
                                     "nonnegative; node " +
                                     std::to_string(k) + " has " +
                                     fmt_double(f0[k]));
        f0max = std::max(f0max, f0[k]);
    }
    if (cfg.max_iters < 1)
        throw OutOfRange("max_iters must be at least 1");
    if (!(cfg.dt_c > 0.0))
        throw OutOfRange("dt_c must be positive, got " + fmt_double(cfg.dt_c));
    if (cfg.residual_tol < 0.0)
        throw OutOfRange("residual_tol must be nonnegative, got " +
                         fmt_double(cfg.residual_tol));

    Stencil st = build_stencil(grid, cfg.stencil_width);
    std::vector<HBranch> hb = make_hbranches(grid, st.width, target);
    double h = grid.h();
    double delta = cfg.delta(h);
    std::array<double, 4> bb = target_bbox(target);

    double f1max = 0.0;
    for (int a = 0; a <= 16; ++a)
        for (int b = 0; b <= 16; ++b) {
            double px = bb[0] + (bb[2] - bb[0]) * a / 16.0;
            double py = bb[1] + (bb[3] - bb[1]) * b / 16.0;
            f1max = std::max(f1max, std::abs(f1(px, py)));
        }
    if (f1max == 0.0)
        throw HypothesisViolated(
            "target density samples are identically zero over the target "
            "bounding box; it must be positive on the target");

    double tol = cfg.residual_tol > 0.0 ? cfg.residual_tol : 1e-8 * (1.0 + f0max);
    double dt = cfg.dt > 0.0 ? cfg.dt : cfg.dt_c * h * h / (1.0 + f1max);

    // initial guess: caller-provided warm start, or the separable quadratic
    // whose gradient maps the grid rectangle onto the target bounding box
    GridFunction u(grid);
    if (init != nullptr) {
        if (init->v.size() != grid.size())
            throw LengthMismatch("initial guess has " +
                                 std::to_string(init->v.size()) +
                                 " values for " + std::to_string(grid.size()) +
                                 " nodes");
        u.v = init->v;
    } else {
        double a_x = (bb[2] - bb[0]) / (grid.bx - grid.ax);
        double b_x = bb[0] - a_x * grid.ax;
        double a_y = (bb[3] - bb[1]) / (grid.by - grid.ay);
        double b_y = bb[1] - a_y * grid.ay;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                double x = grid.x(i), y = grid.y(j);
                u.at(i, j) =
                    0.5 * a_x * x * x + b_x * x + 0.5 * a_y * y * y + b_y * y;
            }
    }
    u.normalize();

    GridFunction res(grid);
    assemble_into(u, f0, f1, st, hb, delta, &res);
    double level = res.mean();
    double dev = sup_abs_minus(res.v, level);

    double iterate_sup = 0.0;
    auto track_sup = [&]() {
        for (double x : u.v)
            iterate_sup = std::max(iterate_sup, std::abs(x));
    };
    track_sup();

    // best state seen so far; the Euler phase restarts from it
    std::vector<double> best_u = u.v;
    std::vector<double> best_res = res.v;
    double best_level = level;
    double best_dev = dev;
    auto note_best = [&]() {
        if (dev < best_dev) {
            best_u = u.v;
            best_res = res.v;
            best_level = level;
            best_dev = dev;
        }
    };

    bool euler = cfg.mode == SolveMode::euler;
    bool fell_back = false;
    long iters = 0;

    // Phase 1: sweeps of nodewise branch roots at the level-shifted residual
    // equation. The shift is updated with heavy damping because the sweep
    // response to the level is strongly amplified (each residual entry sees
    // neighbor changes through 1/h^2 weights), and an undamped update can
    // oscillate. Sweeps converge fast when they converge, so run them until
    // the deviation stalls, then hand the best state to the Euler phase.
    if (!euler) {
        double lev_used = level;
        double phase_best = dev;
        int stall = 0;
        while (dev > tol && iters < cfg.max_iters) {
            ++iters;
            gauss_seidel_sweep(u, f0, f1, st, hb, delta + lev_used,
                               int(iters % 4));
            u.normalize();
            track_sup();
            assemble_into(u, f0, f1, st, hb, delta, &res);
            level = res.mean();
            dev = sup_abs_minus(res.v, level);
            if (!std::isfinite(dev))
                break;
            note_best();
            lev_used += 0.2 * (level - lev_used);
            if (dev < phase_best * (1.0 - 1e-3)) {
                phase_best = dev;
                stall = 0;
            } else if (++stall >= 40) {
                break;
            }
        }
        if (dev > tol) {
            fell_back = true;
            u.v = best_u;
            res.v = best_res;
            level = best_level;
            dev = best_dev;
        }
    }

    // Phase 2: forward Euler with accept/reject step control. Progress is
    // measured on a snapshot every window; a worse deviation restores the
    // snapshot and shrinks dt, so the phase never moves away from the
    // solution even when dt probes past the stability limit.
    if (dev > tol) {
        std::vector<double> snap_u = u.v;
        std::vector<double> snap_res = res.v;
        double snap_level = level;
        double snap_dev = dev;
        const int window = 25;
        int since = 0;
        while (true) {
            if (dev <= tol)
                break;
            if (iters >= cfg.max_iters)
                throw NoConvergence(static_cast<std::size_t>(iters), best_dev,
                                    "residual deviation " + fmt_double(best_dev) +
                                        " still above tolerance " +
                                        fmt_double(tol) + " after " +
                                        std::to_string(iters) + " iterations");
            ++iters;
            for (std::size_t k = 0; k < u.v.size(); ++k)
                u.v[k] -= dt * res.v[k];
            u.normalize();
            track_sup();
            assemble_into(u, f0, f1, st, hb, delta, &res);
            level = res.mean();
            dev = sup_abs_minus(res.v, level);
            ++since;
            bool blew_up = !std::isfinite(dev);
            if (blew_up || since >= window) {
                if (!blew_up && dev < snap_dev) {
                    snap_u = u.v;
                    snap_res = res.v;
                    snap_level = level;
                    snap_dev = dev;
                    dt *= 2.0;
                    note_best();
                } else {
                    u.v = snap_u;
                    res.v = snap_res;
                    level = snap_level;
                    dev = snap_dev;
                    dt *= 0.25;
                }
                since = 0;
            }
        }
    }
    if (report != nullptr) {
        report->iterations = iters;
        report->residual = dev;
        report->residual_level = level;
        report->euler_fallback = fell_back;
        report->iterate_sup = iterate_sup;
    }
    return u;
}

std::array<std::vector<double>, 2> gradient_field(const GridFunction& u) {
    const Grid& g = u.grid;
    std::vector<double> gx(g.size()), gy(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            auto grad = boundary_gradient(u, i, j);
            gx[g.idx(i, j)] = grad[0];
            gy[g.idx(i, j)] = grad[1];
        }
    return {std::move(gx), std::move(gy)};
}

double extend_nearest_neighbor(const GridFunction& u, double x, double y) {
    const Grid& g = u.grid;
    double slack = 1e-9 * (1.0 + g.h());
    if (x < g.ax - slack || x > g.bx + slack || y < g.ay - slack ||
        y > g.by + slack)
        throw OutOfRange("point (" + fmt_double(x) + ", " + fmt_double(y) +
                         ") lies outside the computational rectangle");
    double fx = (x - g.ax) / g.hx;
    double fy = (y - g.ay) / g.hy;
    int ix[2] = {std::clamp(int(std::floor(fx)), 0, g.nx - 1),
                 std::clamp(int(std::ceil(fx)), 0, g.nx - 1)};
    int iy[2] = {std::clamp(int(std::floor(fy)), 0, g.ny - 1),
                 std::clamp(int(std::ceil(fy)), 0, g.ny - 1)};
    double d2min = kInf;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            double dx = x - g.x(ix[a]);
            double dy = y - g.y(iy[b]);
            d2min = std::min(d2min, dx * dx + dy * dy);
        }
    double best = -kInf;
    double tie = 1e-12 * (1.0 + d2min);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            double dx = x - g.x(ix[a]);
            double dy = y - g.y(iy[b]);
            if (dx * dx + dy * dy <= d2min + tie)
                best = std::max(best, u.at(ix[a], iy[b]));
        }
    return best;
}

} // namespace otcut::ma
