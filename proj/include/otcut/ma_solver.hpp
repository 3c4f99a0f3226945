#pragma once
#include "otcut/errors.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

namespace otcut::ma {

/// Uniform rectangular grid on [ax,bx] x [ay,by] with a wide-stencil width.
/// The requested spacing is snapped per axis so the endpoints are nodes; h()
/// reports the larger effective spacing (the sup-inf node distance).
struct Grid {
    double ax, ay, bx, by;
    int nx, ny;
    double hx, hy;
    int stencil_width;

    /// Throws DegenerateDomain on an empty rectangle, OutOfRange on h <= 0 or
    /// an even or too small stencil width, EmptyGrid when h exceeds an extent.
    static Grid make(double ax, double ay, double bx, double by, double h,
                     int stencil_width = 5);

    double h() const { return hx > hy ? hx : hy; }
    double x(int i) const { return ax + hx * i; }
    double y(int j) const { return ay + hy * j; }
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * nx + i;
    }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    bool on_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
    }
    bool contains(int i, int j) const {
        return i >= 0 && j >= 0 && i < nx && j < ny;
    }
};

/// Node values on a Grid, normalized to mean zero (the additive-constant
/// convention for potentials).
struct GridFunction {
    Grid grid;
    std::vector<double> v;

    explicit GridFunction(const Grid& g) : grid(g), v(g.size(), 0.0) {}
    GridFunction(const Grid& g, std::vector<double> values);

    double& at(int i, int j) { return v[grid.idx(i, j)]; }
    double at(int i, int j) const { return v[grid.idx(i, j)]; }
    double mean() const;
    /// subtract the mean; afterwards |mean| <= 1e-12 (asserted)
    void normalize();
};

/// integer stencil direction (primitive vector) with its physical step data
struct Direction {
    int p, q;
    double step2; // |(p hx, q hy)|^2
};

/// Primitive half-plane representatives with max(|p|,|q|) <= (width-1)/2;
/// width 3 gives the two axes and both diagonals, width 5 adds the eight
/// knight-like directions, and so on.
std::vector<Direction> make_directions(const Grid& g);

/// index pairs (a, b) into make_directions(g) with the two offsets orthogonal
/// as physical vectors; used by the determinant discretization
std::vector<std::array<int, 2>> orthogonal_pairs(const Grid& g,
                                                 const std::vector<Direction>& dirs);

/// Target domain Y of the gradient constraint, convex with the origin-centred
/// disk, an axis-aligned rectangle, or a convex polygon.
struct RectTarget {
    double ax, ay, bx, by;
};
struct DiskTarget {
    double radius;
};
struct PolygonTarget {
    std::vector<std::array<double, 2>> vertices; // counterclockwise, convex
};

class ConvexTarget {
public:
    static ConvexTarget rect(double ax, double ay, double bx, double by);
    static ConvexTarget disk(double radius);
    static ConvexTarget polygon(std::vector<std::array<double, 2>> vertices);

    /// exact Euclidean signed distance, negative inside
    double signed_distance(double x, double y) const;
    /// support function sup_{y in Y} w . y
    double support(double wx, double wy) const;

private:
    ConvexTarget() = default;
    std::variant<RectTarget, DiskTarget, PolygonTarget> shape_;
};

/// exact signed distance of y to the rectangle or convex polygon Omega
double signed_distance_rect(const ConvexTarget& omega, double x, double y);

/// iteration mode: closed-form nonlinear Gauss-Seidel sweeps with an explicit
/// Euler fallback, or plain Euler from the start
enum class SolveMode { sweep, euler };

struct SchemeConfig {
    double delta_gamma = 2.0;  // underestimation shift delta(h) = h^gamma
    double dt = 0.0;           // Euler step; 0 selects dt_c h^2 / (1 + f1 scale)
    double dt_c = 0.1;
    double residual_tol = 0.0; // 0 selects 1e-8 (1 + max f0)
    long max_iters = 20000;    // sweeps (or Euler steps)
    int stencil_width = 5;
    SolveMode mode = SolveMode::sweep;

    double delta(double h) const;
};

/// Second difference of u at (i, j) along the stencil offset d:
/// (u(x + d) - 2 u(x) + u(x - d)) / |d_phys|^2. Returns false without writing
/// when either neighbor leaves the grid (the direction is dropped there).
bool directional_second_difference(const GridFunction& u, int i, int j,
                                   const Direction& d, double* out);

/// min of the fitting directional second differences (the smallest-eigenvalue
/// surrogate); +inf when no direction fits (isolated corners)
double lambda1_discrete(const GridFunction& u, int i, int j,
                        const std::vector<Direction>& dirs);

/// min over fitting orthogonal pairs of max(D_a, 0) max(D_b, 0); +inf when no
/// pair fits
double det_discrete(const GridFunction& u, int i, int j,
                    const std::vector<Direction>& dirs,
                    const std::vector<std::array<int, 2>>& pairs);

/// gradient at a boundary node by one-sided inward differences (centered in a
/// direction where the node is interior)
std::array<double, 2> boundary_gradient(const GridFunction& u, int i, int j);

/// Residual of the underestimating monotone scheme at every node:
/// interior max{-f1(grad u) det + f0, -lambda1} - delta, boundary nodes take
/// the max with the upwind support-function branch of the gradient constraint.
GridFunction assemble_residual(const GridFunction& u, const std::vector<double>& f0,
                               const std::function<double(double, double)>& f1,
                               const ConvexTarget& target, const SchemeConfig& cfg);

struct SolveReport {
    long iterations = 0;
    double residual = 0.0;       // sup |residual - mean(residual)| at exit
    double residual_level = 0.0; // mean residual: the scheme's compatibility
                                 // constant, O(h) + delta(h) under refinement
    bool euler_fallback = false;
    double iterate_sup = 0.0;    // max of ||u||_inf over all iterates seen
};

/// Solve the scheme for the mean-zero grid potential. f0 holds node values of
/// the source density, f1 the target density (extended wherever iterate
/// gradients land).
///
/// The scheme is invariant under adding constants to u, so the residual can
/// only be driven to a constant level c, not to zero at every node; c is the
/// discrete compatibility defect and vanishes with h. Convergence is therefore
/// measured on the deviation sup|residual - mean(residual)|, which the
/// mean-zero renormalized iteration controls; the level is reported in
/// SolveReport::residual_level. Throws NoConvergence when max_iters passes
/// without the deviation reaching the tolerance.
///
/// init, when given, seeds the iteration (values are renormalized to mean
/// zero); refinement studies pass the interpolated coarse-grid solution here
/// to skip most of the transient. Defaults to a separable convex quadratic
/// mapping the grid rectangle onto the target bounding box.
GridFunction solve_scheme(const Grid& grid, const std::vector<double>& f0,
                          const std::function<double(double, double)>& f1,
                          const ConvexTarget& target, const SchemeConfig& cfg,
                          SolveReport* report = nullptr,
                          const GridFunction* init = nullptr);

/// centered (one-sided at the boundary) gradient of u at every node, as two
/// value arrays
std::array<std::vector<double>, 2> gradient_field(const GridFunction& u);

/// piecewise-constant nearest-neighbor extension: sup of u over the nearest
/// grid nodes (ties within 1e-12 h all count)
double extend_nearest_neighbor(const GridFunction& u, double x, double y);

} // namespace otcut::ma
