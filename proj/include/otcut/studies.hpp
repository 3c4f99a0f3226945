#pragma once
#include "otcut/config.hpp"
#include "otcut/measures.hpp"

#include <string>
#include <vector>

namespace otcut {

/// the eight batch studies the CLI can run
enum class StudyKind {
    radial_map,
    radial_potential,
    tails,
    w1,
    envelope,
    pointwise_rate,
    ma_validate,
    ma_radial,
};

/// name <-> enum ("radial-map", "radial-potential", "tails", "w1", "envelope",
/// "pointwise-rate", "ma-validate", "ma-radial"); ConfigError on anything else
StudyKind study_kind_from_name(const std::string& name);
std::string study_kind_name(StudyKind kind);

/// Resolved study configuration. Grids are validated strictly increasing and
/// density/cost names resolvable at construction.
struct StudyConfig {
    StudyKind kind = StudyKind::radial_map;
    std::string source_density = "uniform_ball";
    std::string target_density = "gaussian";
    std::string cost = "quadratic";
    std::vector<double> r_grid;
    std::vector<double> h_grid;
    std::vector<double> eval_grid;
    unsigned long long seed = 20240817;
    std::string out_dir = "out";
    bool plots = true;
    KeyValueConfig raw; // full key-value set, echoed in the manifest

    /// apply per-kind defaults, read overrides from kv, validate; ConfigError
    /// names the offending key
    static StudyConfig from_config(StudyKind kind, const KeyValueConfig& kv);
};

/// files written, row count, and the number of rows where a measured value
/// exceeded its applicable bound (drives the CLI exit code)
struct StudyReport {
    std::vector<std::string> files;
    long rows = 0;
    long violations = 0;
    double wall_seconds = 0.0;
};

/// Run one study: compute rows (grid points distributed over a bounded worker
/// pool), sort them by key, write CSVs and optional SVGs plus manifest.json
/// into cfg.out_dir. Partial CSVs are flushed before an abort propagates.
StudyReport run_study(const StudyConfig& cfg);

/// direct Monge-Ampere solve driven by config keys (domain, h, densities,
/// target shape, scheme settings); writes u.csv, grad.csv, residual.csv and
/// manifest.json into out_dir
StudyReport run_ma_solve(const KeyValueConfig& kv, const std::string& out_dir);

/// Resolve a named radial density: uniform_ball, gaussian, exponential_radial,
/// pareto_tail(p). ConfigError for unknown names (gaussian_mixture is grid
/// sampled and only valid for the MA solver).
RadialDensity density_from_name(const std::string& name, int n);

/// The zoo's non-radial member: a two-component Gaussian mixture sampled on
/// the given rectangle, trapezoid mass normalized to 1.
GridDensity gaussian_mixture_density(double ax, double ay, double bx, double by,
                                     int nx, int ny);

} // namespace otcut
