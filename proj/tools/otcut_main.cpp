// otcut: batch driver for the cutoff transport studies and the direct
// Monge-Ampere solver. Exit codes: 0 success, 2 configuration error,
// 3 numeric failure, 4 a measured value exceeded an applicable bound.
#include "otcut/errors.hpp"
#include "otcut/studies.hpp"
#include "otcut/version.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <string>

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    std::string r_grid;
    std::string h_grid;
    unsigned long long seed = 0;
    std::string plots;
    CLI::App* sub = nullptr;
};

void attach(CLI::App* sub, CommonOpts& o) {
    o.sub = sub;
    sub->add_option("--config", o.config, "key = value configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (default: out)");
    sub->add_option("--r-grid", o.r_grid, "comma-separated cutoff radii");
    sub->add_option("--h-grid", o.h_grid, "comma-separated grid spacings");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--plots", o.plots, "emit SVG plots")
        ->check(CLI::IsMember({"on", "off"}));
}

otcut::KeyValueConfig load(const CommonOpts& o) {
    otcut::KeyValueConfig kv;
    if (!o.config.empty()) kv = otcut::KeyValueConfig::from_file(o.config);
    if (o.sub->count("--out")) kv.set("out_dir", o.out);
    if (o.sub->count("--r-grid")) kv.set("r_grid", o.r_grid);
    if (o.sub->count("--h-grid")) kv.set("h_grid", o.h_grid);
    if (o.sub->count("--seed")) kv.set("seed", std::to_string(o.seed));
    if (o.sub->count("--plots")) kv.set("plots", o.plots);
    return kv;
}

int report_outcome(const otcut::StudyReport& rep, const std::string& out_dir) {
    std::printf("wrote %zu files to %s (%ld rows, %ld violations, %.2f s)\n",
                rep.files.size(), out_dir.c_str(), rep.rows, rep.violations,
                rep.wall_seconds);
    return rep.violations > 0 ? 4 : 0;
}

int run_kind(otcut::StudyKind kind, const CommonOpts& o) {
    otcut::KeyValueConfig kv = load(o);
    otcut::StudyConfig cfg = otcut::StudyConfig::from_config(kind, kv);
    otcut::StudyReport rep = otcut::run_study(cfg);
    return report_outcome(rep, cfg.out_dir);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cutoff optimal transport studies"};
    app.set_version_flag("--version", otcut::kVersion);
    app.require_subcommand(1);

    CommonOpts radial, tails, w1, envelope, pointwise, masolve, mavalidate, maradial;
    std::string radial_kind = "map";

    CLI::App* s_radial =
        app.add_subcommand("radial-study", "exact radial maps and cutoff gaps");
    attach(s_radial, radial);
    s_radial->add_option("--kind", radial_kind, "map or potential gaps")
        ->check(CLI::IsMember({"map", "potential"}));

    attach(app.add_subcommand("tail-study", "tail mass decay against its bounds"),
           tails);
    attach(app.add_subcommand("w1-study", "W1 cutoff distance chain"), w1);
    attach(app.add_subcommand("envelope-check",
                              "Holder envelope bound against random functions"),
           envelope);
    attach(app.add_subcommand("pointwise-rate", "pointwise rate exponents and bounds"),
           pointwise);
    attach(app.add_subcommand("ma-solve", "direct Monge-Ampere solve"), masolve);
    attach(app.add_subcommand("ma-validate", "scheme certificates"), mavalidate);
    attach(app.add_subcommand("ma-radial", "scheme against the radial reference"),
           maradial);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (radial.sub->parsed()) {
            return run_kind(radial_kind == "potential"
                                ? otcut::StudyKind::radial_potential
                                : otcut::StudyKind::radial_map,
                            radial);
        }
        if (tails.sub->parsed()) return run_kind(otcut::StudyKind::tails, tails);
        if (w1.sub->parsed()) return run_kind(otcut::StudyKind::w1, w1);
        if (envelope.sub->parsed())
            return run_kind(otcut::StudyKind::envelope, envelope);
        if (pointwise.sub->parsed())
            return run_kind(otcut::StudyKind::pointwise_rate, pointwise);
        if (mavalidate.sub->parsed())
            return run_kind(otcut::StudyKind::ma_validate, mavalidate);
        if (maradial.sub->parsed())
            return run_kind(otcut::StudyKind::ma_radial, maradial);
        if (masolve.sub->parsed()) {
            otcut::KeyValueConfig kv = load(masolve);
            std::string out = kv.get_string("out_dir", "out");
            return report_outcome(otcut::run_ma_solve(kv, out), out);
        }
    } catch (const otcut::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const otcut::NoConvergence& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const otcut::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    }
    return 2;
}
