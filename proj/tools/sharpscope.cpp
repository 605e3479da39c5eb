// sharpscope - training-dynamics phenomenology at desk scale: SGD trajectories
// with Hessian sharpness probes, early-training critical-constant scans,
// intermediate-saturation curves, and uv-model closed-form validation.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

#include "sharpscope/sweep/commands.hpp"
#include "sharpscope/uvlab/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitValidatorFailure = 3;

struct ManifestOverrides {
    std::optional<double> grid_xmax;
    std::optional<double> grid_step;
    std::optional<long> t1;
    std::optional<double> K;
    std::optional<long> probe_m;
    std::optional<int> probe_iters;
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<std::string> data;
    std::optional<std::string> out_dir;

    void apply(sharpscope::sweep::SweepManifest& m) const {
        if (grid_xmax) m.grid_xmax = *grid_xmax;
        if (grid_step) m.grid_step = *grid_step;
        if (t1) m.T1 = *t1;
        if (K) m.K = *K;
        if (probe_m) m.probe_m = *probe_m;
        if (probe_iters) m.probe_iters = *probe_iters;
        if (seeds) m.seeds = *seeds;
        if (data) m.data = *data;
        if (out_dir) m.out_dir = *out_dir;
    }
};

void add_override_flags(CLI::App* cmd, ManifestOverrides& ov) {
    cmd->add_option("--grid-xmax", ov.grid_xmax, "Largest grid exponent x (c = 2^x)");
    cmd->add_option("--grid-step", ov.grid_step, "Grid step in log2(c), default 0.1");
    cmd->add_option("--t1", ov.t1, "Length of the early transient window, default 10");
    cmd->add_option("--K", ov.K, "Divergence threshold on the loss, default 1e5");
    cmd->add_option("--probe-m", ov.probe_m, "Sharpness probe-set size, default 2048");
    cmd->add_option("--probe-iters", ov.probe_iters, "Power-iteration count, default 20");
    cmd->add_option("--seeds", ov.seeds, "Seed list override")->delimiter(',');
    cmd->add_option("--data", ov.data, "Dataset: synthetic | idx:<images>,<labels>");
    cmd->add_option("--out", ov.out_dir, "Output directory (SHARPSCOPE_OUT overrides root)");
}

int default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 4 : static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sharpscope: SGD sharpness dynamics toolkit"};
    app.require_subcommand(1);

    std::string manifest_path;
    bool force = false;
    int workers = default_workers();
    ManifestOverrides overrides;

    // trajectory
    auto* traj = app.add_subcommand("trajectory", "Run one (c, seed) trajectory: CSV + SVG");
    double traj_c = 1.0;
    std::uint64_t traj_seed = 1;
    bool save_checkpoints = false;
    traj->add_option("--manifest", manifest_path, "Manifest JSON")->required();
    traj->add_option("--c", traj_c, "Learning-rate constant")->required();
    traj->add_option("--seed", traj_seed, "Run seed")->required();
    traj->add_flag("--force", force, "Overwrite outputs with a different manifest hash");
    traj->add_flag("--save-checkpoints", save_checkpoints,
                   "Also write theta0.bin / theta_final.bin (fcn family)");
    add_override_flags(traj, overrides);

    // phase-diagram
    auto* pd = app.add_subcommand("phase-diagram",
                                  "Scan all (arch, seed) cells and assemble the phase diagram");
    pd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
    pd->add_option("--workers", workers, "Parallel workers");
    pd->add_flag("--force", force, "Overwrite outputs with a different manifest hash");
    add_override_flags(pd, overrides);

    // saturation
    auto* sat = app.add_subcommand(
        "saturation", "Intermediate-saturation sharpness curves, chi derivatives and c_crit");
    sat->add_option("--manifest", manifest_path, "Manifest JSON")->required();
    sat->add_option("--workers", workers, "Parallel workers");
    sat->add_flag("--force", force, "Overwrite outputs with a different manifest hash");
    add_override_flags(sat, overrides);

    // uv-validate
    auto* uv = app.add_subcommand("uv-validate",
                                  "Closed forms vs Monte Carlo for the uv model");
    std::vector<int> uv_widths{1, 2, 4, 8, 16};
    long mc_samples = 1000000;
    std::uint64_t uv_seed = 1;
    std::string uv_csv;
    std::string corrupt;
    uv->add_option("--widths", uv_widths, "uv widths to validate")->delimiter(',');
    uv->add_option("--mc-samples", mc_samples, "Monte Carlo sample count (>= 1e4)");
    uv->add_option("--seed", uv_seed, "Monte Carlo seed");
    uv->add_option("--csv", uv_csv, "Also write the report as CSV");
    uv->add_option("--corrupt", corrupt, "Multiply the named closed form by 1.05 (self-test)")
        ->group("");  // hidden

    CLI11_PARSE(app, argc, argv);

    try {
        if (*traj || *pd || *sat) {
            auto manifest = sharpscope::sweep::load_manifest(manifest_path);
            overrides.apply(manifest);
            manifest.validate();

            if (*traj) {
                auto out = sharpscope::sweep::cmd_trajectory(manifest, traj_c, traj_seed, force,
                                                             save_checkpoints);
                std::printf("wrote %s (lambda0=%g eta=%g%s)\n", out.run_dir.string().c_str(),
                            out.trajectory.lambda0, out.trajectory.eta,
                            out.trajectory.diverged_at ? ", diverged" : "");
            } else if (*pd) {
                auto out = sharpscope::sweep::cmd_phase_diagram(manifest, workers, force);
                std::printf("wrote %s (%zu scans, %zu rows)\n", out.out_dir.string().c_str(),
                            out.constants.size(), out.diagram.rows.size());
            } else {
                auto out = sharpscope::sweep::cmd_saturation(manifest, workers, force);
                std::printf("wrote %s (%zu curves)\n", out.out_dir.string().c_str(),
                            out.curves.size());
                for (const auto& [cell, chi] : out.chi)
                    std::printf("  d=%d w=%d  c_crit = %.4f\n", cell.first, cell.second,
                                chi.c_crit);
            }
            return kExitOk;
        }

        // uv-validate
        sharpscope::uvlab::ValidateConfig cfg;
        cfg.widths = uv_widths;
        cfg.samples = mc_samples;
        cfg.seed = uv_seed;
        cfg.corrupt = corrupt;
        auto rows = sharpscope::uvlab::run_uv_validation(cfg);

        std::printf("%-18s %6s %5s %14s %14s %10s %8s %s\n", "formula", "width", "k", "closed",
                    "monte-carlo", "std-err", "z", "gate");
        for (const auto& row : rows) {
            std::printf("%-18s %6d %5.2f %14.8f %14.8f %10.2e %8.2f %s\n", row.formula.c_str(),
                        row.width, row.k, row.closed_form, row.mc_mean, row.mc_se, row.z,
                        row.gated ? (std::abs(row.z) <= 4.0 ? "pass" : "FAIL") : "info");
        }
        if (!uv_csv.empty()) {
            sharpscope::io::CsvTable table;
            table.comments = {"schema=sharpscope-uv-validate-v1"};
            table.header = {"formula", "width", "k", "closed_form", "mc_mean", "mc_se", "z",
                            "gated"};
            for (const auto& row : rows)
                table.rows.push_back({row.formula, std::to_string(row.width),
                                      sharpscope::io::format_double(row.k),
                                      sharpscope::io::format_double(row.closed_form),
                                      sharpscope::io::format_double(row.mc_mean),
                                      sharpscope::io::format_double(row.mc_se),
                                      sharpscope::io::format_double(row.z),
                                      row.gated ? "1" : "0"});
            std::ofstream out(uv_csv);
            out << sharpscope::io::render_csv(table);
        }
        const bool ok = sharpscope::uvlab::validation_passes(rows);
        std::printf("%s\n", ok ? "all gated formulas pass (|z| <= 4)" : "VALIDATION FAILED");
        return ok ? kExitOk : kExitValidatorFailure;
    } catch (const sharpscope::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
}
