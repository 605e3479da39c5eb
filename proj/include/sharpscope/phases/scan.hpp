#pragma once

#include <functional>
#include <optional>

#include "sharpscope/data/synthetic.hpp"
#include "sharpscope/phases/barrier.hpp"
#include "sharpscope/phases/catapult.hpp"
#include "sharpscope/phases/cgrid.hpp"

namespace sharpscope::phases {

using numkit::Vector;

/// Per-run critical constants from one learning-rate grid scan (one seed).
struct CriticalConstants {
    int d = 0;
    int w = 0;
    std::uint64_t seed = 0;
    std::optional<double> c_loss;
    std::optional<double> c_sharp;
    std::optional<double> c_max;
    std::optional<double> c_barrier;
    bool degenerate = false;  // even the smallest grid c diverged

    double dw_ratio() const { return static_cast<double>(d) / w; }
};

/// Outcome of one (c, seed) run as the scanner consumes it.
struct ScanRun {
    bool survived = false;       // all losses below K through T1, no overflow
    bool loss_catapult = false;  // from recorded ratios, rounding rule applied
    std::optional<bool> sharp_catapult;
    std::optional<double> barrier_U;  // only when requested and run survived
};

using ScanRunFn = std::function<ScanRun(double c, bool need_sharp, bool need_barrier)>;

struct GridScanOptions {
    bool auto_extend = true;  // extend the grid upward until divergence brackets c_max
    double x_cap = 12.0;      // hard exponent cap for the extension
    double barrier_tol = 0.0;  // absolute threshold on U (caller scales by L0)
};

/// Walk the grid in ascending c, collecting the four critical constants.
/// c_loss / c_sharp / c_barrier are grid minima of their predicates; c_max is
/// the largest surviving c. Detection work is skipped once a minimum is found.
inline CriticalConstants grid_scan(const CGrid& grid, const ScanRunFn& run,
                                   const GridScanOptions& opts = {}) {
    if (grid.count < 1) throw contract_error("grid_scan: empty grid");
    CriticalConstants out;
    bool last_survived = false;
    int i = 0;
    while (true) {
        const bool in_grid = i < grid.count;
        const double exponent = grid.exponent(i);
        if (!in_grid) {
            if (!opts.auto_extend || !last_survived || exponent > opts.x_cap + 1e-12) break;
        }
        const double c = std::exp2(exponent);
        const bool need_sharp = !out.c_sharp.has_value();
        const bool need_barrier = !out.c_barrier.has_value();
        const ScanRun result = run(c, need_sharp, need_barrier);

        if (result.survived) out.c_max = c;
        if (!out.c_loss && result.loss_catapult) out.c_loss = c;
        if (!out.c_sharp && result.sharp_catapult.value_or(false)) out.c_sharp = c;
        if (!out.c_barrier && result.barrier_U && *result.barrier_U > opts.barrier_tol)
            out.c_barrier = c;
        if (i == 0 && !result.survived) out.degenerate = true;

        last_survived = result.survived;
        ++i;
    }
    return out;
}

namespace detail {

inline bool recorded_loss_catapult(const training::Trajectory& traj, long T1) {
    const double L0 = traj.records.front().loss;
    if (!(L0 > 0.0)) return false;
    const long last = std::min<long>(T1, static_cast<long>(traj.records.size()) - 1);
    for (long t = 1; t <= last; ++t)
        if (round2(traj.records[static_cast<std::size_t>(t)].loss / L0) > 1.0) return true;
    return false;
}

inline std::optional<bool> recorded_sharp_catapult(const training::Trajectory& traj, long T1) {
    if (!traj.records.front().sharpness) return std::nullopt;
    const double s0 = *traj.records.front().sharpness;
    if (!(s0 > 0.0)) return std::nullopt;
    const long last = std::min<long>(T1, static_cast<long>(traj.records.size()) - 1);
    bool any = false;
    for (long t = 1; t <= last; ++t) {
        const auto& sharp = traj.records[static_cast<std::size_t>(t)].sharpness;
        if (!sharp) continue;
        any = true;
        if (round2(*sharp / s0) > 1.0) return true;
    }
    // A diverged run whose final probes blew up before measuring yields no
    // usable ratios; report "no data" rather than false.
    if (!any) return std::nullopt;
    return false;
}

}  // namespace detail

struct FcnScanConfig {
    models::ArchConfig arch;
    long T1 = 10;
    double K = 1e5;
    long batch_size = 512;
    long probe_m = 2048;
    int probe_iters = 20;
    int s_points = 50;
    double barrier_tol_rel = 1e-6;  // threshold on U as a fraction of L0
    GridScanOptions grid_opts;
};

/// Scan one seed of one architecture over the c-grid: shared initialization
/// and batch sequence across c, per Appendix-C-style protocol.
inline CriticalConstants scan_critical_constants(const FcnScanConfig& cfg,
                                                 const data::Dataset& dataset, const CGrid& grid,
                                                 std::uint64_t seed) {
    numkit::SeededRng root(seed);
    numkit::SeededRng init_rng = root.derive("init");
    const models::NetworkParams theta0 = models::init_fcn(cfg.arch, init_rng);
    training::FcnModel probe_model(theta0);

    training::ProbeConfig probe;
    probe.m = std::min<long>(cfg.probe_m, dataset.size());
    probe.iters = cfg.probe_iters;
    probe.seed = root.derive("probe").seed();

    const double lambda0 =
        training::measure_sharpness(probe_model, dataset, probe).value;

    const data::Batch full = data::full_batch(dataset);
    const double L0_full = probe_model.loss_only(full);
    GridScanOptions opts = cfg.grid_opts;
    opts.barrier_tol = cfg.barrier_tol_rel * L0_full;

    const Vector theta0_flat = theta0.flatten();

    auto run_one = [&](double c, bool need_sharp, bool need_barrier) -> ScanRun {
        training::FcnModel model(theta0);
        training::TrainConfig tc;
        tc.c = c;
        tc.batch_size = std::min<long>(cfg.batch_size, dataset.size());
        tc.steps = cfg.T1;
        tc.seed = seed;
        tc.probe = probe;
        tc.probe.schedule = need_sharp ? training::every_step_schedule(cfg.T1)
                                       : std::vector<long>{};
        tc.divergence_K = cfg.K;
        tc.normalizer_override = lambda0;

        auto result = training::sgd_trajectory(model, dataset, tc);
        ScanRun out;
        out.survived = !result.trajectory.diverged_at.has_value();
        out.loss_catapult = detail::recorded_loss_catapult(result.trajectory, cfg.T1);
        if (need_sharp)
            out.sharp_catapult = detail::recorded_sharp_catapult(result.trajectory, cfg.T1);
        if (need_barrier && out.survived) {
            auto profile =
                interpolation_profile(model, theta0_flat, result.theta_final, full, cfg.s_points);
            out.barrier_U = profile.barrier_U;
        }
        return out;
    };

    CriticalConstants constants = grid_scan(grid, run_one, opts);
    constants.d = cfg.arch.depth;
    constants.w = cfg.arch.width;
    constants.seed = seed;
    return constants;
}

struct UvScanConfig {
    int width = 2;
    long T1 = 10;
    double K = 1e5;
    training::Scaling scaling = training::Scaling::TraceK;
    training::SharpnessMetric metric = training::SharpnessMetric::Trace;
    int probe_iters = 20;
    int s_points = 50;
    double barrier_tol_rel = 1e-6;
    GridScanOptions grid_opts;
};

/// Same protocol for the uv model; in trace scaling the constants are the
/// k_* family.
inline CriticalConstants scan_uv_critical_constants(const UvScanConfig& cfg, const CGrid& grid,
                                                    std::uint64_t seed) {
    numkit::SeededRng root(seed);
    numkit::SeededRng init_rng = root.derive("init");
    const models::UvState state0 = models::init_uv(cfg.width, init_rng);
    const data::Dataset dataset = training::uv_dataset();
    const data::Batch full = data::full_batch(dataset);

    training::UvModel probe_model(state0);
    training::ProbeConfig probe;
    probe.m = 1;
    probe.iters = cfg.probe_iters;
    probe.seed = root.derive("probe").seed();

    double normalizer;
    if (cfg.scaling == training::Scaling::TraceK)
        normalizer = *probe_model.exact_sharpness(training::SharpnessMetric::Trace);
    else
        normalizer = training::measure_sharpness(probe_model, dataset, probe).value;

    const double L0 = probe_model.loss_only(full);
    GridScanOptions opts = cfg.grid_opts;
    opts.barrier_tol = cfg.barrier_tol_rel * L0;

    Vector theta0_flat = probe_model.params();

    auto run_one = [&](double c, bool need_sharp, bool need_barrier) -> ScanRun {
        training::UvModel model(state0);
        training::TrainConfig tc;
        tc.c = c;
        tc.batch_size = 1;
        tc.steps = cfg.T1;
        tc.seed = seed;
        tc.probe = probe;
        tc.probe.schedule = need_sharp ? training::every_step_schedule(cfg.T1)
                                       : std::vector<long>{};
        tc.divergence_K = cfg.K;
        tc.scaling = cfg.scaling;
        tc.metric = cfg.metric;
        tc.normalizer_override = normalizer;

        auto result = training::sgd_trajectory(model, dataset, tc);
        ScanRun out;
        out.survived = !result.trajectory.diverged_at.has_value();
        out.loss_catapult = detail::recorded_loss_catapult(result.trajectory, cfg.T1);
        if (need_sharp) out.sharp_catapult = detail::recorded_sharp_catapult(result.trajectory, cfg.T1);
        if (need_barrier && out.survived) {
            auto profile =
                interpolation_profile(model, theta0_flat, result.theta_final, full, cfg.s_points);
            out.barrier_U = profile.barrier_U;
        }
        return out;
    };

    CriticalConstants constants = grid_scan(grid, run_one, opts);
    constants.d = 2;
    constants.w = cfg.width;
    constants.seed = seed;
    return constants;
}

}  // namespace sharpscope::phases
