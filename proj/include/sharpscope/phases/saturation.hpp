#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "sharpscope/phases/cgrid.hpp"
#include "sharpscope/training/trajectory.hpp"

namespace sharpscope::phases {

/// When to measure the intermediate-saturation sharpness: either tau chosen
/// so that c*tau is a fixed product (default 200), or a fixed step count.
struct TauRule {
    enum class Kind { CTau, Fixed } kind = Kind::CTau;
    double value = 200.0;

    long tau_for(double c) const {
        const double raw = kind == Kind::CTau ? value / c : value;
        return std::lround(raw);
    }
};

struct SaturationConfig {
    double c = 1.0;
    std::uint64_t seed = 0;
    TauRule tau;
    long window = 5;  // average sharpness over [tau - window, tau + window]
    long batch_size = 512;
    training::ProbeConfig probe;
    double K = 1e5;
    training::Scaling scaling = training::Scaling::SharpnessC;
    training::SharpnessMetric metric = training::SharpnessMetric::HessianEig;
};

/// Mean sharpness over the window around tau, normalized by lambda0.
/// Absent when the run diverges before the window completes.
inline std::optional<double> saturation_sharpness(training::Model& model,
                                                  const data::Dataset& dataset,
                                                  const SaturationConfig& cfg) {
    const long tau = cfg.tau.tau_for(cfg.c);
    if (tau - cfg.window < 1)
        throw contract_error("saturation_sharpness: window would truncate at t = 0 (tau " +
                             std::to_string(tau) + ")");

    training::TrainConfig tc;
    tc.c = cfg.c;
    tc.batch_size = std::min<long>(cfg.batch_size, dataset.size());
    tc.steps = tau + cfg.window;
    tc.seed = cfg.seed;
    tc.probe = cfg.probe;
    tc.probe.schedule.clear();
    tc.probe.schedule.push_back(0);
    for (long t = tau - cfg.window; t <= tau + cfg.window; ++t) tc.probe.schedule.push_back(t);
    tc.divergence_K = cfg.K;
    tc.scaling = cfg.scaling;
    tc.metric = cfg.metric;

    auto result = training::sgd_trajectory(model, dataset, tc);
    if (result.trajectory.diverged_at) return std::nullopt;

    double sum = 0.0;
    long count = 0;
    for (long t = tau - cfg.window; t <= tau + cfg.window; ++t) {
        const auto& sharp = result.trajectory.records[static_cast<std::size_t>(t)].sharpness;
        if (!sharp) return std::nullopt;
        sum += *sharp;
        ++count;
    }
    return (sum / count) / result.trajectory.lambda0;
}

/// Averaged normalized sharpness vs c, over seeds, on a log-uniform grid.
struct SaturationCurve {
    std::vector<double> c;
    std::vector<double> exponent;     // log2(c), uniform spacing
    std::vector<double> mean;         // over seeds with a defined value
    std::vector<double> stddev;
    std::vector<long> seeds_used;
    int total_seeds = 0;
    TauRule tau;
};

/// Fold per-(c, seed) values (absent = diverged) into the mean curve.
/// values[i][s] corresponds to grid point i and seed s.
inline SaturationCurve assemble_saturation_curve(
    const CGrid& grid, const std::vector<std::vector<std::optional<double>>>& values,
    TauRule tau) {
    SaturationCurve curve;
    curve.tau = tau;
    if (static_cast<int>(values.size()) != grid.count)
        throw contract_error("assemble_saturation_curve: grid/value size mismatch");
    for (int i = 0; i < grid.count; ++i) {
        const auto& per_seed = values[static_cast<std::size_t>(i)];
        curve.total_seeds = std::max<int>(curve.total_seeds, static_cast<int>(per_seed.size()));
        double sum = 0.0, sumsq = 0.0;
        long n = 0;
        for (const auto& v : per_seed) {
            if (!v) continue;
            sum += *v;
            sumsq += *v * *v;
            ++n;
        }
        if (n == 0) continue;  // fully diverged grid point: dropped from the curve
        curve.c.push_back(grid.value(i));
        curve.exponent.push_back(grid.exponent(i));
        const double mean = sum / n;
        curve.mean.push_back(mean);
        curve.stddev.push_back(n > 1 ? std::sqrt(std::max(0.0, sumsq / n - mean * mean)) : 0.0);
        curve.seeds_used.push_back(n);
    }
    return curve;
}

}  // namespace sharpscope::phases
