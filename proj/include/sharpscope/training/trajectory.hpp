#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sharpscope/training/sharpness.hpp"

namespace sharpscope::training {

/// How the learning rate is normalized: eta = c / lambda0^H (the paper's
/// default), or eta = k / TrH0 for the uv model's trace scaling.
enum class Scaling { SharpnessC, TraceK };

struct TrainConfig {
    double c = 1.0;  // learning-rate constant (k when scaling == TraceK)
    long batch_size = 512;
    long steps = 10;  // number of SGD updates; states t = 0..steps are recorded
    std::uint64_t seed = 0;
    ProbeConfig probe;
    double divergence_K = 1e5;
    Scaling scaling = Scaling::SharpnessC;
    SharpnessMetric metric = SharpnessMetric::HessianEig;
    /// Grid scans share theta0 across c values, so the initial normalizer is
    /// measured once by the scanner and passed through here. Must equal what
    /// the probe would produce.
    std::optional<double> normalizer_override;

    void validate(const data::Dataset& ds) const {
        if (!(c > 0.0)) throw config_error("TrainConfig: c must be positive");
        if (batch_size < 1 || batch_size > ds.size())
            throw config_error("TrainConfig: batch size must be in [1, n]");
        if (probe.m < 1 || probe.m > ds.size())
            throw config_error("TrainConfig: probe.m must be in [1, n]");
        if (steps < 0) throw config_error("TrainConfig: steps must be >= 0");
        if (!(divergence_K > 0.0)) throw config_error("TrainConfig: divergence_K must be positive");
    }
};

struct StepRecord {
    long t = 0;
    double loss = 0.0;
    std::optional<double> accuracy;
    std::optional<double> sharpness;
};

struct Trajectory {
    std::vector<StepRecord> records;
    double lambda0 = std::numeric_limits<double>::quiet_NaN();  // normalizer at t = 0
    double eta = std::numeric_limits<double>::quiet_NaN();
    double c = 0.0;
    Scaling scaling = Scaling::SharpnessC;
    SharpnessMetric metric = SharpnessMetric::HessianEig;
    std::uint64_t seed = 0;
    std::optional<long> diverged_at;
    std::string config_hash;  // filled by the sweep layer

    bool has_record(long t) const {
        return t < static_cast<long>(records.size()) && records[static_cast<std::size_t>(t)].t == t;
    }
};

struct TrajectoryResult {
    Trajectory trajectory;
    Vector theta0;
    Vector theta_final;  // parameters after the last *completed* update
};

/// Paper-style probe cadence: every step through the first epoch, the end of
/// every epoch up to 100 epochs, then every 10 epochs.
inline std::vector<long> default_probe_schedule(long steps_per_epoch, long total_steps) {
    std::vector<long> schedule;
    for (long t = 0; t <= std::min(steps_per_epoch, total_steps); ++t) schedule.push_back(t);
    for (long epoch = 2; epoch * steps_per_epoch <= total_steps; ++epoch) {
        if (epoch <= 100 || epoch % 10 == 0) schedule.push_back(epoch * steps_per_epoch);
    }
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
    return schedule;
}

inline std::vector<long> every_step_schedule(long total_steps) {
    std::vector<long> schedule(static_cast<std::size_t>(total_steps) + 1);
    for (long t = 0; t <= total_steps; ++t) schedule[static_cast<std::size_t>(t)] = t;
    return schedule;
}

inline SharpnessMetric traj_metric_of_normalizer(const TrainConfig& cfg) {
    return cfg.scaling == Scaling::TraceK ? SharpnessMetric::Trace : SharpnessMetric::HessianEig;
}

/// Run SGD with eta = c / normalizer, recording loss/accuracy at every visited
/// state and sharpness on the probe schedule. The probe set is sampled once
/// per run; the batch sequence depends only on cfg.seed. Divergence (loss
/// above K, or non-finite values) halts the run with diverged_at set; it is a
/// recorded outcome, not an error.
inline TrajectoryResult sgd_trajectory(Model& model, const data::Dataset& dataset,
                                       const TrainConfig& cfg) {
    cfg.validate(dataset);

    numkit::SeededRng probe_rng(cfg.probe.seed);
    data::Batch probe_batch =
        cfg.probe.m == dataset.size()
            ? data::full_batch(dataset)
            : data::sample_without_replacement(dataset, cfg.probe.m, probe_rng);

    const auto scheduled = [&cfg](long t) {
        return std::binary_search(cfg.probe.schedule.begin(), cfg.probe.schedule.end(), t);
    };

    TrajectoryResult out;
    out.theta0 = model.params();

    Trajectory& traj = out.trajectory;
    traj.c = cfg.c;
    traj.scaling = cfg.scaling;
    traj.metric = cfg.metric;
    traj.seed = cfg.seed;

    // Normalizer measured once at initialization on the probe set.
    if (cfg.normalizer_override) {
        traj.lambda0 = *cfg.normalizer_override;
    } else if (cfg.scaling == Scaling::TraceK) {
        const auto trace = model.exact_sharpness(SharpnessMetric::Trace);
        if (!trace) throw contract_error("sgd_trajectory: TraceK scaling needs a uv-style model");
        traj.lambda0 = *trace;
    } else {
        traj.lambda0 = probe_sharpness(model, probe_batch, cfg.probe, SharpnessMetric::HessianEig);
    }
    if (!(traj.lambda0 > 0.0))
        throw config_error("sgd_trajectory: non-positive sharpness normalizer at init");
    traj.eta = cfg.c / traj.lambda0;

    data::BatchSampler sampler(dataset, cfg.batch_size,
                               numkit::SeededRng(cfg.seed).derive("batch"));

    for (long t = 0; t <= cfg.steps; ++t) {
        data::Batch batch = sampler.next();

        StepRecord rec;
        rec.t = t;
        TrainEval ev;
        bool exploded = false;
        try {
            ev = model.eval_and_grad(batch);
            rec.loss = ev.loss;
            rec.accuracy = ev.accuracy;
        } catch (const numerical_divergence&) {
            rec.loss = std::numeric_limits<double>::infinity();
            exploded = true;
        }

        if (!exploded && scheduled(t)) {
            if (t == 0 && cfg.metric == traj_metric_of_normalizer(cfg)) {
                rec.sharpness = traj.lambda0;
            } else {
                try {
                    rec.sharpness = probe_sharpness(model, probe_batch, cfg.probe, cfg.metric);
                } catch (const numerical_divergence&) {
                    rec.sharpness = std::nullopt;
                }
            }
        }
        traj.records.push_back(rec);

        if (exploded || rec.loss > cfg.divergence_K) {
            traj.diverged_at = t;
            break;
        }
        if (t == cfg.steps) break;
        model.set_params(model.params() - traj.eta * ev.grad);
    }

    out.theta_final = model.params();
    return out;
}

}  // namespace sharpscope::training
