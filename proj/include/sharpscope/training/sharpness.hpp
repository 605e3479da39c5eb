#pragma once

#include <cstdint>
#include <vector>

#include "sharpscope/numkit/power_iteration.hpp"
#include "sharpscope/training/model.hpp"

namespace sharpscope::training {

/// Sharpness probe protocol: a probe set of m examples fixed per run, power
/// iteration with a fixed iteration count, measurements on scheduled steps.
struct ProbeConfig {
    long m = 2048;
    int iters = 20;
    std::vector<long> schedule;  // steps at which sharpness is recorded (sorted)
    std::uint64_t seed = 1;      // probe subset + power-iteration start vector
};

struct SharpnessEstimate {
    double value = 0.0;
    std::uint64_t probe_seed = 0;
    long m = 0;
    int iters = 0;
};

/// Measure sharpness on a prepared probe batch. The power-iteration start
/// vector is re-derived from the same seed each call, so repeated probes along
/// a trajectory differ only through the parameters.
inline double probe_sharpness(const Model& model, const data::Batch& probe_batch,
                              const ProbeConfig& probe, SharpnessMetric metric) {
    if (metric != SharpnessMetric::HessianEig) {
        const auto exact = model.exact_sharpness(metric);
        if (!exact)
            throw contract_error("probe_sharpness: metric has no closed form for this model");
        return *exact;
    }
    auto op = model.hessian_operator(probe_batch);
    numkit::SeededRng start = numkit::SeededRng(probe.seed).derive("power-start");
    return numkit::power_iteration(op, probe.iters, start).eigenvalue;
}

/// The spec-facing operation: samples the probe subset from the dataset using
/// the probe seed, then runs the power-iteration estimate.
inline SharpnessEstimate measure_sharpness(const Model& model, const data::Dataset& dataset,
                                           const ProbeConfig& probe,
                                           SharpnessMetric metric = SharpnessMetric::HessianEig) {
    if (probe.m > dataset.size())
        throw contract_error("measure_sharpness: probe set larger than dataset");
    numkit::SeededRng rng(probe.seed);
    data::Batch probe_batch = probe.m == dataset.size()
                                  ? data::full_batch(dataset)
                                  : data::sample_without_replacement(dataset, probe.m, rng);
    return {probe_sharpness(model, probe_batch, probe, metric), probe.seed, probe.m,
            probe.iters};
}

}  // namespace sharpscope::training
