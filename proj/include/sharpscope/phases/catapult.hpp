#pragma once

#include <cmath>

#include "sharpscope/training/trajectory.hpp"

namespace sharpscope::phases {

enum class CatapultMode { Loss, Sharp };

/// Ratios are rounded to two decimals before the > 1 comparison, which filters
/// sub-percent fluctuations; raw values stay unrounded everywhere else.
inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

/// True iff the loss (or sharpness) rises above its initial value during the
/// first T1 steps: max over t in [1, T1] of round2(ratio_t) > 1.00.
inline bool detect_catapult(const training::Trajectory& traj, long T1, CatapultMode mode) {
    if (static_cast<long>(traj.records.size()) < T1 + 1)
        throw contract_error("detect_catapult: trajectory shorter than T1");
    const auto& base = traj.records.front();
    double denom;
    if (mode == CatapultMode::Loss) {
        denom = base.loss;
    } else {
        if (!base.sharpness)
            throw contract_error("detect_catapult: missing sharpness at t = 0");
        denom = *base.sharpness;
    }
    if (!(denom > 0.0)) throw contract_error("detect_catapult: non-positive initial value");

    for (long t = 1; t <= T1; ++t) {
        const auto& rec = traj.records[static_cast<std::size_t>(t)];
        double value;
        if (mode == CatapultMode::Loss) {
            value = rec.loss;
        } else {
            if (!rec.sharpness)
                throw contract_error("detect_catapult: missing sharpness at step " +
                                     std::to_string(t));
            value = *rec.sharpness;
        }
        if (round2(value / denom) > 1.0) return true;
    }
    return false;
}

}  // namespace sharpscope::phases
