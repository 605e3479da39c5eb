#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "sharpscope/training/trajectory.hpp"

namespace sharpscope::phases {

/// Heuristic stand-ins for the paper's visually placed regime boundaries.
/// T1 is fixed; T2 fires when sharpness runs above a multiple of its running
/// median for several consecutive probes (onset of progressive sharpening);
/// T3 when sharpness reaches a fraction of the 2/eta threshold.
struct SegmentationParams {
    long T1 = 10;
    double trigger_ratio = 1.2;
    int consecutive = 3;
    double eos_fraction = 0.95;
};

struct RegimeBoundaries {
    long T1 = 10;
    std::optional<long> T2;
    std::optional<long> T3;
};

inline RegimeBoundaries segment_regimes(const training::Trajectory& traj,
                                        const SegmentationParams& params = {}) {
    RegimeBoundaries out;
    out.T1 = params.T1;

    std::vector<std::pair<long, double>> probes;  // (t, sharpness) beyond T1
    for (const auto& rec : traj.records)
        if (rec.t > params.T1 && rec.sharpness) probes.emplace_back(rec.t, *rec.sharpness);
    if (probes.empty()) return out;

    const double eos_level = params.eos_fraction * (2.0 / traj.eta);

    std::vector<double> history;
    int streak = 0;
    long streak_start = 0;
    for (const auto& [t, sharp] : probes) {
        if (!out.T3 && sharp >= eos_level) out.T3 = t;

        if (!out.T2 && !history.empty()) {
            std::vector<double> sorted = history;
            std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
            double median = sorted[sorted.size() / 2];
            if (sorted.size() % 2 == 0) {
                const double upper = median;
                std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2 - 1,
                                 sorted.end());
                median = 0.5 * (sorted[sorted.size() / 2 - 1] + upper);
            }
            if (sharp > params.trigger_ratio * median) {
                if (streak == 0) streak_start = t;
                if (++streak >= params.consecutive) out.T2 = streak_start;
            } else {
                streak = 0;
            }
        }
        history.push_back(sharp);
    }
    return out;
}

}  // namespace sharpscope::phases
