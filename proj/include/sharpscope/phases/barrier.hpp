#pragma once

#include <algorithm>
#include <vector>

#include "sharpscope/training/model.hpp"

namespace sharpscope::phases {

using numkit::Vector;

/// Full-dataset loss along the straight segment between two parameter values,
/// with the barrier height U = max_s L_int(s) - L_int(0).
struct InterpolationProfile {
    std::vector<double> s;
    std::vector<double> loss;
    double barrier_U = 0.0;
};

/// Generic over any Model; theta0/theta1 are flat parameter vectors.
inline InterpolationProfile interpolation_profile(training::Model& model, const Vector& theta0,
                                                  const Vector& theta1,
                                                  const data::Batch& full_batch, int s_points) {
    if (s_points < 3) throw contract_error("interpolation_profile: need at least 3 s points");
    if (theta0.size() != theta1.size() || theta0.size() != model.param_count())
        throw config_error("interpolation_profile: parameter length mismatch");

    InterpolationProfile profile;
    profile.s.resize(static_cast<std::size_t>(s_points));
    profile.loss.resize(static_cast<std::size_t>(s_points));
    const Vector saved = model.params();
    for (int i = 0; i < s_points; ++i) {
        const double s = static_cast<double>(i) / (s_points - 1);
        model.set_params((1.0 - s) * theta0 + s * theta1);
        profile.s[static_cast<std::size_t>(i)] = s;
        profile.loss[static_cast<std::size_t>(i)] = model.loss_only(full_batch);
    }
    model.set_params(saved);
    profile.barrier_U =
        *std::max_element(profile.loss.begin(), profile.loss.end()) - profile.loss.front();
    return profile;
}

/// The spec-facing form for FCN checkpoints.
inline InterpolationProfile barrier_profile(const models::NetworkParams& theta0,
                                            const models::NetworkParams& thetaT1,
                                            const data::Dataset& dataset, int s_points) {
    training::FcnModel model(theta0);
    const data::Batch full = data::full_batch(dataset);
    return interpolation_profile(model, theta0.flatten(), thetaT1.flatten(), full, s_points);
}

}  // namespace sharpscope::phases
