#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/linalg.hpp"
#include "sharpscope/numkit/rng.hpp"

namespace sharpscope::models {

using numkit::Matrix;
using numkit::Vector;

enum class Activation { Relu, Linear };

/// Hidden-layer forward prefactor. Critical is sqrt(2/fan_in), which keeps
/// ReLU preactivation second moments constant across depth; Literal is
/// 2/sqrt(fan_in), kept available as an A/B switch.
enum class PrefactorMode { Critical, Literal };

inline const char* to_string(Activation a) { return a == Activation::Relu ? "relu" : "linear"; }
inline const char* to_string(PrefactorMode p) {
    return p == PrefactorMode::Critical ? "critical" : "literal";
}

struct ArchConfig {
    int depth = 2;   // number of weight layers
    int width = 32;  // hidden units per hidden layer
    int n_in = 1;
    int n_out = 1;
    Activation activation = Activation::Relu;
    PrefactorMode prefactor = PrefactorMode::Critical;

    double depth_width_ratio() const { return static_cast<double>(depth) / width; }

    void validate() const {
        if (depth < 1 || width < 1 || n_in < 1 || n_out < 1)
            throw config_error("ArchConfig: depth, width, n_in, n_out must all be >= 1");
    }

    /// Input dimension of weight layer `l` (0-based).
    int fan_in(int l) const { return l == 0 ? n_in : width; }
    /// Output dimension of weight layer `l`.
    int fan_out(int l) const { return l == depth - 1 ? n_out : width; }
};

/// Per-layer forward prefactor. The last layer is a linear readout scaled by
/// sqrt(1/fan_in) so the output (and the loss) stays O(1) at initialization.
inline double layer_prefactor(const ArchConfig& cfg, int layer) {
    const double fan_in = cfg.fan_in(layer);
    if (layer == cfg.depth - 1) return std::sqrt(1.0 / fan_in);
    return cfg.prefactor == PrefactorMode::Critical ? std::sqrt(2.0 / fan_in)
                                                    : 2.0 / std::sqrt(fan_in);
}

/// Bias-free MLP weights in neural tangent parameterization: unit-variance
/// entries, all scaling carried by the forward-pass prefactors.
struct NetworkParams {
    ArchConfig arch;
    std::vector<Matrix> layers;  // layer l maps fan_in(l) -> fan_out(l), stored (out x in)

    int param_count() const {
        long n = 0;
        for (const auto& w : layers) n += w.size();
        return static_cast<int>(n);
    }

    Vector flatten() const {
        Vector out(param_count());
        long at = 0;
        for (const auto& w : layers) {
            for (Eigen::Index i = 0; i < w.size(); ++i) out[at + i] = w.data()[i];
            at += w.size();
        }
        return out;
    }

    void unflatten(const Vector& flat) {
        if (flat.size() != param_count())
            throw config_error("NetworkParams: flat vector length mismatch");
        long at = 0;
        for (auto& w : layers) {
            for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = flat[at + i];
            at += w.size();
        }
    }
};

/// i.i.d. standard normal weights; deterministic in the rng state.
inline NetworkParams init_fcn(const ArchConfig& cfg, numkit::SeededRng& rng) {
    cfg.validate();
    NetworkParams params;
    params.arch = cfg;
    params.layers.reserve(cfg.depth);
    for (int l = 0; l < cfg.depth; ++l) {
        Matrix w(cfg.fan_out(l), cfg.fan_in(l));
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
        params.layers.push_back(std::move(w));
    }
    return params;
}

/// Batched forward pass: rows are examples. Mirrors the tape evaluation order
/// (matmul, then prefactor scaling) so both paths agree bitwise.
inline Matrix forward_batch(const NetworkParams& params, const Matrix& inputs) {
    const ArchConfig& cfg = params.arch;
    if (inputs.cols() != cfg.n_in)
        throw config_error("forward_batch: input has " + std::to_string(inputs.cols()) +
                           " features, expected " + std::to_string(cfg.n_in));
    Matrix h = inputs;
    for (int l = 0; l < cfg.depth; ++l) {
        Matrix z = h * params.layers[l].transpose();
        z *= layer_prefactor(cfg, l);
        const bool hidden = l < cfg.depth - 1;
        if (hidden && cfg.activation == Activation::Relu)
            h = z.cwiseMax(0.0);
        else
            h = std::move(z);
    }
    return h;
}

inline Vector forward_fcn(const NetworkParams& params, const Vector& x) {
    Matrix row(1, x.size());
    row.row(0) = x.transpose();
    Matrix out = forward_batch(params, row);
    return out.row(0).transpose();
}

/// Per-entry convex combination (1-s) a + s b.
inline NetworkParams interpolate_params(const NetworkParams& a, const NetworkParams& b,
                                        double s) {
    if (a.layers.size() != b.layers.size())
        throw config_error("interpolate_params: layer count mismatch");
    NetworkParams out = a;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].rows() != b.layers[l].rows() || a.layers[l].cols() != b.layers[l].cols())
            throw config_error("interpolate_params: layer shape mismatch at layer " +
                               std::to_string(l));
        out.layers[l] = (1.0 - s) * a.layers[l] + s * b.layers[l];
    }
    return out;
}

}  // namespace sharpscope::models
