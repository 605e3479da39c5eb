#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "sharpscope/autodiff/tape.hpp"
#include "sharpscope/data/dataset.hpp"
#include "sharpscope/models/fcn.hpp"
#include "sharpscope/models/uv.hpp"
#include "sharpscope/numkit/linear_operator.hpp"

namespace sharpscope::ad {

enum class LossKind { Mse };

struct MseGraph {
    std::vector<int> weights;  // variable node per layer
    int output = -1;
    int loss = -1;
};

/// Batched forward graph with the average-over-batch MSE loss
/// L = (1/B) sum_mu 1/2 ||f(x_mu) - y_mu||^2.
inline MseGraph build_mse_graph(Tape& tape, const models::NetworkParams& params,
                                const data::Batch& batch) {
    const auto& cfg = params.arch;
    if (batch.size() < 1) throw config_error("mse graph: empty batch");
    if (batch.inputs.cols() != cfg.n_in)
        throw config_error("mse graph: batch input width " + std::to_string(batch.inputs.cols()) +
                           " != n_in " + std::to_string(cfg.n_in));
    if (batch.targets.cols() != cfg.n_out)
        throw config_error("mse graph: batch target width " +
                           std::to_string(batch.targets.cols()) + " != n_out " +
                           std::to_string(cfg.n_out));

    MseGraph g;
    int h = tape.constant(batch.inputs);
    for (int l = 0; l < cfg.depth; ++l) {
        const int w = tape.variable(params.layers[l]);
        g.weights.push_back(w);
        int z = tape.matmul(h, w, false, true);
        z = tape.scale(z, models::layer_prefactor(cfg, l));
        const bool hidden = l < cfg.depth - 1;
        h = (hidden && cfg.activation == models::Activation::Relu) ? tape.relu(z) : z;
    }
    g.output = h;
    const int diff = tape.sub(h, tape.constant(batch.targets));
    const int sq = tape.hadamard(diff, diff);
    g.loss = tape.reduce_sum(sq, 0.5 / static_cast<double>(batch.size()));
    return g;
}

namespace detail {

inline Vector flatten_grads(const Tape& tape, const models::NetworkParams& params,
                            const std::vector<int>& grad_ids) {
    Vector out = Vector::Zero(params.param_count());
    long at = 0;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto size = params.layers[l].size();
        if (grad_ids[l] >= 0) {
            const Matrix& g = tape.value(grad_ids[l]);
            for (Eigen::Index i = 0; i < size; ++i) out[at + i] = g.data()[i];
        }
        at += size;
    }
    return out;
}

inline std::vector<Matrix> split_flat(const models::NetworkParams& params, const Vector& flat) {
    if (flat.size() != params.param_count())
        throw contract_error("autodiff: flat vector length != parameter count");
    std::vector<Matrix> out;
    out.reserve(params.layers.size());
    long at = 0;
    for (const auto& w : params.layers) {
        out.emplace_back(
            Eigen::Map<const Matrix>(flat.data() + at, w.rows(), w.cols()));
        at += w.size();
    }
    return out;
}

}  // namespace detail

struct LossAndGrad {
    double loss = 0.0;
    Vector grad;
    Matrix output;  // network predictions for the batch
};

inline LossAndGrad loss_and_grad(const models::NetworkParams& params, const data::Batch& batch,
                                 LossKind kind = LossKind::Mse) {
    (void)kind;
    Tape tape;
    MseGraph g = build_mse_graph(tape, params, batch);
    const double loss = tape.scalar(g.loss);
    if (!std::isfinite(loss)) throw numerical_divergence("loss_and_grad: non-finite loss", 0);
    auto grad_ids = tape.backward(g.loss, g.weights);
    Vector grad = detail::flatten_grads(tape, params, grad_ids);
    if (!numkit::all_finite(grad))
        throw numerical_divergence("loss_and_grad: non-finite gradient", 0);
    return {loss, std::move(grad), tape.value(g.output)};
}

/// Exact Hessian-vector product H v with H = d^2 L / d theta^2, computed by
/// differentiating the inner product of the gradient with v (double backward).
inline Vector hvp(const models::NetworkParams& params, const data::Batch& batch, const Vector& v,
                  LossKind kind = LossKind::Mse) {
    (void)kind;
    Tape tape;
    MseGraph g = build_mse_graph(tape, params, batch);
    auto grad_ids = tape.backward(g.loss, g.weights);

    const std::vector<Matrix> v_layers = detail::split_flat(params, v);
    int dot = -1;
    for (std::size_t l = 0; l < grad_ids.size(); ++l) {
        if (grad_ids[l] < 0) continue;
        const int vl = tape.constant(v_layers[l]);
        const int term = tape.reduce_sum(tape.hadamard(grad_ids[l], vl), 1.0);
        dot = dot < 0 ? term : tape.add(dot, term);
    }
    if (dot < 0) return Vector::Zero(params.param_count());

    auto hv_ids = tape.backward(dot, g.weights);
    Vector hv = detail::flatten_grads(tape, params, hv_ids);
    if (!numkit::all_finite(hv)) throw numerical_divergence("hvp: non-finite result", 0);
    return hv;
}

/// The loss Hessian at fixed (params, batch) as an abstract symmetric operator.
inline numkit::LinearOperator hessian_operator(models::NetworkParams params, data::Batch batch,
                                               LossKind kind = LossKind::Mse) {
    const int dim = params.param_count();
    auto ctx = std::make_shared<std::pair<models::NetworkParams, data::Batch>>(std::move(params),
                                                                               std::move(batch));
    return numkit::LinearOperator(dim, [ctx, kind](const Vector& v) -> Vector {
        return hvp(ctx->first, ctx->second, v, kind);
    });
}

/// Tape for the uv model on its training datum (x, y) = (1, 0); loss f^2/2.
/// Used to cross-check the analytic uv gradient and Hessian.
struct UvGraph {
    int u = -1;
    int v = -1;
    int f = -1;
    int loss = -1;
};

inline UvGraph build_uv_graph(Tape& tape, const models::UvState& state, double x = 1.0,
                              double y = 0.0) {
    const int w = state.width();
    UvGraph g;
    g.u = tape.variable(state.u);
    g.v = tape.variable(state.v);
    const int xc = tape.constant(Matrix::Constant(1, 1, x));
    const int hidden = tape.matmul(g.u, xc);                    // w x 1
    const int raw = tape.matmul(g.v, hidden, true, false);      // 1 x 1
    g.f = tape.scale(raw, 1.0 / std::sqrt(static_cast<double>(w)));
    const int diff = tape.sub(g.f, tape.constant(Matrix::Constant(1, 1, y)));
    g.loss = tape.reduce_sum(tape.hadamard(diff, diff), 0.5);
    return g;
}

inline Vector uv_hvp_autodiff(const models::UvState& state, const Vector& v_in) {
    const int w = state.width();
    if (v_in.size() != 2 * w) throw contract_error("uv_hvp_autodiff: dimension mismatch");
    Tape tape;
    UvGraph g = build_uv_graph(tape, state);
    std::vector<int> wrt{g.u, g.v};
    auto grads = tape.backward(g.loss, wrt);
    const int vu = tape.constant(Matrix(v_in.head(w)));
    const int vv = tape.constant(Matrix(v_in.tail(w)));
    int dot = tape.add(tape.reduce_sum(tape.hadamard(grads[0], vu), 1.0),
                       tape.reduce_sum(tape.hadamard(grads[1], vv), 1.0));
    auto hv = tape.backward(dot, wrt);
    Vector out(2 * w);
    out.head(w) = tape.value(hv[0]);
    out.tail(w) = tape.value(hv[1]);
    return out;
}

}  // namespace sharpscope::ad
