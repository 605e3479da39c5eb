#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include "sharpscope/autodiff/network_grad.hpp"
#include "sharpscope/data/dataset.hpp"
#include "sharpscope/models/fcn.hpp"
#include "sharpscope/models/uv.hpp"
#include "sharpscope/numkit/linear_operator.hpp"

namespace sharpscope::training {

using numkit::Matrix;
using numkit::Vector;

/// What "sharpness" means for a run. HessianEig is the paper's default
/// (top Hessian eigenvalue via power iteration); Trace and FrobeniusSq are
/// the exact uv-model alternatives.
enum class SharpnessMetric { HessianEig, Trace, FrobeniusSq };

struct TrainEval {
    double loss = 0.0;
    std::optional<double> accuracy;
    Vector grad;
};

/// A trainable model: flat parameter access, batched loss/gradient, and the
/// loss Hessian as an operator. Instances are single-owner; sweeps clone.
class Model {
public:
    virtual ~Model() = default;
    virtual int param_count() const = 0;
    virtual Vector params() const = 0;
    virtual void set_params(const Vector& flat) = 0;
    virtual TrainEval eval_and_grad(const data::Batch& batch) = 0;
    virtual double loss_only(const data::Batch& batch) const = 0;
    virtual numkit::LinearOperator hessian_operator(const data::Batch& batch) const = 0;
    /// Closed-form sharpness where available (uv trace / Frobenius norms).
    virtual std::optional<double> exact_sharpness(SharpnessMetric) const { return std::nullopt; }
    virtual std::unique_ptr<Model> clone() const = 0;
};

namespace detail {

inline std::optional<double> argmax_accuracy(const Matrix& pred, const Matrix& targets) {
    if (pred.cols() < 2) return std::nullopt;
    long hits = 0;
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        Eigen::Index pi, ti;
        pred.row(i).maxCoeff(&pi);
        targets.row(i).maxCoeff(&ti);
        if (pi == ti) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.rows());
}

}  // namespace detail

class FcnModel final : public Model {
public:
    explicit FcnModel(models::NetworkParams params) : params_(std::move(params)) {}

    const models::NetworkParams& network() const { return params_; }

    int param_count() const override { return params_.param_count(); }
    Vector params() const override { return params_.flatten(); }
    void set_params(const Vector& flat) override { params_.unflatten(flat); }

    TrainEval eval_and_grad(const data::Batch& batch) override {
        auto res = ad::loss_and_grad(params_, batch);
        return {res.loss, detail::argmax_accuracy(res.output, batch.targets),
                std::move(res.grad)};
    }

    double loss_only(const data::Batch& batch) const override {
        const Matrix out = models::forward_batch(params_, batch.inputs);
        return 0.5 * (out - batch.targets).squaredNorm() / static_cast<double>(batch.size());
    }

    numkit::LinearOperator hessian_operator(const data::Batch& batch) const override {
        return ad::hessian_operator(params_, batch);
    }

    std::unique_ptr<Model> clone() const override { return std::make_unique<FcnModel>(params_); }

private:
    models::NetworkParams params_;
};

/// The uv model as a trainable Model over its single scalar datum. Gradient
/// and Hessian products use the closed forms; the autodiff route exists
/// independently for cross-checks.
class UvModel final : public Model {
public:
    explicit UvModel(models::UvState state) : state_(std::move(state)) {}

    const models::UvState& state() const { return state_; }

    int param_count() const override { return 2 * state_.width(); }

    Vector params() const override {
        const int w = state_.width();
        Vector flat(2 * w);
        flat.head(w) = state_.u;
        flat.tail(w) = state_.v;
        return flat;
    }

    void set_params(const Vector& flat) override {
        const int w = state_.width();
        if (flat.size() != 2 * w) throw contract_error("UvModel: flat length mismatch");
        state_.u = flat.head(w);
        state_.v = flat.tail(w);
    }

    TrainEval eval_and_grad(const data::Batch& batch) override {
        require_uv_datum(batch);
        const auto r = models::uv_reduce(state_);
        if (!std::isfinite(r.f)) throw numerical_divergence("UvModel: non-finite output", 0);
        Vector grad(2 * state_.width());
        Vector du, dv;
        models::uv_gradient(state_, du, dv);
        grad.head(state_.width()) = du;
        grad.tail(state_.width()) = dv;
        return {r.loss(), std::nullopt, std::move(grad)};
    }

    double loss_only(const data::Batch& batch) const override {
        require_uv_datum(batch);
        return models::uv_loss(state_);
    }

    numkit::LinearOperator hessian_operator(const data::Batch& batch) const override {
        require_uv_datum(batch);
        auto state = state_;
        return numkit::LinearOperator(2 * state_.width(), [state](const Vector& x) {
            return models::uv_hessian_apply(state, x);
        });
    }

    std::optional<double> exact_sharpness(SharpnessMetric metric) const override {
        const auto r = models::uv_reduce(state_);
        switch (metric) {
            case SharpnessMetric::Trace:
                return r.trH;
            case SharpnessMetric::FrobeniusSq:
                return r.trH * r.trH + 4.0 * (1.0 + 2.0 / state_.width()) * r.loss();
            case SharpnessMetric::HessianEig:
                return std::nullopt;
        }
        return std::nullopt;
    }

    std::unique_ptr<Model> clone() const override { return std::make_unique<UvModel>(state_); }

private:
    static void require_uv_datum(const data::Batch& batch) {
        if (batch.size() != 1 || batch.inputs.cols() != 1 || batch.targets.cols() != 1 ||
            batch.inputs(0, 0) != 1.0 || batch.targets(0, 0) != 0.0)
            throw contract_error("UvModel: expects the single training datum (x, y) = (1, 0)");
    }

    models::UvState state_;
};

/// The uv training set: the single example (x, y) = (1, 0).
inline data::Dataset uv_dataset() {
    data::Dataset ds;
    ds.inputs = Matrix::Constant(1, 1, 1.0);
    ds.targets = Matrix::Constant(1, 1, 0.0);
    ds.name = "uv-datum";
    return ds;
}

}  // namespace sharpscope::training
