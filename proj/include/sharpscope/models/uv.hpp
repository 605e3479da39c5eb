#pragma once

#include <cmath>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/linalg.hpp"
#include "sharpscope/numkit/rng.hpp"

namespace sharpscope::models {

/// Two-layer linear network f = (1/sqrt(w)) v.u, trained on the single datum
/// (x, y) = (1, 0), so the loss is L = f^2 / 2.
struct UvState {
    Vector u;
    Vector v;

    int width() const { return static_cast<int>(u.size()); }
};

/// Function-space coordinates: the scalar output and the Hessian trace
/// (equal to the NTK for this model).
struct UvReduced {
    double f = 0.0;
    double trH = 0.0;

    double loss() const { return 0.5 * f * f; }
};

inline UvState init_uv(int w, numkit::SeededRng& rng) {
    if (w < 1) throw config_error("init_uv: width must be >= 1");
    UvState s;
    s.u.resize(w);
    s.v.resize(w);
    for (int i = 0; i < w; ++i) s.u[i] = rng.normal();
    for (int i = 0; i < w; ++i) s.v[i] = rng.normal();
    return s;
}

inline UvReduced uv_reduce(const UvState& s) {
    const double w = static_cast<double>(s.width());
    return {s.u.dot(s.v) / std::sqrt(w), (s.u.squaredNorm() + s.v.squaredNorm()) / w};
}

inline double uv_loss(const UvState& s) { return uv_reduce(s).loss(); }

/// Gradient of L = f^2/2 with respect to (u, v).
inline void uv_gradient(const UvState& s, Vector& du, Vector& dv) {
    const double w = static_cast<double>(s.width());
    const double f = s.u.dot(s.v) / std::sqrt(w);
    const double scale = f / std::sqrt(w);
    du = scale * s.v;
    dv = scale * s.u;
}

/// Exact dense Hessian of L(u, v), as 2w x 2w blocks
///   [ v v^T / w            v u^T / w + (f/sqrt(w)) I ]
///   [ u v^T / w + (f/sqrt(w)) I        u u^T / w     ]
inline Matrix uv_hessian(const UvState& s) {
    const int w = s.width();
    const double wd = static_cast<double>(w);
    const double f = s.u.dot(s.v) / std::sqrt(wd);
    Matrix h(2 * w, 2 * w);
    h.topLeftCorner(w, w) = s.v * s.v.transpose() / wd;
    h.bottomRightCorner(w, w) = s.u * s.u.transpose() / wd;
    Matrix cross = s.v * s.u.transpose() / wd;
    cross.diagonal().array() += f / std::sqrt(wd);
    h.topRightCorner(w, w) = cross;
    h.bottomLeftCorner(w, w) = cross.transpose();
    return h;
}

/// O(w) Hessian-vector product using the block structure; x stacks (du, dv).
inline Vector uv_hessian_apply(const UvState& s, const Vector& x) {
    const int w = s.width();
    if (x.size() != 2 * w) throw contract_error("uv_hessian_apply: dimension mismatch");
    const double wd = static_cast<double>(w);
    const double f = s.u.dot(s.v) / std::sqrt(wd);
    const auto p = x.head(w);
    const auto q = x.tail(w);
    const double mix = (s.v.dot(p) + s.u.dot(q)) / wd;
    Vector out(2 * w);
    out.head(w) = mix * s.v + (f / std::sqrt(wd)) * q;
    out.tail(w) = mix * s.u + (f / std::sqrt(wd)) * p;
    return out;
}

/// Cosine of the angle between u and v.
inline double uv_weight_correlation(const UvState& s) {
    const double nu = s.u.norm();
    const double nv = s.v.norm();
    if (nu == 0.0 || nv == 0.0)
        throw contract_error("uv_weight_correlation: undefined for a zero vector");
    return s.u.dot(s.v) / (nu * nv);
}

}  // namespace sharpscope::models
