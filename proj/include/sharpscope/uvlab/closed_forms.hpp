#pragma once

#include <cmath>

#include "sharpscope/errors.hpp"
#include "sharpscope/models/uv.hpp"
#include "sharpscope/numkit/linalg.hpp"

namespace sharpscope::uvlab {

using models::UvReduced;
using models::UvState;

/// One step of the exact uv dynamics in function space:
///   f'   = f (1 - eta TrH + eta^2 f^2 / w)
///   TrH' = TrH + (eta f^2 / w)(eta TrH - 4)
inline UvReduced uv_step_fn(const UvReduced& s, double eta, int w) {
    if (w < 1) throw contract_error("uv_step_fn: width must be >= 1");
    const double wd = static_cast<double>(w);
    UvReduced next;
    next.f = s.f * (1.0 - eta * s.trH + eta * eta * s.f * s.f / wd);
    next.trH = s.trH + (eta * s.f * s.f / wd) * (eta * s.trH - 4.0);
    return next;
}

/// Expected first-step loss ratio under eta = k / TrH0:
///   <L1/L0> = (1-k)^2 + k^2 (1-k) / (2(w+1)) + 3 k^4 / (16 (w+1)(w+3)).
inline double uv_expected_first_step_loss_ratio(double k, int w) {
    if (w < 1) throw contract_error("uv loss ratio: width must be >= 1");
    const double wd = static_cast<double>(w);
    return (1.0 - k) * (1.0 - k) + k * k * (1.0 - k) / (2.0 * (wd + 1.0)) +
           3.0 * k * k * k * k / (16.0 * (wd + 1.0) * (wd + 3.0));
}

/// Gaussian moments of the initialization, exact in rationals. The Gamma
/// ratio in m4 reduces to the finite product w(w+1)(w+2)(w+3).
struct UvMoments {
    double m2 = 0.0;   // <f0^2 / TrH0^2> = w / (4(w+1))
    double m4 = 0.0;   // <f0^4 / TrH0^4> = 3(w+2) w^3 / (16 w(w+1)(w+2)(w+3))
    double m42 = 0.0;  // <f0^4 / TrH0^2> = 3w / (4(w+3))
};

inline UvMoments uv_moments(int w) {
    if (w < 1) throw contract_error("uv_moments: width must be >= 1");
    const double wd = static_cast<double>(w);
    UvMoments m;
    m.m2 = wd / (4.0 * (wd + 1.0));
    const double gamma_ratio = wd * (wd + 1.0) * (wd + 2.0) * (wd + 3.0);
    m.m4 = 3.0 * (wd + 2.0) * wd * wd * wd / (16.0 * gamma_ratio);
    m.m42 = 3.0 * wd / (4.0 * (wd + 3.0));
    return m;
}

/// Squared Frobenius norm of the uv Hessian from the trace identity
///   ||H||_F^2 = TrH^2 + 4 (1 + 2/w) L.
inline double uv_frobenius_sq(double trH, double loss, int w) {
    if (loss < 0.0) throw contract_error("uv_frobenius_sq: loss must be >= 0");
    const double wd = static_cast<double>(w);
    return trH * trH + 4.0 * (1.0 + 2.0 / wd) * loss;
}

/// I(k, w) = k(k-4)/w [ 3k(k-4) / (4(w+3)) + 2 ].
inline double uv_frobenius_I(double k, int w) {
    const double wd = static_cast<double>(w);
    return k * (k - 4.0) / wd * (3.0 * k * (k - 4.0) / (4.0 * (wd + 3.0)) + 2.0);
}

/// Expected first-step change of ||H||_F^2, substituting <L1 - L0> by
/// <L0>(<L1/L0> - 1) with <L0> = 1/2 (since <f0^2> = 1). The substitution
/// drops the covariance between L0 and the ratio; the Monte Carlo validator
/// measures that gap instead of assuming it vanishes.
inline double uv_expected_frobenius_change(double k, int w) {
    const double wd = static_cast<double>(w);
    const double ratio = uv_expected_first_step_loss_ratio(k, w);
    return uv_frobenius_I(k, w) + 4.0 * (1.0 + 2.0 / wd) * 0.5 * (ratio - 1.0);
}

/// c_max = 4 lambda0^H / TrH for a given state (dense top eigenvalue).
inline double uv_cmax_ratio(const UvState& state) {
    const auto reduced = models::uv_reduce(state);
    const auto eigs = numkit::dense_sym_eigs(models::uv_hessian(state));
    return 4.0 * eigs.front() / reduced.trH;
}

using models::uv_weight_correlation;

}  // namespace sharpscope::uvlab
