#pragma once

#include <cmath>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/linear_operator.hpp"
#include "sharpscope/numkit/rng.hpp"

namespace sharpscope::numkit {

struct PowerIterationResult {
    double eigenvalue = 0.0;
    Vector eigenvector;  // unit norm
};

/// Plain power iteration: `iters` applications of the operator with
/// renormalization after each one. The eigenvalue is the Rayleigh quotient
/// v·(op v) from the final application; the start vector is uniform on the
/// unit sphere drawn from `rng`. No deflation, no shifts.
inline PowerIterationResult power_iteration(const LinearOperator& op, int iters, SeededRng& rng) {
    if (iters < 1) throw contract_error("power_iteration: iters must be >= 1");
    if (op.dim() < 1) throw contract_error("power_iteration: dimension must be >= 1");

    Vector v = unit_sphere_vector(op.dim(), rng);
    double eigenvalue = 0.0;
    for (int step = 0; step < iters; ++step) {
        Vector w = op.apply(v);
        if (!all_finite(w))
            throw numerical_divergence("power_iteration: non-finite iterate", step);
        eigenvalue = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) {
            // v lies in the kernel; Rayleigh quotient 0 is exact.
            return {0.0, v};
        }
        v = w / norm;
    }
    return {eigenvalue, v};
}

}  // namespace sharpscope::numkit
