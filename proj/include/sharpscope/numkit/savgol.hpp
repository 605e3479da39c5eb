#pragma once

#include <Eigen/QR>

#include <algorithm>
#include <span>
#include <vector>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/linalg.hpp"

namespace sharpscope::numkit {

namespace detail {

// Factorial up to the small polyorders used here.
inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace detail

/// Savitzky-Golay smoothing / differentiation on a uniformly spaced sequence.
/// Each output value comes from a degree-`polyorder` least-squares fit on a
/// window of `window` samples; interior points use the centered window, points
/// within half a window of either end reuse the one-sided boundary window and
/// evaluate the fitted polynomial (and its derivatives) at their own abscissa.
/// Output has the same length as the input. Exact on polynomials of degree
/// <= polyorder, including at the boundaries.
inline std::vector<double> savitzky_golay(std::span<const double> values, int window,
                                          int polyorder, int deriv, double spacing) {
    const int n = static_cast<int>(values.size());
    if (window < 1 || window % 2 == 0)
        throw contract_error("savitzky_golay: window must be odd and positive");
    if (polyorder < 0 || polyorder >= window)
        throw contract_error("savitzky_golay: require polyorder < window");
    if (deriv < 0 || deriv > polyorder)
        throw contract_error("savitzky_golay: require deriv <= polyorder");
    if (n < window) throw contract_error("savitzky_golay: fewer values than window");
    if (!(spacing > 0.0)) throw contract_error("savitzky_golay: spacing must be positive");

    const int half = window / 2;
    const int cols = polyorder + 1;
    std::vector<double> out(n);

    // One fit per distinct window placement; offsets measured from the output
    // index in sample units, so the result is coeff[deriv] * deriv! / h^deriv.
    Matrix design(window, cols);
    Vector rhs(window);
    const double scale = detail::factorial(deriv) / std::pow(spacing, deriv);

    for (int i = 0; i < n; ++i) {
        const int start = std::clamp(i - half, 0, n - window);
        for (int r = 0; r < window; ++r) {
            const double t = static_cast<double>(start + r - i);
            double p = 1.0;
            for (int c = 0; c < cols; ++c) {
                design(r, c) = p;
                p *= t;
            }
            rhs[r] = values[start + r];
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(design);
        Vector coeffs = qr.solve(rhs);
        out[i] = coeffs[deriv] * scale;
    }
    return out;
}

}  // namespace sharpscope::numkit
