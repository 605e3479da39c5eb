#pragma once

#include <Eigen/QR>

#include <span>
#include <vector>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/linalg.hpp"

namespace sharpscope::numkit {

/// Least-squares polynomial fit. Returns degree+1 coefficients, constant term
/// first. Throws fit_error when the Vandermonde design is rank deficient
/// (e.g. all abscissae identical).
inline std::vector<double> polyfit(std::span<const double> xs, std::span<const double> ys,
                                   int degree) {
    if (degree < 0) throw contract_error("polyfit: degree must be >= 0");
    if (xs.size() != ys.size()) throw contract_error("polyfit: xs/ys length mismatch");
    const int n = static_cast<int>(xs.size());
    const int cols = degree + 1;
    if (n < cols) throw contract_error("polyfit: need at least degree+1 points");

    Matrix design(n, cols);
    for (int i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j < cols; ++j) {
            design(i, j) = p;
            p *= xs[i];
        }
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < cols) throw fit_error("polyfit: rank-deficient design matrix");
    Vector rhs = Eigen::Map<const Vector>(ys.data(), n);
    Vector coeffs = qr.solve(rhs);
    return {coeffs.data(), coeffs.data() + cols};
}

/// Evaluate a low-degree-first coefficient vector at x.
inline double polyval(std::span<const double> coeffs, double x) {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
}

/// Sum of squared residuals of a fit.
inline double polyfit_residual(std::span<const double> xs, std::span<const double> ys,
                               std::span<const double> coeffs) {
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - polyval(coeffs, xs[i]);
        ss += r * r;
    }
    return ss;
}

}  // namespace sharpscope::numkit
