#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/rng.hpp"

namespace sharpscope::numkit {

// Row-major dense storage so serialized entries match the declared layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Uniform draw from the unit sphere in `dim` dimensions.
inline Vector unit_sphere_vector(int dim, SeededRng& rng) {
    Vector v(dim);
    double norm2 = 0.0;
    do {
        for (int i = 0; i < dim; ++i) v[i] = rng.normal();
        norm2 = v.squaredNorm();
    } while (norm2 < 1e-300);
    return v / std::sqrt(norm2);
}

/// Symmetric Gaussian test matrix, entries N(0,1) mirrored across the diagonal.
inline Matrix random_symmetric(int n, SeededRng& rng) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double x = rng.normal();
            m(i, j) = x;
            m(j, i) = x;
        }
    return m;
}

/// All eigenvalues of a symmetric matrix, sorted descending.
/// Input must be square and symmetric to 1e-10 relative to its largest entry.
inline std::vector<double> dense_sym_eigs(const Matrix& m) {
    if (m.rows() != m.cols()) throw contract_error("dense_sym_eigs: matrix not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
        throw contract_error("dense_sym_eigs: matrix not symmetric (max asymmetry " +
                             std::to_string(asym) + ")");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_divergence("dense_sym_eigs: eigensolver failed", 0);
    std::vector<double> values(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + m.rows());
    std::sort(values.begin(), values.end(), std::greater<double>());
    return values;
}

}  // namespace sharpscope::numkit
