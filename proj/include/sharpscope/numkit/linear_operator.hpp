#pragma once

#include <functional>
#include <utility>

#include "sharpscope/numkit/linalg.hpp"

namespace sharpscope::numkit {

/// Abstract symmetric linear map v -> Av, used for Hessians that are only
/// available through matrix-vector products.
class LinearOperator {
public:
    using ApplyFn = std::function<Vector(const Vector&)>;

    LinearOperator(int dim, ApplyFn apply) : dim_(dim), apply_(std::move(apply)) {}

    int dim() const noexcept { return dim_; }
    Vector apply(const Vector& v) const { return apply_(v); }

    /// Wrap an explicit dense symmetric matrix.
    static LinearOperator from_matrix(Matrix m) {
        const int n = static_cast<int>(m.rows());
        return LinearOperator(n, [mat = std::move(m)](const Vector& v) -> Vector { return mat * v; });
    }

private:
    int dim_;
    ApplyFn apply_;
};

}  // namespace sharpscope::numkit
