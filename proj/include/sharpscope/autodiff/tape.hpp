#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/linalg.hpp"

namespace sharpscope::ad {

using numkit::Matrix;
using numkit::Vector;

enum class Op : std::uint8_t {
    Constant,    // leaf, not differentiated
    Variable,    // leaf, differentiated
    MatMul,      // op_a(A) * op_b(B) with per-argument transpose flags
    Add,         // A + B
    Sub,         // A - B
    Hadamard,    // A .* B
    Scale,       // alpha * A
    Relu,        // max(A, 0)
    MaskMul,     // A .* (value(b) > 0), mask frozen w.r.t. differentiation
    ReduceSum,   // alpha * sum(A), 1x1 result
    Broadcast,   // alpha * A(0,0) * ones(rows, cols)
};

/// Single-use reverse-mode tape over dense matrices. Nodes are evaluated
/// eagerly on construction, and backward() appends its adjoint computation as
/// ordinary nodes, so gradients can themselves be differentiated (the double
/// backward used for Hessian-vector products). Append order is a topological
/// order: a node only ever references smaller ids.
class Tape {
public:
    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        bool ta = false;
        bool tb = false;
        double alpha = 1.0;
        Matrix value;
    };

    int size() const noexcept { return static_cast<int>(nodes_.size()); }
    const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    double scalar(int id) const {
        const Matrix& v = value(id);
        if (v.rows() != 1 || v.cols() != 1) throw contract_error("tape: node is not scalar");
        return v(0, 0);
    }

    int constant(Matrix v) { return push({Op::Constant, -1, -1, false, false, 1.0, std::move(v)}); }
    int variable(Matrix v) { return push({Op::Variable, -1, -1, false, false, 1.0, std::move(v)}); }

    int matmul(int a, int b, bool ta = false, bool tb = false) {
        const Matrix& A = value(a);
        const Matrix& B = value(b);
        const auto ar = ta ? A.cols() : A.rows();
        const auto ac = ta ? A.rows() : A.cols();
        const auto br = tb ? B.cols() : B.rows();
        const auto bc = tb ? B.rows() : B.cols();
        if (ac != br)
            throw config_error("tape: matmul inner dimensions disagree (" + shape(a) + " x " +
                               shape(b) + ")");
        Matrix out(ar, bc);
        if (!ta && !tb)
            out.noalias() = A * B;
        else if (ta && !tb)
            out.noalias() = A.transpose() * B;
        else if (!ta && tb)
            out.noalias() = A * B.transpose();
        else
            out.noalias() = A.transpose() * B.transpose();
        return push({Op::MatMul, a, b, ta, tb, 1.0, std::move(out)});
    }

    int add(int a, int b) {
        require_same_shape(a, b, "add");
        return push({Op::Add, a, b, false, false, 1.0, value(a) + value(b)});
    }

    int sub(int a, int b) {
        require_same_shape(a, b, "sub");
        return push({Op::Sub, a, b, false, false, 1.0, value(a) - value(b)});
    }

    int hadamard(int a, int b) {
        require_same_shape(a, b, "hadamard");
        return push({Op::Hadamard, a, b, false, false, 1.0, value(a).cwiseProduct(value(b))});
    }

    int scale(int a, double alpha) {
        return push({Op::Scale, a, -1, false, false, alpha, alpha * value(a)});
    }

    int relu(int a) {
        return push({Op::Relu, a, -1, false, false, 1.0, value(a).cwiseMax(0.0)});
    }

    /// a .* mask where mask = (value(mask_src) > 0). The mask is a constant of
    /// the differentiation: the second derivative of relu is taken as zero.
    int mask_mul(int a, int mask_src) {
        require_same_shape(a, mask_src, "mask_mul");
        Matrix out = value(a).cwiseProduct(
            (value(mask_src).array() > 0.0).cast<double>().matrix());
        return push({Op::MaskMul, a, mask_src, false, false, 1.0, std::move(out)});
    }

    int reduce_sum(int a, double alpha) {
        Matrix out(1, 1);
        out(0, 0) = alpha * value(a).sum();
        return push({Op::ReduceSum, a, -1, false, false, alpha, std::move(out)});
    }

    int broadcast(int a, Eigen::Index rows, Eigen::Index cols, double alpha) {
        const double s = scalar(a);
        return push({Op::Broadcast, a, -1, false, false, alpha,
                     Matrix::Constant(rows, cols, alpha * s)});
    }

    /// Reverse sweep from a scalar root. Appends the adjoint computation to the
    /// tape and returns, per requested node, the id holding its gradient
    /// (-1 when the root does not depend on it).
    std::vector<int> backward(int root, std::span<const int> wrt) {
        if (value(root).rows() != 1 || value(root).cols() != 1)
            throw contract_error("tape: backward root must be scalar");
        const int n_before = size();
        std::vector<int> adjoint(static_cast<std::size_t>(n_before), -1);
        adjoint[static_cast<std::size_t>(root)] = constant(Matrix::Ones(1, 1));

        for (int u = root; u >= 0; --u) {
            const int adj = adjoint[static_cast<std::size_t>(u)];
            if (adj < 0) continue;
            // Snapshot POD fields only: pushing adjoint nodes may reallocate nodes_.
            const auto& ref = nodes_[static_cast<std::size_t>(u)];
            const Op op = ref.op;
            const int a = ref.a, b = ref.b;
            const bool ta = ref.ta, tb = ref.tb;
            const double alpha = ref.alpha;
            switch (op) {
                case Op::Constant:
                case Op::Variable:
                    break;
                case Op::MatMul:
                    if (wants_grad(a))
                        accumulate(adjoint, a,
                                   ta ? matmul(b, adj, tb, true) : matmul(adj, b, false, !tb));
                    if (wants_grad(b))
                        accumulate(adjoint, b,
                                   tb ? matmul(adj, a, true, ta) : matmul(a, adj, !ta, false));
                    break;
                case Op::Add:
                    accumulate(adjoint, a, adj);
                    accumulate(adjoint, b, adj);
                    break;
                case Op::Sub:
                    accumulate(adjoint, a, adj);
                    if (wants_grad(b)) accumulate(adjoint, b, scale(adj, -1.0));
                    break;
                case Op::Hadamard:
                    if (wants_grad(a)) accumulate(adjoint, a, hadamard(adj, b));
                    if (wants_grad(b)) accumulate(adjoint, b, hadamard(adj, a));
                    break;
                case Op::Scale:
                    if (wants_grad(a)) accumulate(adjoint, a, scale(adj, alpha));
                    break;
                case Op::Relu:
                    if (wants_grad(a)) accumulate(adjoint, a, mask_mul(adj, u));
                    break;
                case Op::MaskMul:
                    // No flow into the mask source: the mask is frozen.
                    if (wants_grad(a)) accumulate(adjoint, a, mask_mul(adj, b));
                    break;
                case Op::ReduceSum:
                    if (wants_grad(a)) {
                        const Matrix& in = value(a);
                        accumulate(adjoint, a, broadcast(adj, in.rows(), in.cols(), alpha));
                    }
                    break;
                case Op::Broadcast:
                    if (wants_grad(a)) accumulate(adjoint, a, reduce_sum(adj, alpha));
                    break;
            }
        }

        std::vector<int> grads;
        grads.reserve(wrt.size());
        for (int id : wrt) {
            if (id < 0 || id >= n_before) throw contract_error("tape: backward wrt id out of range");
            grads.push_back(adjoint[static_cast<std::size_t>(id)]);
        }
        return grads;
    }

private:
    int push(Node node) {
        nodes_.push_back(std::move(node));
        return size() - 1;
    }

    bool wants_grad(int id) const {
        return id >= 0 && nodes_[static_cast<std::size_t>(id)].op != Op::Constant;
    }

    void accumulate(std::vector<int>& adjoint, int target, int contribution) {
        if (!wants_grad(target)) return;
        auto& slot = adjoint[static_cast<std::size_t>(target)];
        slot = (slot < 0) ? contribution : add(slot, contribution);
    }

    void require_same_shape(int a, int b, const char* what) const {
        if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
            throw config_error(std::string("tape: ") + what + " shape mismatch (" + shape(a) +
                               " vs " + shape(b) + ")");
    }

    std::string shape(int id) const {
        return std::to_string(value(id).rows()) + "x" + std::to_string(value(id).cols());
    }

    std::vector<Node> nodes_;
};

}  // namespace sharpscope::ad
