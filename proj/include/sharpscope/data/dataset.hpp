#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sharpscope/errors.hpp"
#include "sharpscope/numkit/linalg.hpp"
#include "sharpscope/numkit/rng.hpp"

namespace sharpscope::data {

using numkit::Matrix;
using numkit::Vector;

enum class StandardizeMode {
    Global,      // one mean/scale over all entries (default)
    PerFeature,  // column-wise; zero-variance columns are centered only
};

/// Examples as rows, targets one-hot. Inputs are standardized at construction.
struct Dataset {
    Matrix inputs;   // n x n_in
    Matrix targets;  // n x n_out
    std::string name;
    std::optional<std::uint64_t> source_seed;

    long size() const { return inputs.rows(); }
    int n_in() const { return static_cast<int>(inputs.cols()); }
    int n_out() const { return static_cast<int>(targets.cols()); }
};

/// In-place standardization; returns the (mean, scale) pairs actually applied.
inline void standardize(Matrix& inputs, StandardizeMode mode) {
    if (inputs.size() == 0) return;
    if (mode == StandardizeMode::Global) {
        const double mean = inputs.mean();
        const double var = (inputs.array() - mean).square().sum() /
                           static_cast<double>(inputs.size());
        const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
        inputs.array() = (inputs.array() - mean) / scale;
    } else {
        for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
            auto col = inputs.col(c);
            const double mean = col.mean();
            const double var =
                (col.array() - mean).square().sum() / static_cast<double>(col.size());
            const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
            col.array() = (col.array() - mean) / scale;
        }
    }
}

inline Matrix one_hot(const std::vector<int>& labels, int n_out) {
    Matrix t = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), n_out);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_out)
            throw config_error("one_hot: label " + std::to_string(labels[i]) +
                               " out of range for n_out=" + std::to_string(n_out));
        t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return t;
}

/// A minibatch: copied rows plus the indices they came from.
struct Batch {
    Matrix inputs;
    Matrix targets;
    std::vector<long> indices;

    long size() const { return inputs.rows(); }
};

inline Batch take_rows(const Dataset& ds, const std::vector<long>& indices) {
    Batch b;
    b.indices = indices;
    b.inputs.resize(static_cast<Eigen::Index>(indices.size()), ds.inputs.cols());
    b.targets.resize(static_cast<Eigen::Index>(indices.size()), ds.targets.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const long r = indices[i];
        if (r < 0 || r >= ds.size()) throw contract_error("take_rows: index out of bounds");
        b.inputs.row(static_cast<Eigen::Index>(i)) = ds.inputs.row(r);
        b.targets.row(static_cast<Eigen::Index>(i)) = ds.targets.row(r);
    }
    return b;
}

inline Batch full_batch(const Dataset& ds) {
    std::vector<long> idx(static_cast<std::size_t>(ds.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<long>(i);
    return take_rows(ds, idx);
}

/// Without-replacement epoch sampler: a shuffled pass over all indices,
/// reshuffled once exhausted. With B == n the fixed identity order is used,
/// so full-batch runs do not depend on the sampler seed.
class BatchSampler {
public:
    BatchSampler(const Dataset& ds, long batch_size, numkit::SeededRng rng)
        : ds_(&ds), batch_size_(batch_size), rng_(rng) {
        if (batch_size < 1) throw config_error("BatchSampler: batch size must be >= 1");
        if (batch_size > ds.size())
            throw config_error("BatchSampler: batch size exceeds dataset size");
        order_.resize(static_cast<std::size_t>(ds.size()));
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<long>(i);
        if (batch_size_ < ds_->size()) shuffle();
    }

    Batch next() {
        const long n = ds_->size();
        if (cursor_ >= n) {
            cursor_ = 0;
            if (batch_size_ < n) shuffle();
        }
        const long take = std::min(batch_size_, n - cursor_);
        std::vector<long> idx(order_.begin() + cursor_, order_.begin() + cursor_ + take);
        cursor_ += take;
        return take_rows(*ds_, idx);
    }

private:
    void shuffle() {
        for (std::size_t i = order_.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng_.uniform_index(i));
            std::swap(order_[i - 1], order_[j]);
        }
    }

    const Dataset* ds_;
    long batch_size_;
    numkit::SeededRng rng_;
    std::vector<long> order_;
    long cursor_ = 0;
};

/// Sample m distinct rows (used for the fixed sharpness probe set).
inline Batch sample_without_replacement(const Dataset& ds, long m, numkit::SeededRng& rng) {
    if (m > ds.size()) throw config_error("sample_without_replacement: m exceeds dataset size");
    std::vector<long> order(static_cast<std::size_t>(ds.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<long>(i);
    for (long i = 0; i < m; ++i) {
        const long j = i + static_cast<long>(rng.uniform_index(
                               static_cast<std::uint64_t>(ds.size() - i)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    order.resize(static_cast<std::size_t>(m));
    return take_rows(ds, order);
}

}  // namespace sharpscope::data
