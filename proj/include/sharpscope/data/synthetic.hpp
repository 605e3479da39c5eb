#pragma once

#include <cmath>

#include "sharpscope/data/dataset.hpp"

namespace sharpscope::data {

/// Balanced class-conditional Gaussians: unit covariance around class means
/// drawn as sqrt(2) times a random unit direction, which puts the
/// root-mean-square pairwise mean separation at 2. Inputs are standardized
/// after generation; row order is shuffled.
inline Dataset synthetic_dataset(long n, int n_in, int classes, numkit::SeededRng& rng,
                                 StandardizeMode mode = StandardizeMode::Global) {
    if (classes < 1 || n < classes)
        throw config_error("synthetic_dataset: need n >= classes >= 1");
    if (n_in < 1) throw config_error("synthetic_dataset: n_in must be >= 1");

    Matrix means(classes, n_in);
    for (int k = 0; k < classes; ++k)
        means.row(k) = std::sqrt(2.0) * numkit::unit_sphere_vector(n_in, rng).transpose();

    // Balanced: the first (n mod classes) classes get one extra example.
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    const long base = n / classes;
    const long extra = n % classes;
    for (int k = 0; k < classes; ++k) {
        const long count = base + (k < extra ? 1 : 0);
        for (long i = 0; i < count; ++i) labels.push_back(k);
    }

    Matrix inputs(n, n_in);
    for (long i = 0; i < n; ++i)
        for (int j = 0; j < n_in; ++j)
            inputs(i, j) = means(labels[static_cast<std::size_t>(i)], j) + rng.normal();

    // Shuffle rows so epoch boundaries never align with class blocks.
    for (long i = n; i > 1; --i) {
        const long j = static_cast<long>(rng.uniform_index(static_cast<std::uint64_t>(i)));
        inputs.row(i - 1).swap(inputs.row(j));
        std::swap(labels[static_cast<std::size_t>(i - 1)], labels[static_cast<std::size_t>(j)]);
    }

    standardize(inputs, mode);

    Dataset ds;
    ds.inputs = std::move(inputs);
    ds.targets = one_hot(labels, classes);
    ds.name = "synthetic";
    ds.source_seed = rng.seed();
    return ds;
}

}  // namespace sharpscope::data
