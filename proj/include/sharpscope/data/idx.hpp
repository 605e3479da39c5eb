#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sharpscope/data/dataset.hpp"

namespace sharpscope::data::idx {

// IDX binary format as distributed with MNIST: big-endian 32-bit dimension
// fields, magic 0x00000803 for u8 image tensors, 0x00000801 for u8 labels.
inline constexpr std::uint32_t kImagesMagic = 0x00000803;
inline constexpr std::uint32_t kLabelsMagic = 0x00000801;

struct RawImages {
    std::uint32_t count = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels;  // count * rows * cols
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, std::size_t offset, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw format_error(std::string("idx: truncated ") + what, offset);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

inline RawImages read_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("idx: cannot open " + path);
    const std::uint32_t magic = detail::read_be32(in, 0, "magic");
    if (magic != kImagesMagic)
        throw format_error("idx: bad image magic " + std::to_string(magic) + " in " + path, 0);
    RawImages img;
    img.count = detail::read_be32(in, 4, "count");
    img.rows = detail::read_be32(in, 8, "rows");
    img.cols = detail::read_be32(in, 12, "cols");
    const std::size_t total =
        std::size_t(img.count) * std::size_t(img.rows) * std::size_t(img.cols);
    img.pixels.resize(total);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(total));
    if (!in)
        throw format_error("idx: truncated pixel data in " + path,
                           16 + static_cast<std::size_t>(in.gcount()));
    return img;
}

inline std::vector<std::uint8_t> read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("idx: cannot open " + path);
    const std::uint32_t magic = detail::read_be32(in, 0, "magic");
    if (magic != kLabelsMagic)
        throw format_error("idx: bad label magic " + std::to_string(magic) + " in " + path, 0);
    const std::uint32_t count = detail::read_be32(in, 4, "count");
    std::vector<std::uint8_t> labels(count);
    in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(count));
    if (!in)
        throw format_error("idx: truncated label data in " + path,
                           8 + static_cast<std::size_t>(in.gcount()));
    return labels;
}

inline void write_images(const RawImages& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("idx: cannot open " + path + " for writing");
    detail::write_be32(out, kImagesMagic);
    detail::write_be32(out, img.count);
    detail::write_be32(out, img.rows);
    detail::write_be32(out, img.cols);
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw config_error("idx: write failed for " + path);
}

inline void write_labels(const std::vector<std::uint8_t>& labels, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("idx: cannot open " + path + " for writing");
    detail::write_be32(out, kLabelsMagic);
    detail::write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
    if (!out) throw config_error("idx: write failed for " + path);
}

}  // namespace sharpscope::data::idx

namespace sharpscope::data {

/// Load an IDX image/label pair: pixels scaled to [0,1], standardized, labels
/// one-hot over max(label)+1 classes (at least 10 for the MNIST family).
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                        StandardizeMode mode = StandardizeMode::Global) {
    const idx::RawImages img = idx::read_images(images_path);
    const std::vector<std::uint8_t> labels = idx::read_labels(labels_path);
    if (labels.size() != img.count)
        throw format_error("idx: image/label counts disagree (" + std::to_string(img.count) +
                               " vs " + std::to_string(labels.size()) + ")",
                           4);

    const Eigen::Index n = static_cast<Eigen::Index>(img.count);
    const Eigen::Index d = static_cast<Eigen::Index>(img.rows) * img.cols;
    Matrix inputs(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            inputs(i, j) = static_cast<double>(img.pixels[static_cast<std::size_t>(i * d + j)]) / 255.0;
    standardize(inputs, mode);

    int n_out = 10;
    for (std::uint8_t l : labels) n_out = std::max(n_out, static_cast<int>(l) + 1);
    std::vector<int> int_labels(labels.begin(), labels.end());

    Dataset ds;
    ds.inputs = std::move(inputs);
    ds.targets = one_hot(int_labels, n_out);
    ds.name = "idx";
    return ds;
}

}  // namespace sharpscope::data
