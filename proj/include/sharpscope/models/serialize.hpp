#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sharpscope/errors.hpp"
#include "sharpscope/models/fcn.hpp"

namespace sharpscope::models {

// Checkpoint container: magic, little-endian u32 header length, JSON shape
// header, then the raw row-major doubles of every layer in order.
inline constexpr char kParamsMagic[4] = {'S', 'S', 'P', 'M'};

inline void save_params(const NetworkParams& params, const std::string& path,
                        std::optional<std::uint64_t> seed = std::nullopt) {
    nlohmann::json header;
    header["schema"] = "sharpscope-params-v1";
    header["parameterization"] = "ntp";
    header["activation"] = to_string(params.arch.activation);
    header["prefactor"] = to_string(params.arch.prefactor);
    header["depth"] = params.arch.depth;
    header["width"] = params.arch.width;
    header["n_in"] = params.arch.n_in;
    header["n_out"] = params.arch.n_out;
    auto shapes = nlohmann::json::array();
    for (const auto& w : params.layers) shapes.push_back({w.rows(), w.cols()});
    header["layer_shapes"] = shapes;
    if (seed) header["seed"] = *seed;

    const std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("save_params: cannot open " + path);
    out.write(kParamsMagic, 4);
    const std::uint32_t len = static_cast<std::uint32_t>(header_text.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& w : params.layers)
        out.write(reinterpret_cast<const char*>(w.data()),
                  static_cast<std::streamsize>(sizeof(double) * w.size()));
    if (!out) throw config_error("save_params: write failed for " + path);
}

inline NetworkParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("load_params: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kParamsMagic, 4) != 0)
        throw format_error("load_params: bad magic", 0);
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    if (!in) throw format_error("load_params: truncated header length", 4);
    std::string header_text(len, '\0');
    in.read(header_text.data(), len);
    if (!in) throw format_error("load_params: truncated header", 8);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("load_params: header parse: ") + e.what(), 8);
    }
    if (header.value("schema", "") != "sharpscope-params-v1")
        throw format_error("load_params: unknown schema", 8);

    NetworkParams params;
    params.arch.depth = header.at("depth").get<int>();
    params.arch.width = header.at("width").get<int>();
    params.arch.n_in = header.at("n_in").get<int>();
    params.arch.n_out = header.at("n_out").get<int>();
    params.arch.activation =
        header.value("activation", "relu") == std::string("relu") ? Activation::Relu
                                                                  : Activation::Linear;
    params.arch.prefactor = header.value("prefactor", "critical") == std::string("critical")
                                ? PrefactorMode::Critical
                                : PrefactorMode::Literal;

    std::size_t offset = 8 + len;
    for (const auto& shape : header.at("layer_shapes")) {
        const auto rows = shape.at(0).get<Eigen::Index>();
        const auto cols = shape.at(1).get<Eigen::Index>();
        Matrix w(rows, cols);
        in.read(reinterpret_cast<char*>(w.data()),
                static_cast<std::streamsize>(sizeof(double) * w.size()));
        if (!in) throw format_error("load_params: truncated weights", offset);
        offset += sizeof(double) * static_cast<std::size_t>(w.size());
        params.layers.push_back(std::move(w));
    }
    return params;
}

}  // namespace sharpscope::models
