#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sharpscope/errors.hpp"
#include "sharpscope/io/sha1.hpp"

namespace sharpscope::sweep {

/// Everything a sweep needs, parsed from a JSON manifest. The content hash of
/// the canonical serialization is embedded in every output file so results
/// and configs can never silently drift apart.
struct SweepManifest {
    std::string schema_version = "1";
    std::string family = "fcn";  // "fcn" | "uv"

    // fcn family
    std::vector<std::pair<int, int>> archs;  // (depth, width)
    int n_in = 32;
    int n_out = 10;
    // uv family
    std::vector<int> uv_widths;
    std::string scaling = "c";  // "c" | "k" (k only for uv)
    std::string metric = "eig"; // "eig" | "trace" | "frob2" (trace/frob2 only for uv)

    // dataset: "synthetic" or "idx:<images>,<labels>"
    std::string data = "synthetic";
    long n = 2048;
    std::uint64_t dataset_seed = 20240901;

    double grid_x0 = 0.0;
    double grid_xmax = 6.0;
    double grid_step = 0.1;
    double grid_xcap = 12.0;  // auto-extension ceiling when c_max is not bracketed

    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    long T1 = 10;
    double K = 1e5;
    long batch_size = 512;
    long probe_m = 2048;
    int probe_iters = 20;
    long steps = 10;  // trajectory command run length
    int s_points = 50;

    // intermediate-saturation protocol
    std::string tau_rule = "ctau";  // "ctau" (tau = value / c) | "fixed"
    double tau_value = 200.0;
    long tau_window = 5;
    double sat_x0 = -1.0;
    double sat_xmax = 4.0;
    std::optional<double> chi_c_max;  // analysis cutoff for the chi derivatives

    std::string out_dir = "sharpscope-out";

    void validate() const {
        if (schema_version != "1")
            throw config_error("manifest: unsupported schema_version '" + schema_version + "'");
        if (family != "fcn" && family != "uv")
            throw config_error("manifest: family must be 'fcn' or 'uv'");
        if (family == "fcn" && archs.empty())
            throw config_error("manifest: fcn family needs at least one (d, w) arch");
        if (family == "uv" && uv_widths.empty())
            throw config_error("manifest: uv family needs at least one width");
        if (seeds.empty()) throw config_error("manifest: seeds list is empty");
        std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
        if (uniq.size() != seeds.size())
            throw config_error("manifest: seeds must be distinct");
        if (scaling != "c" && scaling != "k")
            throw config_error("manifest: scaling must be 'c' or 'k'");
        if (scaling == "k" && family != "uv")
            throw config_error("manifest: trace (k) scaling is uv-only");
        if (metric != "eig" && metric != "trace" && metric != "frob2")
            throw config_error("manifest: metric must be eig|trace|frob2");
        if (metric != "eig" && family != "uv")
            throw config_error("manifest: trace/frob2 sharpness metrics are uv-only");
        if (!(grid_step > 0.0)) throw config_error("manifest: grid_step must be positive");
        if (grid_xmax < grid_x0) throw config_error("manifest: grid_xmax below grid_x0");
        if (T1 < 1) throw config_error("manifest: T1 must be >= 1");
        if (!(K > 0.0)) throw config_error("manifest: K must be positive");
        if (tau_rule != "ctau" && tau_rule != "fixed")
            throw config_error("manifest: tau_rule must be 'ctau' or 'fixed'");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["schema_version"] = schema_version;
        j["family"] = family;
        if (family == "fcn") {
            auto list = nlohmann::json::array();
            for (const auto& [d, w] : archs) list.push_back({{"d", d}, {"w", w}});
            j["archs"] = list;
            j["n_in"] = n_in;
            j["n_out"] = n_out;
            j["data"] = data;
            j["n"] = n;
            j["dataset_seed"] = dataset_seed;
            j["batch_size"] = batch_size;
            j["probe_m"] = probe_m;
        } else {
            j["widths"] = uv_widths;
        }
        j["scaling"] = scaling;
        j["metric"] = metric;
        j["grid"] = {{"x0", grid_x0}, {"x_max", grid_xmax}, {"step", grid_step},
                     {"x_cap", grid_xcap}};
        j["seeds"] = seeds;
        j["T1"] = T1;
        j["K"] = K;
        j["probe_iters"] = probe_iters;
        j["steps"] = steps;
        j["s_points"] = s_points;
        j["tau"] = {{"rule", tau_rule}, {"value", tau_value}, {"window", tau_window},
                    {"x0", sat_x0}, {"x_max", sat_xmax}};
        if (chi_c_max) j["chi_c_max"] = *chi_c_max;
        return j;
    }

    /// nlohmann::json orders object keys, so dump() is canonical. The output
    /// directory is deliberately not part of the identity: the same sweep
    /// written elsewhere is still the same sweep.
    std::string content_hash() const { return io::sha1_hex(to_json().dump()); }

    static SweepManifest from_json(const nlohmann::json& j) {
        SweepManifest m;
        m.schema_version = j.value("schema_version", std::string{});
        m.family = j.value("family", "fcn");
        if (j.contains("archs"))
            for (const auto& a : j.at("archs"))
                m.archs.emplace_back(a.at("d").get<int>(), a.at("w").get<int>());
        if (j.contains("widths")) m.uv_widths = j.at("widths").get<std::vector<int>>();
        m.n_in = j.value("n_in", m.n_in);
        m.n_out = j.value("n_out", m.n_out);
        m.data = j.value("data", m.data);
        m.n = j.value("n", m.n);
        m.dataset_seed = j.value("dataset_seed", m.dataset_seed);
        m.scaling = j.value("scaling", m.scaling);
        m.metric = j.value("metric", m.metric);
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            m.grid_x0 = g.value("x0", m.grid_x0);
            m.grid_xmax = g.value("x_max", m.grid_xmax);
            m.grid_step = g.value("step", m.grid_step);
            m.grid_xcap = g.value("x_cap", m.grid_xcap);
        }
        if (j.contains("seeds")) m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        m.T1 = j.value("T1", m.T1);
        m.K = j.value("K", m.K);
        m.batch_size = j.value("batch_size", m.batch_size);
        m.probe_m = j.value("probe_m", m.probe_m);
        m.probe_iters = j.value("probe_iters", m.probe_iters);
        m.steps = j.value("steps", m.steps);
        m.s_points = j.value("s_points", m.s_points);
        if (j.contains("tau")) {
            const auto& t = j.at("tau");
            m.tau_rule = t.value("rule", m.tau_rule);
            m.tau_value = t.value("value", m.tau_value);
            m.tau_window = t.value("window", m.tau_window);
            m.sat_x0 = t.value("x0", m.sat_x0);
            m.sat_xmax = t.value("x_max", m.sat_xmax);
        }
        if (j.contains("chi_c_max")) m.chi_c_max = j.at("chi_c_max").get<double>();
        m.out_dir = j.value("out_dir", m.out_dir);
        return m;
    }
};

inline SweepManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("manifest: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("manifest: JSON parse failed: ") + e.what());
    }
    SweepManifest m = SweepManifest::from_json(j);
    m.validate();
    return m;
}

}  // namespace sharpscope::sweep
