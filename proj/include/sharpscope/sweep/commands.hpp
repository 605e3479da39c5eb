#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sharpscope/data/idx.hpp"
#include "sharpscope/data/synthetic.hpp"
#include "sharpscope/io/csv.hpp"
#include "sharpscope/io/svg.hpp"
#include "sharpscope/models/serialize.hpp"
#include "sharpscope/phases/chi.hpp"
#include "sharpscope/phases/phase_diagram.hpp"
#include "sharpscope/phases/scan.hpp"
#include "sharpscope/sweep/manifest.hpp"
#include "sharpscope/sweep/runner.hpp"

namespace sharpscope::sweep {

namespace fs = std::filesystem;

inline data::Dataset dataset_from_manifest(const SweepManifest& m) {
    if (m.data == "synthetic") {
        numkit::SeededRng rng(m.dataset_seed);
        return data::synthetic_dataset(m.n, m.n_in, m.n_out, rng);
    }
    if (m.data.rfind("idx:", 0) == 0) {
        const std::string spec = m.data.substr(4);
        const auto comma = spec.find(',');
        if (comma == std::string::npos)
            throw config_error("manifest: idx data spec needs '<images>,<labels>'");
        return data::load_idx(spec.substr(0, comma), spec.substr(comma + 1));
    }
    throw config_error("manifest: unknown data spec '" + m.data + "'");
}

inline training::Scaling scaling_from(const SweepManifest& m) {
    return m.scaling == "k" ? training::Scaling::TraceK : training::Scaling::SharpnessC;
}

inline training::SharpnessMetric metric_from(const SweepManifest& m) {
    if (m.metric == "trace") return training::SharpnessMetric::Trace;
    if (m.metric == "frob2") return training::SharpnessMetric::FrobeniusSq;
    return training::SharpnessMetric::HessianEig;
}

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? io::format_double(*v) : std::string{};
}

// ---------------------------------------------------------------------------
// trajectory command
// ---------------------------------------------------------------------------

struct TrajectoryOutput {
    fs::path run_dir;
    training::Trajectory trajectory;
};

inline io::CsvTable trajectory_csv(const training::Trajectory& traj,
                                   const std::string& manifest_hash) {
    io::CsvTable table;
    table.comments = {"manifest=" + manifest_hash, "schema=sharpscope-trajectory-v1"};
    table.header = {"t", "loss", "accuracy", "sharpness"};
    for (const auto& rec : traj.records) {
        table.rows.push_back({std::to_string(rec.t), io::format_double(rec.loss),
                              rec.accuracy ? io::format_double(*rec.accuracy) : std::string{},
                              rec.sharpness ? io::format_double(*rec.sharpness) : std::string{}});
    }
    return table;
}

/// Loss / sharpness / accuracy panels rendered *from the CSV text*, so the
/// figure is a pure function of the persisted data.
inline std::string trajectory_svg_from_csv(const std::string& csv_text, double eta,
                                           const std::string& manifest_hash) {
    const io::CsvTable table = io::parse_csv(csv_text);
    std::vector<double> t, loss, acc_t, acc, st, sharp;
    for (const auto& row : table.rows) {
        const double step = std::strtod(row[0].c_str(), nullptr);
        t.push_back(step);
        loss.push_back(std::strtod(row[1].c_str(), nullptr));
        if (row.size() > 2 && !row[2].empty()) {
            acc_t.push_back(step);
            acc.push_back(std::strtod(row[2].c_str(), nullptr));
        }
        if (row.size() > 3 && !row[3].empty()) {
            st.push_back(step);
            sharp.push_back(std::strtod(row[3].c_str(), nullptr));
        }
    }

    io::Panel loss_panel;
    loss_panel.title = "training loss";
    loss_panel.x_axis = {"t", 0};
    loss_panel.y_axis = {"loss", 10};
    loss_panel.series.push_back({t, loss, "", io::kPalette[0], false, false, {}, {}, {}});

    io::Panel sharp_panel;
    sharp_panel.title = "sharpness";
    sharp_panel.x_axis = {"t", 0};
    sharp_panel.y_axis = {"lambda", 0};
    sharp_panel.series.push_back({st, sharp, "", io::kPalette[1], false, true, {}, {}, {}});
    sharp_panel.hlines.push_back(2.0 / eta);

    std::vector<io::Panel> panels{loss_panel, sharp_panel};
    if (!acc.empty()) {
        io::Panel acc_panel;
        acc_panel.title = "training accuracy";
        acc_panel.x_axis = {"t", 0};
        acc_panel.y_axis = {"accuracy", 0};
        acc_panel.series.push_back({acc_t, acc, "", io::kPalette[2], false, false, {}, {}, {}});
        panels.push_back(acc_panel);
    }
    return io::render_svg(panels, manifest_hash);
}

inline TrajectoryOutput cmd_trajectory(const SweepManifest& manifest, double c,
                                       std::uint64_t seed, bool force = false,
                                       bool save_checkpoints = false) {
    manifest.validate();
    const std::string hash = manifest.content_hash();

    numkit::SeededRng root(seed);
    training::TrainConfig tc;
    tc.c = c;
    tc.steps = manifest.steps;
    tc.seed = seed;
    tc.probe.iters = manifest.probe_iters;
    tc.probe.seed = root.derive("probe").seed();
    tc.divergence_K = manifest.K;
    tc.scaling = scaling_from(manifest);
    tc.metric = metric_from(manifest);

    data::Dataset dataset;
    std::unique_ptr<training::Model> model;
    std::optional<models::NetworkParams> theta0_net;
    if (manifest.family == "uv") {
        dataset = training::uv_dataset();
        tc.batch_size = 1;
        tc.probe.m = 1;
        numkit::SeededRng init = root.derive("init");
        model = std::make_unique<training::UvModel>(models::init_uv(
            manifest.uv_widths.empty() ? 2 : manifest.uv_widths.front(), init));
    } else {
        dataset = dataset_from_manifest(manifest);
        tc.batch_size = std::min<long>(manifest.batch_size, dataset.size());
        tc.probe.m = std::min<long>(manifest.probe_m, dataset.size());
        const auto [d, w] = manifest.archs.front();
        models::ArchConfig arch{d, w, dataset.n_in(), dataset.n_out()};
        numkit::SeededRng init = root.derive("init");
        theta0_net = models::init_fcn(arch, init);
        model = std::make_unique<training::FcnModel>(*theta0_net);
    }
    const long steps_per_epoch = std::max<long>(1, dataset.size() / tc.batch_size);
    tc.probe.schedule = training::default_probe_schedule(steps_per_epoch, tc.steps);

    auto result = training::sgd_trajectory(*model, dataset, tc);
    result.trajectory.config_hash = hash;

    TrajectoryOutput out;
    out.trajectory = result.trajectory;

    std::ostringstream dir_name;
    dir_name << "trajectory_c" << io::format_double(c) << "_seed" << seed;
    out.run_dir = resolve_out_dir(manifest.out_dir) / dir_name.str();

    const std::string csv_text = io::render_csv(trajectory_csv(result.trajectory, hash));
    write_guarded(out.run_dir / "trajectory.csv", csv_text, hash, force);

    nlohmann::json sidecar;
    sidecar["manifest_hash"] = hash;
    sidecar["manifest"] = manifest.to_json();
    sidecar["c"] = c;
    sidecar["seed"] = seed;
    sidecar["probe_seed"] = tc.probe.seed;
    sidecar["lambda0"] = result.trajectory.lambda0;
    sidecar["eta"] = result.trajectory.eta;
    if (result.trajectory.diverged_at) sidecar["diverged_at"] = *result.trajectory.diverged_at;
    write_guarded(out.run_dir / "manifest.json", sidecar.dump(2) + "\n", hash, force);

    write_guarded(out.run_dir / "trajectory.svg",
                  trajectory_svg_from_csv(csv_text, result.trajectory.eta, hash), hash, force);

    if (save_checkpoints && theta0_net) {
        models::save_params(*theta0_net, (out.run_dir / "theta0.bin").string(), seed);
        models::NetworkParams final_net = *theta0_net;
        final_net.unflatten(result.theta_final);
        models::save_params(final_net, (out.run_dir / "theta_final.bin").string(), seed);
    }
    return out;
}

// ---------------------------------------------------------------------------
// phase-diagram command
// ---------------------------------------------------------------------------

struct PhaseDiagramOutput {
    std::vector<phases::CriticalConstants> constants;
    phases::PhaseDiagram diagram;
    fs::path out_dir;
};

inline std::vector<phases::CriticalConstants> run_all_scans(const SweepManifest& manifest,
                                                            const data::Dataset* dataset,
                                                            int workers) {
    struct Job {
        int d, w;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    if (manifest.family == "uv") {
        for (int w : manifest.uv_widths)
            for (auto seed : manifest.seeds) jobs.push_back({2, w, seed});
    } else {
        for (const auto& [d, w] : manifest.archs)
            for (auto seed : manifest.seeds) jobs.push_back({d, w, seed});
    }
    const auto grid = phases::CGrid::from_range(manifest.grid_x0, manifest.grid_xmax,
                                                manifest.grid_step);
    return parallel_map(jobs, workers, [&](const Job& job) {
        if (manifest.family == "uv") {
            phases::UvScanConfig cfg;
            cfg.width = job.w;
            cfg.T1 = manifest.T1;
            cfg.K = manifest.K;
            cfg.scaling = scaling_from(manifest);
            cfg.metric = metric_from(manifest);
            cfg.probe_iters = manifest.probe_iters;
            cfg.s_points = manifest.s_points;
            cfg.grid_opts.x_cap = manifest.grid_xcap;
            return phases::scan_uv_critical_constants(cfg, grid, job.seed);
        }
        phases::FcnScanConfig cfg;
        cfg.arch = models::ArchConfig{job.d, job.w, dataset->n_in(), dataset->n_out()};
        cfg.T1 = manifest.T1;
        cfg.K = manifest.K;
        cfg.batch_size = std::min<long>(manifest.batch_size, dataset->size());
        cfg.probe_m = std::min<long>(manifest.probe_m, dataset->size());
        cfg.probe_iters = manifest.probe_iters;
        cfg.s_points = manifest.s_points;
        cfg.grid_opts.x_cap = manifest.grid_xcap;
        return phases::scan_critical_constants(cfg, *dataset, grid, job.seed);
    });
}

inline io::CsvTable constants_csv(const std::vector<phases::CriticalConstants>& constants,
                                  const std::string& hash) {
    io::CsvTable table;
    table.comments = {"manifest=" + hash, "schema=sharpscope-constants-v1"};
    table.header = {"seed", "d", "w", "c_loss", "c_sharp", "c_max", "c_barrier"};
    for (const auto& c : constants)
        table.rows.push_back({std::to_string(c.seed), std::to_string(c.d), std::to_string(c.w),
                              opt_cell(c.c_loss), opt_cell(c.c_sharp), opt_cell(c.c_max),
                              opt_cell(c.c_barrier)});
    return table;
}

inline io::CsvTable phase_diagram_csv(const phases::PhaseDiagram& diagram,
                                      const std::string& hash) {
    io::CsvTable table;
    table.comments = {"manifest=" + hash, "schema=sharpscope-phase-diagram-v1"};
    table.header = {"d", "w", "dw", "seeds", "constant", "mean", "q25", "q75", "defined",
                    "flagged"};
    const std::pair<const char*, phases::ConstantStat phases::PhaseDiagramRow::*> kinds[] = {
        {"c_loss", &phases::PhaseDiagramRow::c_loss},
        {"c_sharp", &phases::PhaseDiagramRow::c_sharp},
        {"c_max", &phases::PhaseDiagramRow::c_max},
        {"c_barrier", &phases::PhaseDiagramRow::c_barrier},
    };
    for (const auto& row : diagram.rows)
        for (const auto& [name, member] : kinds) {
            const auto& stat = row.*member;
            table.rows.push_back({std::to_string(row.d), std::to_string(row.w),
                                  io::format_double(row.dw), std::to_string(row.seeds), name,
                                  opt_cell(stat.mean), opt_cell(stat.q25), opt_cell(stat.q75),
                                  std::to_string(stat.defined), row.flagged ? "1" : "0"});
        }
    return table;
}

inline std::string phase_diagram_svg_from_csv(const std::string& csv_text,
                                              const std::map<std::string, std::vector<double>>& fits,
                                              const std::string& hash) {
    const io::CsvTable table = io::parse_csv(csv_text);
    io::Panel panel;
    panel.title = "early-training phase diagram";
    panel.x_axis = {"d/w", 10};
    panel.y_axis = {"critical constant", 2};

    std::map<std::string, io::Series> by_constant;
    double dw_min = 1e300, dw_max = -1e300;
    int color = 0;
    for (const char* name : {"c_loss", "c_sharp", "c_max", "c_barrier"}) {
        io::Series s;
        s.label = name;
        s.color = io::kPalette[color++ % 7];
        s.points = true;
        by_constant[name] = s;
    }
    for (const auto& row : table.rows) {
        const std::string& name = row[4];
        if (!by_constant.count(name) || row[5].empty()) continue;
        auto& s = by_constant[name];
        const double dw = std::strtod(row[2].c_str(), nullptr);
        s.x.push_back(dw);
        s.y.push_back(std::strtod(row[5].c_str(), nullptr));
        s.bar_lo.push_back(row[6].empty() ? s.y.back() : std::strtod(row[6].c_str(), nullptr));
        s.bar_hi.push_back(row[7].empty() ? s.y.back() : std::strtod(row[7].c_str(), nullptr));
        s.point_titles.push_back("d=" + row[0] + " w=" + row[1] + " " + name + "=" + row[5]);
        dw_min = std::min(dw_min, dw);
        dw_max = std::max(dw_max, dw);
    }
    for (auto& [name, s] : by_constant) {
        if (s.x.empty()) continue;
        panel.series.push_back(s);
        // fitted curve: degree-2 polynomial of log2(mean) vs d/w
        if (auto it = fits.find(name); it != fits.end() && dw_max > dw_min) {
            io::Series fit;
            fit.color = s.color;
            fit.dashed = true;
            for (int i = 0; i <= 60; ++i) {
                const double dw = dw_min + (dw_max - dw_min) * i / 60.0;
                fit.x.push_back(dw);
                fit.y.push_back(std::exp2(numkit::polyval(it->second, dw)));
            }
            panel.series.push_back(fit);
        }
    }
    panel.hlines.push_back(2.0);  // the c = 2 reference of the paper's diagrams
    return io::render_svg({panel}, hash);
}

inline PhaseDiagramOutput cmd_phase_diagram(const SweepManifest& manifest, int workers,
                                            bool force = false) {
    manifest.validate();
    if (manifest.family == "fcn" && manifest.archs.size() < 2)
        throw config_error("phase-diagram: need at least 2 (d, w) architectures");
    if (manifest.family == "uv" && manifest.uv_widths.size() < 2)
        throw config_error("phase-diagram: need at least 2 uv widths");
    const std::string hash = manifest.content_hash();

    std::optional<data::Dataset> dataset;
    if (manifest.family == "fcn") dataset = dataset_from_manifest(manifest);

    PhaseDiagramOutput out;
    out.constants = run_all_scans(manifest, dataset ? &*dataset : nullptr, workers);
    out.diagram = phases::assemble_phase_diagram(out.constants);
    out.out_dir = resolve_out_dir(manifest.out_dir);

    write_guarded(out.out_dir / "constants.csv", io::render_csv(constants_csv(out.constants, hash)),
                  hash, force);
    const std::string pd_csv = io::render_csv(phase_diagram_csv(out.diagram, hash));
    write_guarded(out.out_dir / "phase_diagram.csv", pd_csv, hash, force);
    write_guarded(out.out_dir / "phase_diagram.svg",
                  phase_diagram_svg_from_csv(pd_csv, out.diagram.fits, hash), hash, force);

    nlohmann::json sidecar;
    sidecar["manifest_hash"] = hash;
    sidecar["manifest"] = manifest.to_json();
    for (const auto& [name, coeffs] : out.diagram.fits) sidecar["fits"][name] = coeffs;
    write_guarded(out.out_dir / "phase_diagram.json", sidecar.dump(2) + "\n", hash, force);
    return out;
}

// ---------------------------------------------------------------------------
// saturation command
// ---------------------------------------------------------------------------

struct SaturationOutput {
    // keyed by (d, w); uv rows use d = 2
    std::vector<std::pair<std::pair<int, int>, phases::SaturationCurve>> curves;
    std::vector<std::pair<std::pair<int, int>, phases::ChiCurves>> chi;
    fs::path out_dir;
};

inline phases::TauRule tau_rule_from(const SweepManifest& m) {
    phases::TauRule rule;
    rule.kind = m.tau_rule == "fixed" ? phases::TauRule::Kind::Fixed : phases::TauRule::Kind::CTau;
    rule.value = m.tau_value;
    return rule;
}

inline SaturationOutput cmd_saturation(const SweepManifest& manifest, int workers,
                                       bool force = false) {
    manifest.validate();
    const std::string hash = manifest.content_hash();
    const auto grid = phases::CGrid::from_range(manifest.sat_x0, manifest.sat_xmax,
                                                manifest.grid_step);
    const phases::TauRule tau = tau_rule_from(manifest);

    std::optional<data::Dataset> fcn_dataset;
    if (manifest.family == "fcn") fcn_dataset = dataset_from_manifest(manifest);
    const data::Dataset uv_data = training::uv_dataset();

    struct Job {
        int d, w;
        int grid_index;
        std::uint64_t seed;
    };
    std::vector<std::pair<int, int>> cells;
    if (manifest.family == "uv")
        for (int w : manifest.uv_widths) cells.emplace_back(2, w);
    else
        for (const auto& [d, w] : manifest.archs) cells.emplace_back(d, w);

    std::vector<Job> jobs;
    for (const auto& [d, w] : cells)
        for (int i = 0; i < grid.count; ++i)
            for (auto seed : manifest.seeds) jobs.push_back({d, w, i, seed});

    auto values = parallel_map(jobs, workers, [&](const Job& job) -> std::optional<double> {
        phases::SaturationConfig cfg;
        cfg.c = grid.value(job.grid_index);
        cfg.seed = job.seed;
        cfg.tau = tau;
        cfg.window = manifest.tau_window;
        cfg.K = manifest.K;
        cfg.scaling = scaling_from(manifest);
        cfg.metric = metric_from(manifest);
        cfg.probe.iters = manifest.probe_iters;
        numkit::SeededRng root(job.seed);
        cfg.probe.seed = root.derive("probe").seed();
        numkit::SeededRng init = root.derive("init");
        if (manifest.family == "uv") {
            cfg.batch_size = 1;
            cfg.probe.m = 1;
            training::UvModel model(models::init_uv(job.w, init));
            return phases::saturation_sharpness(model, uv_data, cfg);
        }
        cfg.batch_size = std::min<long>(manifest.batch_size, fcn_dataset->size());
        cfg.probe.m = std::min<long>(manifest.probe_m, fcn_dataset->size());
        models::ArchConfig arch{job.d, job.w, fcn_dataset->n_in(), fcn_dataset->n_out()};
        training::FcnModel model(models::init_fcn(arch, init));
        return phases::saturation_sharpness(model, *fcn_dataset, cfg);
    });

    SaturationOutput out;
    out.out_dir = resolve_out_dir(manifest.out_dir);

    io::CsvTable sat_table;
    sat_table.comments = {"manifest=" + hash, "schema=sharpscope-saturation-v1"};
    sat_table.header = {"d", "w", "c", "mean", "std", "seeds_used"};
    io::CsvTable chi_table;
    chi_table.comments = {"manifest=" + hash, "schema=sharpscope-chi-v1"};
    chi_table.header = {"d", "w", "c", "smoothed", "chi", "chi_prime"};

    nlohmann::json sidecar;
    sidecar["manifest_hash"] = hash;
    sidecar["manifest"] = manifest.to_json();

    std::size_t job_at = 0;
    for (const auto& cell : cells) {
        std::vector<std::vector<std::optional<double>>> per_grid(
            static_cast<std::size_t>(grid.count));
        for (int i = 0; i < grid.count; ++i) {
            per_grid[static_cast<std::size_t>(i)].reserve(manifest.seeds.size());
            for (std::size_t s = 0; s < manifest.seeds.size(); ++s)
                per_grid[static_cast<std::size_t>(i)].push_back(values[job_at++]);
        }
        auto curve = phases::assemble_saturation_curve(grid, per_grid, tau);
        for (std::size_t i = 0; i < curve.c.size(); ++i)
            sat_table.rows.push_back({std::to_string(cell.first), std::to_string(cell.second),
                                      io::format_double(curve.c[i]),
                                      io::format_double(curve.mean[i]),
                                      io::format_double(curve.stddev[i]),
                                      std::to_string(curve.seeds_used[i])});

        const std::string key = std::to_string(cell.first) + "x" + std::to_string(cell.second);
        try {
            phases::ChiFilterParams filter;
            filter.c_max_analysis = manifest.chi_c_max;
            auto chi = phases::extract_c_crit(curve, filter);
            for (std::size_t i = 0; i < chi.c.size(); ++i)
                chi_table.rows.push_back({std::to_string(cell.first), std::to_string(cell.second),
                                          io::format_double(chi.c[i]),
                                          io::format_double(chi.smoothed[i]),
                                          io::format_double(chi.chi[i]),
                                          io::format_double(chi.chi_prime[i])});
            sidecar["c_crit"][key] = chi.c_crit;
            out.chi.emplace_back(cell, std::move(chi));
        } catch (const contract_error& e) {
            sidecar["c_crit_error"][key] = e.what();
        }
        out.curves.emplace_back(cell, std::move(curve));
    }

    const std::string sat_csv = io::render_csv(sat_table);
    write_guarded(out.out_dir / "saturation.csv", sat_csv, hash, force);
    write_guarded(out.out_dir / "chi.csv", io::render_csv(chi_table), hash, force);
    write_guarded(out.out_dir / "saturation.json", sidecar.dump(2) + "\n", hash, force);

    // Panels: normalized sharpness, chi, chi' (one colored series per cell).
    io::Panel mean_panel, chi_panel, chip_panel;
    mean_panel.title = "normalized sharpness at tau";
    mean_panel.x_axis = {"c", 2};
    mean_panel.y_axis = {"lambda_tau / lambda_0", 0};
    mean_panel.vlines.push_back(2.0);
    chi_panel.title = "chi";
    chi_panel.x_axis = {"c", 2};
    chi_panel.y_axis = {"chi", 0};
    chip_panel.title = "chi'";
    chip_panel.x_axis = {"c", 2};
    chip_panel.y_axis = {"chi'", 0};
    int color = 0;
    for (const auto& [cell, curve] : out.curves) {
        io::Series s;
        s.label = "d=" + std::to_string(cell.first) + " w=" + std::to_string(cell.second);
        s.color = io::kPalette[color % 7];
        s.x = curve.c;
        s.y = curve.mean;
        s.points = true;
        mean_panel.series.push_back(s);
        ++color;
    }
    color = 0;
    for (const auto& [cell, chi] : out.chi) {
        io::Series s1;
        s1.color = io::kPalette[color % 7];
        s1.x = chi.c;
        s1.y = chi.chi;
        chi_panel.series.push_back(s1);
        io::Series s2 = s1;
        s2.y = chi.chi_prime;
        chip_panel.series.push_back(s2);
        chip_panel.vlines.push_back(chi.c_crit);
        ++color;
    }
    write_guarded(out.out_dir / "saturation.svg",
                  io::render_svg({mean_panel, chi_panel, chip_panel}, hash), hash, force);
    return out;
}

}  // namespace sharpscope::sweep
