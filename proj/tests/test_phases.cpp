#include <doctest.h>

#include <cmath>

#include "sharpscope/data/synthetic.hpp"
#include "sharpscope/phases/chi.hpp"
#include "sharpscope/phases/phase_diagram.hpp"
#include "sharpscope/phases/scan.hpp"
#include "sharpscope/phases/segmentation.hpp"
#include "sharpscope/uvlab/closed_forms.hpp"

using namespace sharpscope;
using namespace sharpscope::phases;
using numkit::Vector;

namespace {

training::Trajectory synthetic_trajectory(const std::vector<double>& losses,
                                          const std::vector<double>& sharps) {
    training::Trajectory traj;
    traj.lambda0 = sharps.empty() ? 1.0 : sharps.front();
    traj.eta = 1.0;
    for (std::size_t t = 0; t < losses.size(); ++t) {
        training::StepRecord rec;
        rec.t = static_cast<long>(t);
        rec.loss = losses[t];
        if (t < sharps.size()) rec.sharpness = sharps[t];
        traj.records.push_back(rec);
    }
    return traj;
}

}  // namespace

TEST_CASE("detect_catapult: two-decimal rounding rule") {
    std::vector<double> sharps(11, 1.0);
    SUBCASE("ratios at or below 1.004 round down to 1.00") {
        std::vector<double> losses{1.0, 1.004, 1.002, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
        CHECK_FALSE(detect_catapult(synthetic_trajectory(losses, sharps), 10, CatapultMode::Loss));
    }
    SUBCASE("a single 1.01 ratio fires") {
        std::vector<double> losses{1.0, 1.0, 1.0, 1.01, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
        CHECK(detect_catapult(synthetic_trajectory(losses, sharps), 10, CatapultMode::Loss));
    }
    SUBCASE("missing sharpness raises a contract error") {
        std::vector<double> losses(11, 1.0);
        auto traj = synthetic_trajectory(losses, {1.0, 1.0});  // sharpness stops at t=1
        CHECK_THROWS_AS(detect_catapult(traj, 10, CatapultMode::Sharp), contract_error);
    }
}

TEST_CASE("uv at k = 3: loss catapults, trace-sharpness does not") {
    numkit::SeededRng rng(12);
    auto state = models::init_uv(64, rng);
    training::UvModel model(state);
    training::TrainConfig cfg;
    cfg.c = 3.0;
    cfg.batch_size = 1;
    cfg.steps = 10;
    cfg.probe.m = 1;
    cfg.probe.schedule = training::every_step_schedule(10);
    cfg.scaling = training::Scaling::TraceK;
    cfg.metric = training::SharpnessMetric::Trace;
    auto result = training::sgd_trajectory(model, training::uv_dataset(), cfg);
    CHECK(detect_catapult(result.trajectory, 10, CatapultMode::Loss));
    CHECK_FALSE(detect_catapult(result.trajectory, 10, CatapultMode::Sharp));
}

TEST_CASE("uv trace-sharpness never catapults for k < 4 (update factor is negative)") {
    numkit::SeededRng rng(18);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 1 << (trial % 6);
        numkit::SeededRng init = rng.derive(trial);
        auto state = models::init_uv(w, init);
        const double k = 0.1 + 3.8 * rng.uniform();
        training::UvModel model(state);
        training::TrainConfig cfg;
        cfg.c = k;
        cfg.batch_size = 1;
        cfg.steps = 10;
        cfg.probe.m = 1;
        cfg.probe.schedule = training::every_step_schedule(10);
        cfg.scaling = training::Scaling::TraceK;
        cfg.metric = training::SharpnessMetric::Trace;
        auto result = training::sgd_trajectory(model, training::uv_dataset(), cfg);
        if (result.trajectory.diverged_at) continue;
        double prev = *result.trajectory.records.front().sharpness;
        for (const auto& rec : result.trajectory.records) {
            CHECK(*rec.sharpness <= prev * (1 + 1e-12));
            prev = *rec.sharpness;
        }
        CHECK_FALSE(detect_catapult(result.trajectory, 10, CatapultMode::Sharp));
    }
}

TEST_CASE("grid_scan: monotone-decreasing provider leaves c_loss absent") {
    auto grid = CGrid::from_range(0.0, 2.0, 0.1);
    auto provider = [](double, bool, bool) -> ScanRun { return {true, false, false, 0.0}; };
    GridScanOptions opts;
    opts.auto_extend = false;
    auto constants = grid_scan(grid, provider, opts);
    CHECK_FALSE(constants.c_loss.has_value());
    CHECK_FALSE(constants.c_sharp.has_value());
    CHECK_FALSE(constants.c_barrier.has_value());
    CHECK(constants.c_max == doctest::Approx(std::exp2(2.0)));
    CHECK_FALSE(constants.degenerate);
}

TEST_CASE("grid_scan: thresholds, divergence, degenerate flag") {
    auto grid = CGrid::from_range(0.0, 1.0, 0.1);
    SUBCASE("predicates fire at their grid minima") {
        auto provider = [](double c, bool, bool) -> ScanRun {
            ScanRun r;
            r.survived = c < 1.7;
            r.loss_catapult = c > 1.2;
            r.sharp_catapult = c > 1.4;
            r.barrier_U = c > 1.5 ? 1.0 : 0.0;
            return r;
        };
        GridScanOptions opts;
        opts.auto_extend = false;
        opts.barrier_tol = 1e-9;
        auto constants = grid_scan(grid, provider, opts);
        REQUIRE(constants.c_loss.has_value());
        REQUIRE(constants.c_sharp.has_value());
        REQUIRE(constants.c_barrier.has_value());
        REQUIRE(constants.c_max.has_value());
        CHECK(*constants.c_loss > 1.2);
        CHECK(*constants.c_loss <= 1.2 * std::exp2(0.1));
        CHECK(*constants.c_sharp >= *constants.c_loss);
        CHECK(*constants.c_barrier >= *constants.c_sharp);
        CHECK(*constants.c_max < 1.7);
    }
    SUBCASE("first grid point diverging flags the run degenerate") {
        auto provider = [](double, bool, bool) -> ScanRun { return {false, true, true, {}}; };
        GridScanOptions opts;
        opts.auto_extend = false;
        auto constants = grid_scan(grid, provider, opts);
        CHECK(constants.degenerate);
        CHECK_FALSE(constants.c_max.has_value());
    }
    SUBCASE("auto-extension brackets c_max beyond the initial grid") {
        auto provider = [](double c, bool, bool) -> ScanRun { return {c < 5.0, false, false, {}}; };
        GridScanOptions opts;
        opts.auto_extend = true;
        opts.x_cap = 6.0;
        auto constants = grid_scan(grid, provider, opts);
        REQUIRE(constants.c_max.has_value());
        CHECK(*constants.c_max < 5.0);
        CHECK(*constants.c_max > 5.0 / std::exp2(0.1) - 1e-9);
    }
}

TEST_CASE("barrier_profile: endpoints and convex cases") {
    numkit::SeededRng data_rng(5);
    auto ds = data::synthetic_dataset(64, 6, 3, data_rng);
    models::ArchConfig arch{2, 8, 6, 3};
    numkit::SeededRng rng(6);
    auto theta0 = models::init_fcn(arch, rng);

    SUBCASE("identical endpoints give a zero barrier (up to interpolation roundoff)") {
        auto profile = barrier_profile(theta0, theta0, ds, 11);
        CHECK(profile.barrier_U >= 0.0);
        CHECK(profile.barrier_U <= 1e-12);  // 1-ulp wiggle in (1-s)x + sx
    }
    SUBCASE("convex quadratic toy: descent endpoint means no barrier") {
        models::ArchConfig linear{1, 1, 6, 3, models::Activation::Linear};
        numkit::SeededRng lin_rng(7);
        auto a = models::init_fcn(linear, lin_rng);
        training::FcnModel model(a);
        auto full = data::full_batch(ds);
        // One small gradient step strictly reduces a convex quadratic loss.
        auto ev = model.eval_and_grad(full);
        training::FcnModel stepped(a);
        stepped.set_params(model.params() - 0.05 * ev.grad);
        models::NetworkParams b = a;
        b.unflatten(stepped.params());
        REQUIRE(stepped.loss_only(full) < model.loss_only(full));
        auto profile = barrier_profile(a, b, ds, 51);
        CHECK(profile.barrier_U == 0.0);
    }
    SUBCASE("s grid of fewer than 3 points is a contract error") {
        CHECK_THROWS_AS(barrier_profile(theta0, theta0, ds, 2), contract_error);
    }
}

TEST_CASE("extract_c_crit: constructed step curve and degenerate input") {
    auto grid = CGrid::from_range(0.0, 4.0, 0.1);
    SUBCASE("curve dropping at c = 4 yields c_crit near the generator's chi' peak") {
        const auto generator = [](double c) { return 1.0 / (1.0 + std::exp(5.0 * (c - 4.0))); };
        std::vector<std::vector<std::optional<double>>> values(
            static_cast<std::size_t>(grid.count));
        for (int i = 0; i < grid.count; ++i) {
            const double v = generator(grid.value(i));
            values[static_cast<std::size_t>(i)] = {v, v};
        }
        // Oracle: brute-force argmax of -mu'' of the generator on a fine grid.
        double oracle_c = 0.0, oracle_best = -1e300;
        for (double c = 1.0; c <= 10.0; c += 1e-3) {
            const double h = 1e-4;
            const double d2 = (generator(c + h) - 2 * generator(c) + generator(c - h)) / (h * h);
            if (-d2 > oracle_best) {
                oracle_best = -d2;
                oracle_c = c;
            }
        }
        auto curve = assemble_saturation_curve(grid, values, {});
        auto chi = extract_c_crit(curve);
        CHECK(chi.c_crit > oracle_c / std::exp2(0.3));
        CHECK(chi.c_crit < oracle_c * std::exp2(0.3));

        // argmax of chi' is invariant under positive scaling of the curve
        for (auto& per_seed : values)
            for (auto& v : per_seed)
                if (v) *v *= 37.5;
        auto scaled_curve = assemble_saturation_curve(grid, values, {});
        auto scaled_chi = extract_c_crit(scaled_curve);
        CHECK(scaled_chi.c_crit == doctest::Approx(chi.c_crit));
    }
    SUBCASE("constant curve reports no interior maximum") {
        std::vector<std::vector<std::optional<double>>> values(
            static_cast<std::size_t>(grid.count),
            std::vector<std::optional<double>>{1.0, 1.0});
        auto curve = assemble_saturation_curve(grid, values, {});
        CHECK_THROWS_WITH_AS(extract_c_crit(curve), doctest::Contains("no interior maximum"),
                             contract_error);
    }
    SUBCASE("single-seed curves are rejected") {
        std::vector<std::vector<std::optional<double>>> values(
            static_cast<std::size_t>(grid.count), std::vector<std::optional<double>>{1.0});
        auto curve = assemble_saturation_curve(grid, values, {});
        CHECK_THROWS_AS(extract_c_crit(curve), contract_error);
    }
}

TEST_CASE("segment_regimes: constructed trajectories") {
    SUBCASE("flat then ramp to 2/eta") {
        std::vector<double> losses(251, 1.0);
        std::vector<double> sharps(251);
        for (int t = 0; t <= 250; ++t) {
            if (t <= 50)
                sharps[static_cast<std::size_t>(t)] = 1.0;
            else
                sharps[static_cast<std::size_t>(t)] = 1.0 + (t - 50) * (19.0 / 150.0);
        }
        auto traj = synthetic_trajectory(losses, sharps);
        traj.eta = 0.1;  // 2/eta = 20, reached near t = 200
        auto regimes = segment_regimes(traj);
        REQUIRE(regimes.T2.has_value());
        CHECK(*regimes.T2 >= 50);
        CHECK(*regimes.T2 <= 75);
        REQUIRE(regimes.T3.has_value());
        CHECK(*regimes.T3 >= 190);
        CHECK(*regimes.T3 <= 210);
    }
    SUBCASE("sub-critical short run has no T2/T3") {
        std::vector<double> losses(9, 1.0);
        std::vector<double> sharps(9, 1.0);
        auto regimes = segment_regimes(synthetic_trajectory(losses, sharps));
        CHECK_FALSE(regimes.T2.has_value());
        CHECK_FALSE(regimes.T3.has_value());
    }
    SUBCASE("monotone-decreasing sharpness leaves only T1") {
        std::vector<double> losses(100, 1.0);
        std::vector<double> sharps(100);
        for (int t = 0; t < 100; ++t) sharps[static_cast<std::size_t>(t)] = 10.0 / (1.0 + t);
        auto traj = synthetic_trajectory(losses, sharps);
        traj.eta = 1e-3;
        auto regimes = segment_regimes(traj);
        CHECK(regimes.T1 == 10);
        CHECK_FALSE(regimes.T2.has_value());
        CHECK_FALSE(regimes.T3.has_value());
    }
}

TEST_CASE("assemble_phase_diagram: quantiles, flags, fits") {
    std::vector<CriticalConstants> runs;
    for (int seed = 0; seed < 5; ++seed) {
        CriticalConstants r;
        r.d = 2;
        r.w = 8;
        r.seed = static_cast<std::uint64_t>(seed);
        r.c_loss = 2.0;  // identical across seeds: zero-width quantile bars
        r.c_sharp = 3.0 + 0.1 * seed;
        r.c_max = 6.0;
        runs.push_back(r);
    }
    for (int seed = 0; seed < 5; ++seed) {
        CriticalConstants r;
        r.d = 4;
        r.w = 8;
        r.seed = static_cast<std::uint64_t>(seed);
        r.c_loss = 4.0 + 0.2 * seed;
        r.c_sharp = 5.0;
        r.c_max = 12.0;
        runs.push_back(r);
    }
    auto diagram = assemble_phase_diagram(runs);
    REQUIRE(diagram.rows.size() == 2);
    CHECK(diagram.rows[0].dw < diagram.rows[1].dw);
    const auto& first = diagram.rows[0];
    CHECK(*first.c_loss.mean == doctest::Approx(2.0));
    CHECK(*first.c_loss.q25 == doctest::Approx(2.0));
    CHECK(*first.c_loss.q75 == doctest::Approx(2.0));
    CHECK_FALSE(first.flagged);
    REQUIRE(diagram.fits.count("c_loss"));
    // two rows: linear fit, increasing in d/w
    CHECK(diagram.fits.at("c_loss").size() == 2);
    CHECK(diagram.fits.at("c_loss")[1] > 0.0);
}

TEST_CASE("scan_uv_critical_constants: k_max lands on 4 within one grid step") {
    UvScanConfig cfg;
    cfg.width = 8;
    auto grid = CGrid::from_range(0.0, 3.0, 0.1);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto constants = scan_uv_critical_constants(cfg, grid, seed);
        REQUIRE(constants.c_max.has_value());
        CHECK(*constants.c_max >= 4.0 - 1e-9);
        CHECK(*constants.c_max <= 4.0 * std::exp2(0.1) + 1e-9);
        if (constants.c_loss && constants.c_sharp) CHECK(*constants.c_loss <= *constants.c_sharp);
    }
}

TEST_CASE("scan_critical_constants: small FCN smoke scan keeps the ordering") {
    numkit::SeededRng data_rng(1);
    auto ds = data::synthetic_dataset(128, 8, 4, data_rng);
    FcnScanConfig cfg;
    cfg.arch = models::ArchConfig{2, 8, 8, 4};
    cfg.batch_size = 32;
    cfg.probe_m = 64;
    cfg.probe_iters = 20;
    cfg.s_points = 21;
    cfg.grid_opts.auto_extend = true;
    cfg.grid_opts.x_cap = 8.0;
    auto grid = CGrid::from_range(0.0, 4.0, 0.2);
    auto constants = scan_critical_constants(cfg, ds, grid, 3);
    REQUIRE(constants.c_max.has_value());
    CHECK_FALSE(constants.degenerate);
    // At this depth/width ratio the constants merge near the divergence
    // boundary; the minima can only sit within a couple grid steps of c_max.
    if (constants.c_loss) {
        CHECK(*constants.c_loss >= 1.0);
        CHECK(*constants.c_loss <= *constants.c_max * std::exp2(0.4) + 1e-9);
    }
    if (constants.c_sharp) CHECK(*constants.c_sharp <= *constants.c_max * std::exp2(0.4) + 1e-9);
}
