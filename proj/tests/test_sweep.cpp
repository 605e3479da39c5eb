#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sharpscope/io/sha1.hpp"
#include "sharpscope/sweep/commands.hpp"

using namespace sharpscope;
namespace fs = std::filesystem;

namespace {

sweep::SweepManifest tiny_uv_manifest(const std::string& out_dir) {
    sweep::SweepManifest m;
    m.family = "uv";
    m.uv_widths = {2, 8};
    m.scaling = "k";
    m.metric = "trace";
    m.grid_x0 = 0.0;
    m.grid_xmax = 2.5;
    m.grid_step = 0.1;
    m.seeds = {1, 2, 3};
    m.out_dir = out_dir;
    return m;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("sha1: known vectors") {
    CHECK(io::sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(io::sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(io::sha1_hex("The quick brown fox jumps over the lazy dog") ==
          "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
}

TEST_CASE("format_double: round-trips exactly") {
    numkit::SeededRng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::exp(40 * (rng.uniform() - 0.5)) * (rng.uniform() < 0.5 ? -1 : 1);
        const std::string s = io::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("csv: render/parse round trip with comments") {
    io::CsvTable table;
    table.comments = {"manifest=deadbeef"};
    table.header = {"a", "b", "c"};
    table.rows = {{"1", "", "x"}, {"2", "0.5", ""}};
    auto parsed = io::parse_csv(io::render_csv(table));
    CHECK(parsed.comments == table.comments);
    CHECK(parsed.header == table.header);
    CHECK(parsed.rows == table.rows);
}

TEST_CASE("manifest: validation and content hash") {
    auto m = tiny_uv_manifest("x");
    m.validate();
    const std::string h1 = m.content_hash();
    CHECK(h1.size() == 40);
    auto m2 = m;
    CHECK(m2.content_hash() == h1);
    m2.seeds = {1, 2, 4};
    CHECK(m2.content_hash() != h1);

    auto bad = m;
    bad.seeds = {};
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = m;
    bad.seeds = {1, 1};
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = m;
    bad.family = "cnn";
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = m;
    bad.schema_version = "";
    CHECK_THROWS_AS(bad.validate(), config_error);

    // JSON round trip preserves the hash
    auto restored = sweep::SweepManifest::from_json(m.to_json());
    CHECK(restored.content_hash() == h1);
}

TEST_CASE("write_guarded: refuses a differing manifest hash unless forced") {
    TempDir dir("sharpscope_guard_test");
    const fs::path file = dir.path / "out.csv";
    sweep::write_guarded(file, "# manifest=aaaa\nx\n", "aaaa", false);
    // same hash: fine
    sweep::write_guarded(file, "# manifest=aaaa\ny\n", "aaaa", false);
    // different hash: refused
    CHECK_THROWS_AS(sweep::write_guarded(file, "# manifest=bbbb\nz\n", "bbbb", false),
                    config_error);
    // forced: accepted
    sweep::write_guarded(file, "# manifest=bbbb\nz\n", "bbbb", true);
    CHECK(sweep::read_text_file(file) == "# manifest=bbbb\nz\n");
}

TEST_CASE("parallel_map: order-stable, worker-count independent, propagates errors") {
    std::vector<int> jobs(64);
    for (int i = 0; i < 64; ++i) jobs[static_cast<std::size_t>(i)] = i;
    auto square = [](int x) { return x * x; };
    auto serial = sweep::parallel_map(jobs, 1, square);
    auto parallel = sweep::parallel_map(jobs, 8, square);
    CHECK(serial == parallel);
    for (int i = 0; i < 64; ++i) CHECK(serial[static_cast<std::size_t>(i)] == i * i);

    auto throwing = [](int x) {
        if (x == 13) throw config_error("boom");
        return x;
    };
    CHECK_THROWS_AS(sweep::parallel_map(jobs, 4, throwing), config_error);
}

TEST_CASE("cmd_trajectory: re-runs are byte-identical, SVG re-renders losslessly") {
    TempDir dir("sharpscope_traj_test");
    auto m = tiny_uv_manifest((dir.path / "out").string());
    m.steps = 12;

    auto out1 = sweep::cmd_trajectory(m, 3.0, 5);
    const std::string csv1 = sweep::read_text_file(out1.run_dir / "trajectory.csv");
    const std::string svg1 = sweep::read_text_file(out1.run_dir / "trajectory.svg");

    auto out2 = sweep::cmd_trajectory(m, 3.0, 5);  // same manifest: no conflict
    CHECK(sweep::read_text_file(out2.run_dir / "trajectory.csv") == csv1);
    CHECK(sweep::read_text_file(out2.run_dir / "trajectory.svg") == svg1);

    // deleting the SVG and re-rendering from the CSV alone reproduces it
    fs::remove(out1.run_dir / "trajectory.svg");
    const std::string svg2 =
        sweep::trajectory_svg_from_csv(csv1, out1.trajectory.eta, m.content_hash());
    CHECK(svg2 == svg1);

    // k = 3 uv run: the loss column is non-monotone (catapult then decay)
    auto parsed = io::parse_csv(csv1);
    std::vector<double> losses;
    for (const auto& row : parsed.rows) losses.push_back(std::strtod(row[1].c_str(), nullptr));
    bool rose = false, fell = false;
    for (std::size_t i = 1; i < losses.size(); ++i) {
        if (losses[i] > losses[i - 1]) rose = true;
        if (losses[i] < losses[i - 1]) fell = true;
    }
    CHECK(rose);
    CHECK(fell);
}

TEST_CASE("cmd_phase_diagram: uv family, identical outputs for 1 and 3 workers") {
    TempDir d1("sharpscope_pd_w1"), d3("sharpscope_pd_w3");
    auto m1 = tiny_uv_manifest((d1.path / "out").string());
    auto m3 = m1;
    m3.out_dir = (d3.path / "out").string();

    auto out1 = sweep::cmd_phase_diagram(m1, 1);
    auto out3 = sweep::cmd_phase_diagram(m3, 3);

    const std::string c1 = sweep::read_text_file(out1.out_dir / "constants.csv");
    const std::string c3 = sweep::read_text_file(out3.out_dir / "constants.csv");
    // same manifest content: embedded hashes agree, so the files must too
    CHECK(m1.content_hash() == m3.content_hash());
    CHECK(c1 == c3);
    CHECK(sweep::read_text_file(out1.out_dir / "phase_diagram.csv") ==
          sweep::read_text_file(out3.out_dir / "phase_diagram.csv"));

    // k_max = 4 for every uv run on this grid
    for (const auto& constants : out1.constants) {
        REQUIRE(constants.c_max.has_value());
        CHECK(*constants.c_max >= 4.0 - 1e-9);
        CHECK(*constants.c_max <= 4.0 * std::exp2(0.1) + 1e-9);
    }
}

TEST_CASE("cmd_saturation: uv curves produce c_crit near 2") {
    TempDir dir("sharpscope_sat_test");
    auto m = tiny_uv_manifest((dir.path / "out").string());
    m.scaling = "c";
    m.metric = "eig";
    m.uv_widths = {8};
    m.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
    m.sat_x0 = -1.0;
    m.sat_xmax = 1.7;
    m.chi_c_max = 3.5;
    m.tau_rule = "ctau";
    m.tau_value = 200;

    auto out = sweep::cmd_saturation(m, 4);
    REQUIRE(out.curves.size() == 1);
    REQUIRE(out.chi.size() == 1);
    const double c_crit = out.chi.front().second.c_crit;
    CHECK(c_crit > 1.5);
    CHECK(c_crit < 2.7);
    CHECK(fs::exists(out.out_dir / "saturation.csv"));
    CHECK(fs::exists(out.out_dir / "chi.csv"));
    CHECK(fs::exists(out.out_dir / "saturation.svg"));
}
