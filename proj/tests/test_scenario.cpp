#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlf/scenario.hpp"

using namespace nlf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

const char* kSmallScenario = R"({
  "name": "toy",
  "domain": {"xlim": [-6, 6], "ylim": [-6, 6], "h": 0.5},
  "obstacle": {"builtin": "disk", "center": [0, 0], "radius": 1.5},
  "metric": {"kind": "euclidean"},
  "kernel": {"profile": "gaussian", "radius": 1.0},
  "nonlinearity": {"kind": "cubic", "theta": 0.3},
  "scheme": {"type": "explicit", "dt": 0.4},
  "initial": {"type": "heaviside", "x1_0": 3.0, "smoothing_width": 1.0},
  "snapshots": [0, 40, 80, 120, 160, 200, 240, 280],
  "analysis": {
    "levels": [0.5],
    "rays": [-3.0, 3.0],
    "A_values": [0, 2, 4],
    "probes": [{"name": "window", "all": true}],
    "speed_window": [0, 120]
  },
  "output": {"dir": "/tmp/nlf_toy_out"}
})";

}  // namespace

TEST_CASE("config parsing round trip and hashing") {
    const auto sc = scenario_from_json_text(kSmallScenario);
    CHECK(sc.name == "toy");
    CHECK(sc.dom.h == 0.5);
    CHECK(sc.met.kind == metric_kind::euclidean);
    CHECK(sc.kernel_radius == 1.0);
    CHECK(sc.f.theta() == 0.3);
    CHECK(sc.snapshot_times.size() == 8);
    // whitespace and key order do not change the hash
    std::string reordered = kSmallScenario;
    reordered.insert(1, "\n  \"output\": {\"dir\": \"/tmp/nlf_toy_out\"},");
    const auto sc2 = scenario_from_json_text(reordered);
    CHECK(sc.config_hash() == sc2.config_hash());
    CHECK(sc.geometry_hash() == sc2.geometry_hash());
    // a real change does
    std::string changed = kSmallScenario;
    auto pos = changed.find("0.3");
    changed.replace(pos, 3, "0.31");
    CHECK(scenario_from_json_text(changed).config_hash() != sc.config_hash());
}

TEST_CASE("explicit obstacle parts parse") {
    const auto sc = scenario_from_json_text(R"({
      "domain": {"xlim": [-6, 6], "ylim": [-6, 6], "h": 0.5},
      "obstacle": {"parts": [
        {"disk": {"center": [0, 0], "radius": 1.0}},
        {"polygon": {"vertices": [[2, 2], [3, 2], [3, 3], [2, 3]]}}
      ]},
      "snapshots": [0, 1]
    })");
    CHECK(sc.dom.obs.parts().size() == 2);
    CHECK(sc.dom.obs.contains({0, 0}));
    CHECK(sc.dom.obs.contains({2.5, 2.5}));
    CHECK_FALSE(sc.dom.obs.contains({-2, -2}));
}

TEST_CASE("planar-wave initial data through the scenario path") {
    auto sc = scenario_from_json_text(R"({
      "domain": {"xlim": [-8, 8], "ylim": [-2, 2], "h": 0.25},
      "scheme": {"type": "explicit", "dt": 0.4},
      "initial": {"type": "planar_wave", "t0": 0.0},
      "extend_planar": true,
      "snapshots": [0, 5],
      "analysis": {"rays": [0.0]},
      "output": {"dir": "/tmp/nlf_planar_out"}
    })");
    const auto res = run_scenario(sc, 2, false, false);
    REQUIRE(res.traj.snapshots.size() == 2);
    for (double v : res.traj.snapshots.front().u) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    // mostly monotone; the coarse-grid quadrature floor allows small dips
    CHECK(res.traj.monotone_fraction >= 0.5);
    CHECK(res.traj.min_u >= -1e-12);
    CHECK(res.traj.max_u <= 1.0 + 1e-12);
}

TEST_CASE("malformed configs are parse errors") {
    CHECK_THROWS_AS(scenario_from_json_text("{not json"), config_parse_error);
    CHECK_THROWS_AS(scenario_from_json_text("{\"name\":\"x\"}"), config_parse_error);
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"domain":{"xlim":[0,1],"h":0.1},"metric":{"kind":"warp"}})"),
                    config_parse_error);
}

TEST_CASE("builtins parse and carry the documented setups") {
    for (const auto& name : builtin_names()) {
        const auto sc = builtin_scenario(name);
        CHECK(sc.name == name);
        CHECK(sc.dom.h > 0.0);
    }
    const auto disk = builtin_scenario("fig-disk");
    CHECK(disk.dom.xlim[0] == -15.0);
    CHECK(disk.scheme.dt == 0.05);
    CHECK(disk.snapshot_times.back() == 1000.0);
    const auto ann = builtin_scenario("fig-annulus");
    CHECK(ann.dom.xlim[0] == -11.0);
    CHECK(ann.scheme.dt == 0.1);
    CHECK(ann.snapshot_times.back() == 280.0);
    const auto geo = builtin_scenario("fig-square-annulus-geo");
    CHECK(geo.met.kind == metric_kind::geodesic);
    CHECK(geo.scheme.dt == 0.1);
    const auto eu = builtin_scenario("fig-square-annulus-euclid");
    CHECK(eu.met.kind == metric_kind::euclidean);
}

TEST_CASE("validation failures are named") {
    // balanced cubic violates (C5)
    auto sc = scenario_from_json_text(kSmallScenario);
    sc = [&] {
        std::string txt = kSmallScenario;
        auto pos = txt.find("\"theta\": 0.3");
        txt.replace(pos, 12, "\"theta\": 0.5");
        return scenario_from_json_text(txt);
    }();
    try {
        run_scenario(sc, 2, true);
        FAIL("expected validation error");
    } catch (const validation_error& e) {
        CHECK(std::string(e.what()).find("(C5)") != std::string::npos);
    }

    // obstacle too close to the box edge violates the margin requirement
    std::string txt = kSmallScenario;
    auto pos = txt.find("\"radius\": 1.5");
    txt.replace(pos, 13, "\"radius\": 5.5");
    try {
        run_scenario(scenario_from_json_text(txt), 2, true);
        FAIL("expected validation error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("(C1)") != std::string::npos);
    }
}

TEST_CASE("dry run validates without artifacts") {
    const auto sc = scenario_from_json_text(kSmallScenario);
    fs::remove_all(sc.out_dir);
    const auto res = run_scenario(sc, 2, true);
    CHECK(res.validation.nondegenerate_ok);
    CHECK(res.covering_fraction == 1.0);
    CHECK_FALSE(fs::exists(sc.out_dir));
}

TEST_CASE("toy scenario end to end: invasion, artifacts, determinism") {
    const auto sc = scenario_from_json_text(kSmallScenario);
    fs::remove_all(sc.out_dir);
    const auto res = run_scenario(sc, 2, false);
    CHECK(res.classification.classification == invasion_class::invasion);
    CHECK(res.traj.min_u >= -1e-12);
    CHECK(res.traj.max_u <= 1.0 + 1e-12);
    CHECK(res.speed_valid);
    CHECK(res.speed.r2 > 0.99);

    REQUIRE(fs::exists(fs::path(sc.out_dir) / "report.json"));
    REQUIRE(fs::exists(fs::path(sc.out_dir) / "front_track.csv"));
    REQUIRE(fs::exists(fs::path(sc.out_dir) / "snapshot_00.csv"));
    REQUIRE(fs::exists(fs::path(sc.out_dir) / "snapshot_00.pgm"));
    REQUIRE(fs::exists(fs::path(sc.out_dir) / "mask.pgm"));

    // every artifact carries the config hash
    char expect[32];
    std::snprintf(expect, sizeof expect, "%016llx",
                  static_cast<unsigned long long>(sc.config_hash()));
    for (const char* f : {"snapshot_00.csv", "front_track.csv", "snapshot_00.pgm"}) {
        const auto text = slurp(fs::path(sc.out_dir) / f);
        CHECK(text.find(std::string("# config=") + expect) != std::string::npos);
    }
    const auto report_text = slurp(fs::path(sc.out_dir) / "report.json");
    CHECK(report_text.find(expect) != std::string::npos);

    // re-running with the same config and threads is bit-identical
    std::vector<std::string> before;
    for (int k = 0; k < 8; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%02d.csv", k);
        before.push_back(slurp(fs::path(sc.out_dir) / name));
    }
    before.push_back(slurp(fs::path(sc.out_dir) / "front_track.csv"));
    run_scenario(sc, 2, false);
    for (int k = 0; k < 8; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%02d.csv", k);
        CHECK(slurp(fs::path(sc.out_dir) / name) == before[k]);
    }
    CHECK(slurp(fs::path(sc.out_dir) / "front_track.csv") == before.back());
    fs::remove_all(sc.out_dir);
}

TEST_CASE("pgm raster marks obstacle cells") {
    const auto sc = scenario_from_json_text(kSmallScenario);
    fs::remove_all(sc.out_dir);
    run_scenario(sc, 2, false);
    const auto pgm = slurp(fs::path(sc.out_dir) / "snapshot_00.pgm");
    // header: P5, comment, dims, maxval
    CHECK(pgm.substr(0, 2) == "P5");
    CHECK(pgm.find("24 24") != std::string::npos);
    const auto payload_at = pgm.find("255\n") + 4;
    REQUIRE(pgm.size() - payload_at == 24 * 24);
    int obstacle_px = 0;
    for (std::size_t i = payload_at; i < pgm.size(); ++i)
        if (static_cast<unsigned char>(pgm[i]) == 128) ++obstacle_px;
    // disk radius 1.5 at h=0.5 covers ~ pi r^2 / h^2 = 28 lattice cells
    CHECK(obstacle_px >= 20);
    CHECK(obstacle_px <= 40);
    fs::remove_all(sc.out_dir);
}

TEST_CASE("operator cache round trip through the environment") {
    const auto sc = scenario_from_json_text(kSmallScenario);
    const std::string cache = "/tmp/nlf_test_cachedir";
    fs::remove_all(cache);
    setenv("NONLOC_CACHE_DIR", cache.c_str(), 1);
    const auto first = prepare_scenario(sc, 2);
    CHECK_FALSE(first.op.stats.from_cache);
    const auto second = prepare_scenario(sc, 2);
    CHECK(second.op.stats.from_cache);
    CHECK(second.op.nnz() == first.op.nnz());
    for (int i = 0; i < first.g.n(); ++i)
        CHECK(first.op.row_sums()[i] == second.op.row_sums()[i]);
    unsetenv("NONLOC_CACHE_DIR");
    fs::remove_all(cache);
}
