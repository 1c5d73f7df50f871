#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "fixtures.hpp"
#include "lamlab/harness.hpp"
#include "lamlab/io.hpp"

using namespace lamlab;
using namespace lamlab::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lamlab_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small fast configuration for end-to-end runs.
const char* kTinyConfig = R"({
  "range": [0.0, 1.0],
  "kset": {"kind": "points", "z": []},
  "n": [1],
  "n_r": 8,
  "theta_step_max": 0.4,
  "solver": {"max_iterations": 400}
})";

}  // namespace

TEST_CASE("parse_config: minimal document gets defaults") {
  auto cfg = parse_config(R"({"kset":{"kind":"points","z":[0]},"n":[4,8]})");
  CHECK(cfg.range_lo == -0.5);
  CHECK(cfg.range_hi == 0.5);
  CHECK(cfg.n == std::vector<int>{4, 8});
  CHECK(cfg.n_r == 16);
  CHECK(cfg.solver.max_iterations == 500);
  CHECK(cfg.solver.tol_disp_rel == doctest::Approx(1e-7));
  CHECK(cfg.analysis.delta == doctest::Approx(0.1));
  CHECK_FALSE(cfg.analysis.epsilon.has_value());
}

TEST_CASE("parse_config: violations carry JSON-pointer paths") {
  try {
    parse_config(R"({"kset":{"kind":"points","z":[0]},"n":[8,4]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path == "/n");
  }
  try {
    parse_config(R"({"kset":{"kind":"cantor","base":[0,1],"depth":25},"n":[4]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path == "/kset/depth");
  }
  try {
    parse_config(R"({"kset":{"kind":"points","z":[0]},"n":[4],"frobnicate":1})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path == "/frobnicate");
  }
  try {
    parse_config(R"({"kset":{"kind":"points","z":[9]},"n":[4]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.path == "/kset");  // member outside the ambient range
  }
  CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"kset":{"kind":"points","z":[0]},"n":[4],"lambda0":-1})"),
                  ConfigError);
}

TEST_CASE("presets parse and round-trip through config_json") {
  for (const auto& name : preset_names()) {
    auto cfg = preset(name);
    auto back = parse_config(config_json(cfg));
    CHECK(back.n == cfg.n);
    CHECK(back.n_r == cfg.n_r);
    CHECK(back.range_lo == doctest::Approx(cfg.range_lo));
  }
  CHECK_THROWS_AS(preset("bogus"), ConfigError);
}

TEST_CASE("run_sequence: layout contract, summary verdicts, exit code") {
  const auto dir = fresh_dir("tiny_run");
  auto cfg = parse_config(kTinyConfig);
  auto run = run_sequence(cfg, dir);
  CHECK(run.exit_code == 0);

  std::set<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.insert(fs::relative(e.path(), dir).string());
  const std::set<std::string> expected = {"run.json", "n_1/mesh.obj", "n_1/vertices.csv",
                                          "n_1/solve.csv", "blowup.csv", "summary.json"};
  CHECK(files == expected);

  auto summary = nlohmann::json::parse(io::read_text_file(dir / "summary.json"));
  REQUIRE(summary.at("stages").size() == 1);
  const auto& verdicts = summary.at("stages")[0].at("verdicts");
  for (const char* key : {"monotonicity", "rado", "level_sets", "foliation", "jacobi"})
    CHECK(verdicts.contains(key));
  CHECK(summary.at("exit_code") == 0);

  auto run_meta = nlohmann::json::parse(io::read_text_file(dir / "run.json"));
  CHECK(run_meta.contains("created_utc"));
  CHECK(run_meta.at("config").at("n_r") == 8);

  // CSV headers are part of the contract.
  const std::string vcsv = io::read_text_file(dir / "n_1" / "vertices.csv");
  CHECK(vcsv.rfind("vertex_id,r,theta,z,absA,slope,u\n", 0) == 0);
  const std::string scsv = io::read_text_file(dir / "n_1" / "solve.csv");
  CHECK(scsv.rfind("iter,area,max_disp,residual,clamped_flag\n", 0) == 0);
  const std::string bcsv = io::read_text_file(dir / "blowup.csv");
  CHECK(bcsv.rfind("n,p,kappa_near,kappa_far\n", 0) == 0);
}

TEST_CASE("run_sequence is deterministic apart from the run.json timestamp") {
  const auto d1 = fresh_dir("det_a"), d2 = fresh_dir("det_b");
  auto cfg = parse_config(kTinyConfig);
  run_sequence(cfg, d1);
  run_sequence(cfg, d2);
  for (const auto& e : fs::recursive_directory_iterator(d1)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), d1);
    if (rel == "run.json") {
      auto a = nlohmann::json::parse(io::read_text_file(d1 / rel));
      auto b = nlohmann::json::parse(io::read_text_file(d2 / rel));
      a.erase("created_utc");
      b.erase("created_utc");
      CHECK(a == b);
    } else {
      CHECK(io::read_text_file(d1 / rel) == io::read_text_file(d2 / rel));
    }
  }
}

TEST_CASE("emit is byte-stable for identical meshes") {
  auto m = fixtures::helicoid_grid(4, 9, 0.25);
  CHECK(geom::obj_string(m) == geom::obj_string(m));
}

TEST_CASE("stage errors are recorded per n and the run keeps going") {
  const auto dir = fresh_dir("degenerate_run");
  auto cfg = parse_config(kTinyConfig);
  cfg.n = {1};
  cfg.solver.area_floor_rel = 0.9;  // rejects every update: degenerate status
  auto run = run_sequence(cfg, dir);
  CHECK(run.exit_code == 3);
  REQUIRE(run.stages.size() == 1);
  CHECK_FALSE(run.stages[0].ok);
  CHECK(!run.stages[0].error.empty());
  auto summary = nlohmann::json::parse(io::read_text_file(dir / "summary.json"));
  CHECK(summary.at("stages")[0].at("ok") == false);
  CHECK(summary.at("exit_code") == 3);
  // Emission still completed.
  CHECK(fs::exists(dir / "blowup.csv"));
}

TEST_CASE("an analysis verdict failure exits with code 2") {
  const auto dir = fresh_dir("verdict_fail_run");
  auto cfg = parse_config(kTinyConfig);
  cfg.analysis.epsilon = 100.0;  // no boundary is that steep: Rado hypothesis fails
  auto run = run_sequence(cfg, dir);
  CHECK(run.exit_code == 2);
  auto summary = nlohmann::json::parse(io::read_text_file(dir / "summary.json"));
  CHECK(summary.at("stages")[0].at("verdicts").at("rado").at("hypothesis_met") == false);
}

TEST_CASE("io failures surface the offending path") {
  try {
    io::write_text_file("/nonexistent_dir_lamlab_xyz/file.txt", "x");
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent_dir_lamlab_xyz/file.txt") != std::string::npos);
  }
}

TEST_CASE("analyze re-runs passes on a stored run") {
  const auto dir = fresh_dir("analyze_run");
  auto cfg = parse_config(kTinyConfig);
  run_sequence(cfg, dir);
  CHECK(analyze_run_dir(dir) == 0);
  auto summary = nlohmann::json::parse(io::read_text_file(dir / "summary.json"));
  CHECK(summary.at("stages")[0].at("verdicts").at("monotonicity").at("pass") == true);
}

TEST_CASE("export writes mesh, sidecar and boundary loop artifacts") {
  const auto dir = fresh_dir("export_run");
  auto cfg = parse_config(kTinyConfig);
  run_sequence(cfg, dir);
  const auto out = fresh_dir("export_out");
  export_stage(dir, 1, out);
  for (const char* f : {"mesh.obj", "mesh_sidecar.csv", "loop.csv", "loop.obj"})
    CHECK(fs::exists(out / f));
  const std::string loop_csv = io::read_text_file(out / "loop.csv");
  CHECK(loop_csv.rfind("s,x,y,z,role,theta_unwrapped\n", 0) == 0);
}

TEST_CASE("worker count respects LAMLAB_THREADS") {
  setenv("LAMLAB_THREADS", "1", 1);
  CHECK(worker_count(8) == 1);
  unsetenv("LAMLAB_THREADS");
  CHECK(worker_count(1) == 1);
  CHECK(worker_count(0) >= 1);
}
