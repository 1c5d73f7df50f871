#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "lamlab/harness.hpp"
#include "lamlab/io.hpp"

namespace fs = std::filesystem;
using namespace lamlab;

namespace {

harness::ExperimentConfig load_config(const std::string& config_path, const std::string& preset,
                                      int n_override) {
  harness::ExperimentConfig cfg;
  if (!preset.empty())
    cfg = harness::preset(preset);
  else if (!config_path.empty())
    cfg = harness::parse_config(io::read_text_file(config_path));
  else
    throw harness::ConfigError("/", "provide --config PATH or --preset NAME");
  if (n_override > 0) cfg.n = {n_override};
  return cfg;
}

int run_pipeline(const std::string& config_path, const std::string& preset, int n_override,
                 const std::string& out) {
  const auto cfg = load_config(config_path, preset, n_override);
  const auto res = harness::run_sequence(cfg, out);
  for (const auto& st : res.stages) {
    if (!st.ok)
      std::printf("n=%d  FAILED: %s\n", st.n, st.error.c_str());
    else
      std::printf("n=%d  %s  iters=%d  area=%s  residual=%s  verdicts=%s\n", st.n,
                  plateau::status_name(st.status), st.iterations, io::fmt(st.final_area).c_str(),
                  io::fmt(st.final_residual).c_str(), st.all_verdicts_pass ? "pass" : "FAIL");
  }
  std::printf("run directory: %s (exit %d)\n", out.c_str(), res.exit_code);
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lamlab: embedded minimal disk laboratory"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir = "run", in_dir;
  int n_override = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--preset", preset_name, "preset: helicoid | point | cantor2 | interval");
    cmd->add_option("--out", out_dir, "output directory");
  };

  auto* solve = app.add_subcommand("solve", "solve a single winding scale");
  add_common(solve);
  solve->add_option("--n", n_override, "winding scale override")->check(CLI::PositiveNumber);

  auto* sequence = app.add_subcommand("sequence", "run the full n-sequence");
  add_common(sequence);

  auto* analyze = app.add_subcommand("analyze", "re-run analysis passes on a stored run");
  analyze->add_option("--in", in_dir, "run directory")->required();

  auto* exp = app.add_subcommand("export", "export mesh, sidecar and boundary loop of one n");
  exp->add_option("--in", in_dir, "run directory")->required();
  exp->add_option("--n", n_override, "winding scale")->required();
  exp->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const auto cfg = load_config(config_path, preset_name, 0);
      const int n = n_override > 0 ? n_override : cfg.n.front();
      return run_pipeline(config_path, preset_name, n, out_dir);
    }
    if (sequence->parsed()) return run_pipeline(config_path, preset_name, 0, out_dir);
    if (analyze->parsed()) return harness::analyze_run_dir(in_dir);
    if (exp->parsed()) {
      harness::export_stage(in_dir, n_override, out_dir);
      std::printf("exported n=%d to %s\n", n_override, out_dir.c_str());
      return 0;
    }
  } catch (const harness::ConfigError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return 4;
  } catch (const plateau::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
