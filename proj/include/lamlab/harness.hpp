#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lamlab/analysis.hpp"
#include "lamlab/boundary.hpp"
#include "lamlab/geom.hpp"
#include "lamlab/kset.hpp"
#include "lamlab/plateau.hpp"

namespace lamlab::harness {

struct ConfigError : std::runtime_error {
  std::string path;  // JSON-pointer of the offending value
  ConfigError(std::string json_path, const std::string& what)
      : std::runtime_error(json_path + ": " + what), path(std::move(json_path)) {}
};

struct AnalysisParams {
  double rho = 0.1;
  std::optional<double> epsilon;  // measured from the boundary when absent
  double delta = 0.1;
  int rotations = 8;
  double r_min = 0.25;
  int level_heights = 20;
};

struct ExperimentConfig {
  double range_lo = -0.5;
  double range_hi = 0.5;
  kset::ClosedSetSpec kset;  // empty by default
  std::vector<int> n{1};
  double lambda0 = 2.0 * 3.14159265358979323846;
  double eta = 0.05;
  double theta_step_max = 3.14159265358979323846 / 24.0;
  double z_step_frac = 1.0 / 64.0;  // z step cap as a fraction of (b - a)
  int n_r = 16;
  plateau::SolverParams solver;
  AnalysisParams analysis;
  int reflect_levels = 0;
  bool axis_double = true;

  ExperimentConfig();
};

/// Parses and validates a config document; unknown keys and invariant
/// violations raise ConfigError with the JSON-pointer path.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_json(const ExperimentConfig& cfg);

/// Built-in experiment families: helicoid (K empty), point (K = {0}),
/// cantor2 (depth-2 middle thirds), interval.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct StageOutcome {
  int n = 0;
  bool ok = false;
  std::string error;
  plateau::SolveStatus status = plateau::SolveStatus::MaxIterations;
  int iterations = 0;
  double final_area = 0;
  double final_residual = 0;
  analysis::AnalysisReport report;
  geom::TriMesh solved;
  geom::TriMesh analysis_mesh;  // axis-doubled / extended when enabled
  plateau::SolveRecord record;
  bool all_verdicts_pass = false;
};

/// Full single-n pipeline: profile -> loop -> solve -> (reflect/double) ->
/// analysis.  Throws only on programmer error; stage failures are recorded.
StageOutcome run_single_n(const ExperimentConfig& cfg, int n);

struct RunResult {
  std::vector<StageOutcome> stages;
  std::vector<analysis::BlowupRow> blowup;
  int exit_code = 0;  // 0 pass, 2 analysis verdict failure, 3 solver failure
};

/// Runs every n of the config (worker pool capped by LAMLAB_THREADS), writes
/// the run directory (run.json, n_<k>/{mesh.obj,vertices.csv,solve.csv},
/// blowup.csv, summary.json) and returns the in-memory results.
RunResult run_sequence(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Re-runs the analysis passes on the stored meshes of a run directory and
/// rewrites vertices.csv and summary.json there.
int analyze_run_dir(const std::filesystem::path& run_dir);

/// Re-emits the artifacts of one stored n (mesh + sidecar + boundary loop)
/// into out_dir.
void export_stage(const std::filesystem::path& run_dir, int n,
                  const std::filesystem::path& out_dir);

/// Worker count: min(hardware, tasks), capped by LAMLAB_THREADS when set.
int worker_count(int tasks);

}  // namespace lamlab::harness
