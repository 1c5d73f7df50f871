#include "lamlab/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <sstream>
#include <thread>

#include "lamlab/io.hpp"
#include "lamlab/reflect.hpp"

namespace lamlab::harness {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ExperimentConfig::ExperimentConfig() {
  kset = kset::ClosedSetSpec::finite_points({}, range_lo, range_hi);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&key](const char* a) { return key == a; }) == allowed.end())
      throw ConfigError(path + "/" + key, "unknown key");
  }
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

int require_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

kset::ClosedSetSpec parse_kset(const json& j, double a, double b) {
  if (!j.is_object()) throw ConfigError("/kset", "expected an object");
  if (!j.contains("kind")) throw ConfigError("/kset/kind", "missing");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "points") {
      reject_unknown_keys(j, "/kset", {"kind", "z"});
      std::vector<double> zs;
      if (j.contains("z"))
        for (std::size_t i = 0; i < j.at("z").size(); ++i)
          zs.push_back(require_number(j.at("z")[i], "/kset/z/" + std::to_string(i)));
      return kset::ClosedSetSpec::finite_points(std::move(zs), a, b);
    }
    if (kind == "intervals") {
      reject_unknown_keys(j, "/kset", {"kind", "intervals"});
      std::vector<kset::Interval> ivs;
      if (!j.contains("intervals")) throw ConfigError("/kset/intervals", "missing");
      for (std::size_t i = 0; i < j.at("intervals").size(); ++i) {
        const auto& iv = j.at("intervals")[i];
        const std::string p = "/kset/intervals/" + std::to_string(i);
        if (!iv.is_array() || iv.size() != 2) throw ConfigError(p, "expected [lo, hi]");
        ivs.push_back({require_number(iv[0], p + "/0"), require_number(iv[1], p + "/1")});
      }
      return kset::ClosedSetSpec::interval_union(std::move(ivs), a, b);
    }
    if (kind == "cantor") {
      reject_unknown_keys(j, "/kset", {"kind", "base", "depth"});
      if (!j.contains("base")) throw ConfigError("/kset/base", "missing");
      const auto& base = j.at("base");
      if (!base.is_array() || base.size() != 2)
        throw ConfigError("/kset/base", "expected [lo, hi]");
      const int depth = j.contains("depth") ? require_int(j.at("depth"), "/kset/depth") : 0;
      if (depth < 0 || depth > 20)
        throw ConfigError("/kset/depth", "depth must lie in [0, 20] (size guard)");
      return kset::ClosedSetSpec::cantor(
          {require_number(base[0], "/kset/base/0"), require_number(base[1], "/kset/base/1")},
          depth, a, b);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/kset", e.what());
  }
  throw ConfigError("/kset/kind", "must be one of points | intervals | cantor");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("/", "expected a JSON object");
  reject_unknown_keys(doc, "",
                      {"range", "kset", "n", "lambda0", "eta", "theta_step_max", "z_step_frac",
                       "n_r", "solver", "analysis", "reflect_levels", "axis_double"});

  ExperimentConfig cfg;
  if (doc.contains("range")) {
    const auto& r = doc.at("range");
    if (!r.is_array() || r.size() != 2) throw ConfigError("/range", "expected [a, b]");
    cfg.range_lo = require_number(r[0], "/range/0");
    cfg.range_hi = require_number(r[1], "/range/1");
    if (!(cfg.range_hi > cfg.range_lo)) throw ConfigError("/range", "requires a < b");
  }
  cfg.kset = doc.contains("kset")
                 ? parse_kset(doc.at("kset"), cfg.range_lo, cfg.range_hi)
                 : kset::ClosedSetSpec::finite_points({}, cfg.range_lo, cfg.range_hi);

  if (doc.contains("n")) {
    const auto& n = doc.at("n");
    if (!n.is_array() || n.empty()) throw ConfigError("/n", "expected a non-empty array");
    cfg.n.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const int v = require_int(n[i], "/n/" + std::to_string(i));
      if (v < 1) throw ConfigError("/n/" + std::to_string(i), "winding scale must be >= 1");
      if (!cfg.n.empty() && v <= cfg.n.back())
        throw ConfigError("/n", "list must be strictly increasing");
      cfg.n.push_back(v);
    }
  }

  if (doc.contains("lambda0")) {
    cfg.lambda0 = require_number(doc.at("lambda0"), "/lambda0");
    if (cfg.lambda0 <= 0) throw ConfigError("/lambda0", "must be positive");
  }
  if (doc.contains("eta")) {
    cfg.eta = require_number(doc.at("eta"), "/eta");
    if (cfg.eta < 0 || cfg.eta >= 0.5) throw ConfigError("/eta", "must lie in [0, 0.5)");
  }
  if (doc.contains("theta_step_max")) {
    cfg.theta_step_max = require_number(doc.at("theta_step_max"), "/theta_step_max");
    if (cfg.theta_step_max <= 0) throw ConfigError("/theta_step_max", "must be positive");
  }
  if (doc.contains("z_step_frac")) {
    cfg.z_step_frac = require_number(doc.at("z_step_frac"), "/z_step_frac");
    if (cfg.z_step_frac <= 0) throw ConfigError("/z_step_frac", "must be positive");
  }
  if (doc.contains("n_r")) {
    cfg.n_r = require_int(doc.at("n_r"), "/n_r");
    if (cfg.n_r < 4) throw ConfigError("/n_r", "must be >= 4");
  }

  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    if (!s.is_object()) throw ConfigError("/solver", "expected an object");
    reject_unknown_keys(s, "/solver",
                        {"max_iterations", "tol_disp_rel", "w_min", "w_max", "area_floor_rel",
                         "damping", "linear_tol", "linear_iters_per_vertex"});
    auto& p = cfg.solver;
    if (s.contains("max_iterations")) p.max_iterations = require_int(s.at("max_iterations"), "/solver/max_iterations");
    if (s.contains("tol_disp_rel")) p.tol_disp_rel = require_number(s.at("tol_disp_rel"), "/solver/tol_disp_rel");
    if (s.contains("w_min")) p.w_min = require_number(s.at("w_min"), "/solver/w_min");
    if (s.contains("w_max")) p.w_max = require_number(s.at("w_max"), "/solver/w_max");
    if (s.contains("area_floor_rel")) p.area_floor_rel = require_number(s.at("area_floor_rel"), "/solver/area_floor_rel");
    if (s.contains("damping")) p.damping = require_number(s.at("damping"), "/solver/damping");
    if (s.contains("linear_tol")) p.linear_tol = require_number(s.at("linear_tol"), "/solver/linear_tol");
    if (s.contains("linear_iters_per_vertex"))
      p.linear_iters_per_vertex = require_int(s.at("linear_iters_per_vertex"), "/solver/linear_iters_per_vertex");
    if (p.max_iterations < 1) throw ConfigError("/solver/max_iterations", "must be >= 1");
    if (p.tol_disp_rel <= 0) throw ConfigError("/solver/tol_disp_rel", "must be positive");
    if (!(p.w_min > 0) || !(p.w_max > p.w_min))
      throw ConfigError("/solver", "requires 0 < w_min < w_max");
    if (p.damping <= 0 || p.damping > 1) throw ConfigError("/solver/damping", "must lie in (0, 1]");
  }

  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    if (!a.is_object()) throw ConfigError("/analysis", "expected an object");
    reject_unknown_keys(a, "/analysis",
                        {"rho", "epsilon", "delta", "rotations", "r_min", "level_heights"});
    auto& p = cfg.analysis;
    if (a.contains("rho")) p.rho = require_number(a.at("rho"), "/analysis/rho");
    if (a.contains("epsilon") && !a.at("epsilon").is_null())
      p.epsilon = require_number(a.at("epsilon"), "/analysis/epsilon");
    if (a.contains("delta")) p.delta = require_number(a.at("delta"), "/analysis/delta");
    if (a.contains("rotations")) p.rotations = require_int(a.at("rotations"), "/analysis/rotations");
    if (a.contains("r_min")) p.r_min = require_number(a.at("r_min"), "/analysis/r_min");
    if (a.contains("level_heights"))
      p.level_heights = require_int(a.at("level_heights"), "/analysis/level_heights");
    if (p.rho <= 0) throw ConfigError("/analysis/rho", "must be positive");
    if (p.delta <= 0) throw ConfigError("/analysis/delta", "must be positive");
    if (p.rotations < 1) throw ConfigError("/analysis/rotations", "must be >= 1");
    if (p.level_heights < 1) throw ConfigError("/analysis/level_heights", "must be >= 1");
  }

  {
    // The blow-up tables need near-balls that stay clear of each other.
    const auto samples = kset::sample_points(cfg.kset);
    for (std::size_t i = 1; i < samples.size(); ++i) {
      const double gap = samples[i] - samples[i - 1];
      if (gap > 0 && cfg.analysis.rho >= 0.5 * gap)
        throw ConfigError("/analysis/rho", "must stay below half the minimum K-sample gap");
    }
  }

  if (doc.contains("reflect_levels")) {
    cfg.reflect_levels = require_int(doc.at("reflect_levels"), "/reflect_levels");
    if (cfg.reflect_levels < 0) throw ConfigError("/reflect_levels", "must be >= 0");
  }
  if (doc.contains("axis_double")) {
    if (!doc.at("axis_double").is_boolean()) throw ConfigError("/axis_double", "expected a bool");
    cfg.axis_double = doc.at("axis_double").get<bool>();
  }
  return cfg;
}

namespace {

json kset_to_json(const kset::ClosedSetSpec& k) {
  json j;
  switch (k.kind) {
    case kset::Kind::Points:
      j["kind"] = "points";
      j["z"] = k.points;
      break;
    case kset::Kind::Intervals: {
      j["kind"] = "intervals";
      json ivs = json::array();
      for (const auto& iv : k.intervals) ivs.push_back({iv.lo, iv.hi});
      j["intervals"] = std::move(ivs);
      break;
    }
    case kset::Kind::Cantor:
      j["kind"] = "cantor";
      j["base"] = {k.base.lo, k.base.hi};
      j["depth"] = k.depth;
      break;
  }
  return j;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["range"] = {cfg.range_lo, cfg.range_hi};
  j["kset"] = kset_to_json(cfg.kset);
  j["n"] = cfg.n;
  j["lambda0"] = cfg.lambda0;
  j["eta"] = cfg.eta;
  j["theta_step_max"] = cfg.theta_step_max;
  j["z_step_frac"] = cfg.z_step_frac;
  j["n_r"] = cfg.n_r;
  j["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                 {"tol_disp_rel", cfg.solver.tol_disp_rel},
                 {"w_min", cfg.solver.w_min},
                 {"w_max", cfg.solver.w_max},
                 {"area_floor_rel", cfg.solver.area_floor_rel},
                 {"damping", cfg.solver.damping},
                 {"linear_tol", cfg.solver.linear_tol},
                 {"linear_iters_per_vertex", cfg.solver.linear_iters_per_vertex}};
  json an;
  an["rho"] = cfg.analysis.rho;
  if (cfg.analysis.epsilon)
    an["epsilon"] = *cfg.analysis.epsilon;
  else
    an["epsilon"] = nullptr;
  an["delta"] = cfg.analysis.delta;
  an["rotations"] = cfg.analysis.rotations;
  an["r_min"] = cfg.analysis.r_min;
  an["level_heights"] = cfg.analysis.level_heights;
  j["analysis"] = std::move(an);
  j["reflect_levels"] = cfg.reflect_levels;
  j["axis_double"] = cfg.axis_double;
  return j;
}

}  // namespace

std::string config_json(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::vector<std::string> preset_names() { return {"helicoid", "point", "cantor2", "interval"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  if (name == "helicoid") {
    cfg.range_lo = 0.0;
    cfg.range_hi = 1.0;
    cfg.kset = kset::ClosedSetSpec::finite_points({}, cfg.range_lo, cfg.range_hi);
    cfg.n = {1};
    cfg.lambda0 = 2.0 * kPi;
    cfg.n_r = 16;
    cfg.theta_step_max = kPi / 96.0;  // ~192 helix samples over one turn
    cfg.solver.max_iterations = 2000;
    cfg.reflect_levels = 1;
    cfg.axis_double = true;
    return cfg;
  }
  if (name == "point") {
    cfg.range_lo = -0.075;
    cfg.range_hi = 0.075;
    cfg.kset = kset::ClosedSetSpec::finite_points({0.0}, cfg.range_lo, cfg.range_hi);
    cfg.n = {4, 8, 16, 32};
    cfg.lambda0 = 0.25;
    cfg.n_r = 64;
    cfg.analysis.rho = 0.0375;
    cfg.solver.max_iterations = 3000;
    cfg.axis_double = true;
    return cfg;
  }
  if (name == "cantor2") {
    // Wide base so the complement gaps clear the axis-twist smoothing scale;
    // the ambient cylinder may be arbitrarily tall.
    cfg.range_lo = -1.0;
    cfg.range_hi = 9.0;
    cfg.kset = kset::ClosedSetSpec::cantor({0.0, 8.0}, 2, cfg.range_lo, cfg.range_hi);
    cfg.n = {8, 32};
    cfg.lambda0 = 0.5;
    cfg.n_r = 128;
    cfg.theta_step_max = 3.14159265358979323846 / 32.0;
    cfg.z_step_frac = 1.0 / 128.0;
    cfg.analysis.rho = 0.04;
    cfg.solver.max_iterations = 2000;
    cfg.axis_double = true;
    return cfg;
  }
  if (name == "interval") {
    cfg.range_lo = -0.6;
    cfg.range_hi = 0.6;
    cfg.kset = kset::ClosedSetSpec::interval_union({{0.0, 0.4}}, cfg.range_lo, cfg.range_hi);
    cfg.n = {8};
    cfg.lambda0 = 1.0;
    cfg.n_r = 32;
    cfg.solver.max_iterations = 3000;
    cfg.axis_double = true;
    return cfg;
  }
  throw ConfigError("/preset", "unknown preset '" + name + "'");
}

namespace {

analysis::AnalysisReport build_report(const geom::TriMesh& solved, const ExperimentConfig& cfg) {
  analysis::AnalysisReport rep;
  rep.absA = analysis::vertex_curvature(solved);
  rep.slope = analysis::tangent_slope(solved);
  rep.jacobi = analysis::jacobi_positivity(solved);
  rep.u = rep.jacobi.u;
  rep.monotonicity = analysis::theta_monotonicity(solved);
  const double eps = cfg.analysis.epsilon ? *cfg.analysis.epsilon
                                          : analysis::measured_boundary_slope_min(solved);
  rep.rado = analysis::rado_slope_check(solved, eps, cfg.analysis.delta, 1.0);
  const double a = solved.V.col(2).minCoeff(), b = solved.V.col(2).maxCoeff();
  rep.level_sets_pass = true;
  for (int k = 1; k <= cfg.analysis.level_heights; ++k) {
    const double t = a + (b - a) * k / (cfg.analysis.level_heights + 1);
    const int arcs = analysis::level_set_arcs(solved, t);
    rep.level_heights.push_back(t);
    rep.level_arcs.push_back(arcs);
    if (arcs != 1) rep.level_sets_pass = false;
  }
  rep.foliation_min_distance =
      analysis::foliation_disjointness(solved, cfg.analysis.rotations, cfg.analysis.r_min);
  rep.foliation_threshold = 0.1 * geom::mean_edge_length(solved);
  rep.foliation_pass = rep.foliation_min_distance > rep.foliation_threshold;
  rep.residual = plateau::mean_curvature_residual(solved);
  return rep;
}

bool verdicts_pass(const analysis::AnalysisReport& rep) {
  return rep.monotonicity.pass && rep.rado.hypothesis_met && rep.rado.pass &&
         rep.level_sets_pass && rep.foliation_pass && rep.jacobi.pass;
}

}  // namespace

StageOutcome run_single_n(const ExperimentConfig& cfg, int n) {
  StageOutcome out;
  out.n = n;
  try {
    boundary::ProfileParams pp;
    pp.n = n;
    pp.lambda0 = cfg.lambda0;
    pp.eta = cfg.eta;
    pp.a = cfg.range_lo;
    pp.b = cfg.range_hi;
    const auto profile = boundary::build_profile(cfg.kset, pp);
    const auto samples = boundary::sample_gamma(profile, cfg.theta_step_max,
                                                cfg.z_step_frac * (pp.b - pp.a));
    const auto loop = boundary::assemble_boundary(samples, pp.a, pp.b, cfg.n_r);
    auto [mesh, record] = plateau::solve_plateau(loop, cfg.n_r, cfg.solver);
    out.solved = std::move(mesh);
    out.record = std::move(record);
    out.status = out.record.status;
    out.iterations = static_cast<int>(out.record.iterations.size());
    out.final_area = out.record.iterations.empty() ? plateau::area(out.solved)
                                                   : out.record.iterations.back().area;
    out.final_residual = out.record.final_residual;
    if (out.status == plateau::SolveStatus::Degenerate)
      throw plateau::SolverError("solve ended degenerate");

    out.analysis_mesh = out.solved;
    if (cfg.reflect_levels > 0)
      out.analysis_mesh = reflect::schwarz_extend(out.analysis_mesh, cfg.reflect_levels);
    if (cfg.axis_double) out.analysis_mesh = reflect::axis_double(out.analysis_mesh);

    out.report = build_report(out.solved, cfg);
    out.all_verdicts_pass = verdicts_pass(out.report);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

int worker_count(int tasks) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int workers = std::min(hw, std::max(1, tasks));
  if (const char* env = std::getenv("LAMLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) workers = std::min(workers, cap);
  }
  return workers;
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json report_to_json(const analysis::AnalysisReport& rep) {
  json v;
  v["monotonicity"] = {{"pass", rep.monotonicity.pass},
                       {"min_dz", rep.monotonicity.min_dz},
                       {"worst_row", rep.monotonicity.worst_row}};
  json rado;
  rado["hypothesis_met"] = rep.rado.hypothesis_met;
  if (!rep.rado.hypothesis_met) rado["detail"] = rep.rado.hypothesis_detail;
  rado["epsilon"] = rep.rado.epsilon;
  rado["bound"] = rep.rado.bound;
  rado["min_interior_slope"] =
      std::isfinite(rep.rado.min_interior_slope) ? json(rep.rado.min_interior_slope) : json("inf");
  rado["pass"] = rep.rado.pass;
  v["rado"] = std::move(rado);
  v["level_sets"] = {{"heights", rep.level_heights.size()},
                     {"arcs", rep.level_arcs},
                     {"pass", rep.level_sets_pass}};
  v["foliation"] = {{"min_distance", rep.foliation_min_distance},
                    {"threshold", rep.foliation_threshold},
                    {"pass", rep.foliation_pass}};
  v["jacobi"] = {{"min_u", rep.jacobi.min_u}, {"tol", rep.jacobi.tol}, {"pass", rep.jacobi.pass}};
  v["residual"] = rep.residual;
  return v;
}

json blowup_summary_json(const RunResult& run, const ExperimentConfig& cfg) {
  json b;
  b["rows"] = run.blowup.size();
  // Growth factor per K-sample across the n range.
  const auto samples = kset::sample_points(cfg.kset);
  json growth = json::array();
  for (double p : samples) {
    double first = 0, last = 0;
    bool have_first = false;
    bool monotone = true;
    int inversions = 0;
    double prev = 0;
    bool have_prev = false;
    for (const auto& row : run.blowup) {
      if (row.near_empty || std::isnan(row.p) || std::abs(row.p - p) > 1e-12) continue;
      if (!have_first) {
        first = row.kappa_near;
        have_first = true;
      }
      if (have_prev && row.kappa_near < prev) {
        inversions++;
        if (row.kappa_near < 0.9 * prev) monotone = false;
      }
      prev = row.kappa_near;
      have_prev = true;
      last = row.kappa_near;
    }
    if (have_first && first > 0)
      growth.push_back({{"p", p},
                        {"factor", last / first},
                        {"inversions", inversions},
                        {"monotone_up_to_10pct", monotone && inversions <= 1}});
  }
  b["growth"] = std::move(growth);
  // Far-field ratios between consecutive n.
  json far_ratios = json::array();
  double prev_far = 0;
  int prev_n = -1;
  for (const auto& row : run.blowup) {
    if (row.far_empty) continue;
    if (row.n != prev_n) {
      if (prev_n >= 0 && prev_far > 0)
        far_ratios.push_back({{"from_n", prev_n}, {"to_n", row.n}, {"ratio", row.kappa_far / prev_far}});
      prev_far = row.kappa_far;
      prev_n = row.n;
    }
  }
  b["far_ratios"] = std::move(far_ratios);
  return b;
}

}  // namespace

RunResult run_sequence(const ExperimentConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);

  json run_meta;
  run_meta["tool"] = "lamlab";
  run_meta["created_utc"] = utc_timestamp();
  run_meta["config"] = config_to_json(cfg);
  io::write_text_file(out_dir / "run.json", run_meta.dump(2) + "\n");

  RunResult run;
  run.stages.resize(cfg.n.size());
  {
    std::atomic<std::size_t> next{0};
    const int workers = worker_count(static_cast<int>(cfg.n.size()));
    auto work = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cfg.n.size()) break;
        run.stages[i] = run_single_n(cfg, cfg.n[i]);
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
  }

  // Emission (serial).
  for (const auto& st : run.stages) {
    const fs::path dir = out_dir / ("n_" + std::to_string(st.n));
    fs::create_directories(dir);
    if (!st.ok) continue;
    geom::write_obj(st.solved, (dir / "mesh.obj").string());
    analysis::write_vertices_csv(st.solved, st.report, (dir / "vertices.csv").string());
    plateau::write_solve_csv(st.record, (dir / "solve.csv").string());
  }

  // Blow-up table over the analysis meshes (doubled when enabled).
  std::vector<std::pair<int, const geom::TriMesh*>> solves;
  for (const auto& st : run.stages)
    if (st.ok) solves.push_back({st.n, &st.analysis_mesh});
  std::string blowup_error;
  if (solves.size() >= 2) {
    try {
      run.blowup = analysis::blowup_series(solves, cfg.kset, cfg.analysis.rho);
    } catch (const std::exception& e) {
      blowup_error = e.what();
    }
  }
  analysis::write_blowup_csv(run.blowup, (out_dir / "blowup.csv").string());

  bool any_solver_fail = false, any_verdict_fail = false;
  json summary;
  json stages = json::array();
  for (const auto& st : run.stages) {
    json s;
    s["n"] = st.n;
    s["ok"] = st.ok;
    if (!st.ok) {
      s["error"] = st.error;
      any_solver_fail = true;
    } else {
      s["solve_status"] = plateau::status_name(st.status);
      s["iterations"] = st.iterations;
      s["area"] = st.final_area;
      s["residual"] = st.final_residual;
      s["verdicts"] = report_to_json(st.report);
      if (st.status != plateau::SolveStatus::Converged || !st.all_verdicts_pass)
        any_verdict_fail = true;
    }
    stages.push_back(std::move(s));
  }
  summary["stages"] = std::move(stages);
  summary["blowup"] = blowup_summary_json(run, cfg);
  if (!blowup_error.empty()) summary["blowup"]["error"] = blowup_error;

  // Axis-point curvature probes at complement-gap midpoints, per stage.
  {
    json gaps = json::array();
    const auto comps = kset::complement_components(cfg.kset);
    for (const auto& st : run.stages) {
      if (!st.ok || cfg.kset.empty()) continue;
      json g;
      g["n"] = st.n;
      json mids = json::array();
      for (const auto& comp : comps) {
        const double mid = 0.5 * (comp.lo + comp.hi);
        const auto val = analysis::curvature_at_nearest_vertex(st.analysis_mesh, mid);
        json entry;
        entry["z"] = mid;
        entry["absA"] = val ? json(*val) : json(nullptr);
        mids.push_back(std::move(entry));
      }
      g["midpoints"] = std::move(mids);
      gaps.push_back(std::move(g));
    }
    summary["gap_midpoints"] = std::move(gaps);
  }

  run.exit_code = any_solver_fail ? 3 : (any_verdict_fail ? 2 : 0);
  summary["exit_code"] = run.exit_code;
  io::write_text_file(out_dir / "summary.json", summary.dump(2) + "\n");
  return run;
}

namespace {

void infer_roles(geom::TriMesh& m) {
  const double a = m.V.col(2).minCoeff(), b = m.V.col(2).maxCoeff();
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (!m.on_boundary[v]) {
      m.role[v] = geom::VertexRole::Interior;
      continue;
    }
    const double r = std::hypot(m.V(v, 0), m.V(v, 1));
    if (r < 1e-9)
      m.role[v] = geom::VertexRole::Axis;
    else if (std::abs(r - 1.0) < 1e-9)
      m.role[v] = geom::VertexRole::Helix;
    else if (std::abs(m.V(v, 2) - a) < 1e-9 || std::abs(m.V(v, 2) - b) < 1e-9)
      m.role[v] = geom::VertexRole::Radial;
  }
}

geom::TriMesh load_stage_mesh(const fs::path& stage_dir) {
  geom::TriMesh m = geom::read_obj((stage_dir / "mesh.obj").string());
  // Chart pairs live in vertices.csv (columns r, theta).
  const std::string text = io::read_text_file(stage_dir / "vertices.csv");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = io::split_csv_line(line);
    if (cells.size() < 4) continue;
    const int v = std::stoi(cells[0]);
    if (v < 0 || v >= m.vertex_count()) continue;
    m.chart_r[v] = std::stod(cells[1]);
    m.chart_theta[v] = std::stod(cells[2]);
  }
  infer_roles(m);
  return m;
}

}  // namespace

int analyze_run_dir(const fs::path& run_dir) {
  const json run_meta = json::parse(io::read_text_file(run_dir / "run.json"));
  const ExperimentConfig cfg = parse_config(run_meta.at("config").dump());

  RunResult run;
  for (int n : cfg.n) {
    const fs::path dir = run_dir / ("n_" + std::to_string(n));
    StageOutcome st;
    st.n = n;
    try {
      st.solved = load_stage_mesh(dir);
      st.analysis_mesh = st.solved;
      if (cfg.reflect_levels > 0 && st.solved.has_grid())
        st.analysis_mesh = reflect::schwarz_extend(st.analysis_mesh, cfg.reflect_levels);
      if (cfg.axis_double) st.analysis_mesh = reflect::axis_double(st.analysis_mesh);
      st.report = build_report(st.solved, cfg);
      st.all_verdicts_pass = verdicts_pass(st.report);
      st.status = plateau::SolveStatus::Converged;  // stored meshes are final
      st.final_residual = st.report.residual;
      st.ok = true;
      analysis::write_vertices_csv(st.solved, st.report, (dir / "vertices.csv").string());
    } catch (const std::exception& e) {
      st.ok = false;
      st.error = e.what();
    }
    run.stages.push_back(std::move(st));
  }

  std::vector<std::pair<int, const geom::TriMesh*>> solves;
  for (const auto& st : run.stages)
    if (st.ok) solves.push_back({st.n, &st.analysis_mesh});
  if (solves.size() >= 2) run.blowup = analysis::blowup_series(solves, cfg.kset, cfg.analysis.rho);
  analysis::write_blowup_csv(run.blowup, (run_dir / "blowup.csv").string());

  bool any_fail = false, any_verdict = false;
  json summary;
  json stages = json::array();
  for (const auto& st : run.stages) {
    json s;
    s["n"] = st.n;
    s["ok"] = st.ok;
    if (!st.ok) {
      s["error"] = st.error;
      any_fail = true;
    } else {
      s["verdicts"] = report_to_json(st.report);
      if (!st.all_verdicts_pass) any_verdict = true;
    }
    stages.push_back(std::move(s));
  }
  summary["stages"] = std::move(stages);
  summary["blowup"] = blowup_summary_json(run, cfg);
  const int code = any_fail ? 3 : (any_verdict ? 2 : 0);
  summary["exit_code"] = code;
  io::write_text_file(run_dir / "summary.json", summary.dump(2) + "\n");
  return code;
}

void export_stage(const fs::path& run_dir, int n, const fs::path& out_dir) {
  const json run_meta = json::parse(io::read_text_file(run_dir / "run.json"));
  const ExperimentConfig cfg = parse_config(run_meta.at("config").dump());
  if (std::find(cfg.n.begin(), cfg.n.end(), n) == cfg.n.end())
    throw ConfigError("/n", "run does not contain n = " + std::to_string(n));

  fs::create_directories(out_dir);
  geom::TriMesh m = load_stage_mesh(run_dir / ("n_" + std::to_string(n)));
  geom::write_obj(m, (out_dir / "mesh.obj").string());
  geom::write_sidecar_csv(m, (out_dir / "mesh_sidecar.csv").string());

  boundary::ProfileParams pp;
  pp.n = n;
  pp.lambda0 = cfg.lambda0;
  pp.eta = cfg.eta;
  pp.a = cfg.range_lo;
  pp.b = cfg.range_hi;
  const auto profile = boundary::build_profile(cfg.kset, pp);
  const auto samples =
      boundary::sample_gamma(profile, cfg.theta_step_max, cfg.z_step_frac * (pp.b - pp.a));
  const auto loop = boundary::assemble_boundary(samples, pp.a, pp.b, cfg.n_r);
  boundary::write_loop_csv(loop, (out_dir / "loop.csv").string());
  boundary::write_loop_obj(loop, (out_dir / "loop.obj").string());
}

}  // namespace lamlab::harness
