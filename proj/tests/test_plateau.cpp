#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fixtures.hpp"
#include "lamlab/analysis.hpp"
#include "lamlab/plateau.hpp"

using namespace lamlab;
using namespace lamlab::plateau;
using fixtures::kPi;

TEST_CASE("initial_mesh: grid shape, validity, boundary pinned to the loop") {
  auto loop = fixtures::helicoid_loop(16, 65, 1.0 / (2 * kPi));
  auto m = initial_mesh(loop, 16);
  CHECK(m.vertex_count() == 17 * 65);
  CHECK(geom::validate_mesh(m).ok);

  // Every loop sample coincides with a boundary vertex of the grid.
  double worst = 0;
  for (std::size_t i = 0; i + 1 < loop.points.size(); ++i) {
    double best = 1e300;
    for (int v = 0; v < m.vertex_count(); ++v) {
      if (!m.on_boundary[v]) continue;
      best = std::min(best, (m.V.row(v).transpose() - loop.points[i]).norm());
    }
    worst = std::max(worst, best);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("area: unit triangle and polygonal disk") {
  geom::TriMesh t;
  t.V.resize(3, 3);
  t.V << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  t.F.resize(1, 3);
  t.F << 0, 1, 2;
  t.init_attributes();
  CHECK(area(t) == doctest::Approx(0.5));

  auto disk = fixtures::polar_graph(32, 32, 1e-6, 1.0, 0.0, 2 * kPi,
                                    [](double, double) { return 0.0; });
  CHECK(disk.face_count() == 2048);
  CHECK(area(disk) == doctest::Approx(kPi).epsilon(0.005));
}

TEST_CASE("area: helicoid patch against the closed form") {
  // One radian of theta, lam = 0.2: integral of sqrt(r^2 + lam^2) dr.
  const double lam = 0.2;
  auto patch = fixtures::polar_graph(50, 50, 1e-9, 1.0, 0.0, 1.0,
                                     [lam](double, double th) { return lam * th; });
  const double closed = std::sqrt(1 + lam * lam) / 2 +
                        (lam * lam / 2) * std::log((1 + std::sqrt(1 + lam * lam)) / lam);
  CHECK(closed == doctest::Approx(0.556151).epsilon(1e-5));
  CHECK(area(patch) == doctest::Approx(closed).epsilon(3e-3));
}

TEST_CASE("dirichlet_step: planar convex-boundary mesh is a fixed point") {
  auto disk = fixtures::flat_disk(8, 32, 0.25);
  SolverParams params;
  bool clamped = true;
  auto stepped = dirichlet_step(disk, params, &clamped);
  CHECK_FALSE(clamped);
  double disp = 0;
  for (int v = 0; v < disk.vertex_count(); ++v)
    disp = std::max(disp, (stepped.V.row(v) - disk.V.row(v)).norm());
  CHECK(disp < 1e-12);
}

TEST_CASE("dirichlet_step does not increase area when no clamp activates") {
  auto m = fixtures::helicoid_grid(12, 49, 1.0 / (2 * kPi));
  SolverParams params;
  for (int it = 0; it < 5; ++it) {
    bool clamped = false;
    auto next = dirichlet_step(m, params, &clamped);
    if (!clamped) CHECK(area(next) <= area(m) + 1e-12);
    m = std::move(next);
  }
}

TEST_CASE("dirichlet_step pulls a perturbed helicoid toward the analytic surface") {
  const double lam = 0.2;
  auto m = fixtures::helicoid_grid(12, 49, lam);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (m.on_boundary[v]) continue;
    m.V.row(v) += Vec3(noise(fixtures::rng()), noise(fixtures::rng()), noise(fixtures::rng()))
                      .transpose();
  }
  auto dist_to_surface = [lam](const geom::TriMesh& mesh) {
    // Vertical gap to the sheet through the unwrapped angle bounds the
    // Euclidean distance from above; adequate as a monotone improvement proxy.
    double rms = 0;
    int n = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (mesh.on_boundary[v]) continue;
      const double raw = std::atan2(mesh.V(v, 1), mesh.V(v, 0));
      const double th = raw + 2 * kPi * std::round((mesh.chart_theta[v] - raw) / (2 * kPi));
      rms += std::pow(mesh.V(v, 2) - lam * th, 2);
      n++;
    }
    return std::sqrt(rms / n);
  };
  const double before = dist_to_surface(m);
  SolverParams params;
  auto stepped = dirichlet_step(m, params);
  CHECK(dist_to_surface(stepped) < before);
}

TEST_CASE("solve_plateau: helicoid oracle at N_r=16") {
  const double lam = 1.0 / (2 * kPi);
  auto loop = fixtures::helicoid_loop(16, 193, lam);
  SolverParams params;
  params.max_iterations = 2000;
  auto [mesh, rec] = solve_plateau(loop, 16, params);
  CHECK(rec.status == SolveStatus::Converged);
  double zerr = 0;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    zerr = std::max(zerr, std::abs(mesh.V(v, 2) - lam * mesh.chart_theta[v]));
  CHECK(zerr <= 1e-2);

  // Boundary exactness: boundary vertices never moved.
  auto init = initial_mesh(loop, 16);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (mesh.on_boundary[v]) CHECK((mesh.V.row(v) - init.V.row(v)).norm() == 0.0);

  // Area never increases outside clamped iterations.
  for (std::size_t i = 1; i < rec.iterations.size(); ++i)
    if (!rec.iterations[i].clamped)
      CHECK(rec.iterations[i].area <= rec.iterations[i - 1].area + 1e-12);

  CHECK(rec.final_residual < 1e-4);
}

TEST_CASE("solve_plateau: near-constant profile matches the ruled ramp") {
  const double lam0 = 0.01;
  boundary::ProfileParams pp;
  pp.n = 1;
  pp.lambda0 = lam0;
  pp.eta = 0.0;
  pp.a = 0;
  pp.b = 1;
  auto K = kset::ClosedSetSpec::finite_points({}, 0, 1);
  auto prof = boundary::build_profile(K, pp);
  auto s = boundary::sample_gamma(prof, kPi / 24, 1.0 / 64.0);
  auto loop = boundary::assemble_boundary(s, 0, 1, 12);
  SolverParams params;
  auto [mesh, rec] = solve_plateau(loop, 12, params);
  CHECK(rec.status == SolveStatus::Converged);

  // Ramp: z = theta / lam0; vertical deviation bounds the distance.
  double worst = 0;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    worst = std::max(worst, std::abs(mesh.V(v, 2) - mesh.chart_theta[v] / lam0));
  CHECK(worst <= 1e-2);

  // Area within 1% of the graph-area quadrature oracle for the ruled ramp.
  auto integrand = [lam0](double z) {
    (void)z;
    // integral over r in [0,1] of sqrt(1 + r^2 lam0^2) dr, by trapezoid
    double sum = 0;
    const int n = 2000;
    for (int i = 0; i <= n; ++i) {
      const double r = double(i) / n;
      const double f = std::sqrt(1 + r * r * lam0 * lam0);
      sum += (i == 0 || i == n) ? f / 2 : f;
    }
    return sum / n;
  };
  const double oracle = fixtures::trapezoid_oracle(integrand, {0.0, 1.0}, 512);
  CHECK(area(mesh) == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("solve_plateau is bitwise deterministic") {
  auto loop = fixtures::helicoid_loop(8, 33, 0.2);
  SolverParams params;
  auto [m1, r1] = solve_plateau(loop, 8, params);
  auto [m2, r2] = solve_plateau(loop, 8, params);
  REQUIRE(m1.vertex_count() == m2.vertex_count());
  CHECK(std::memcmp(m1.V.data(), m2.V.data(), sizeof(double) * m1.V.size()) == 0);
  CHECK(r1.iterations.size() == r2.iterations.size());
}

TEST_CASE("mean_curvature_residual: flat disk, refinement, sphere cap") {
  CHECK(mean_curvature_residual(fixtures::flat_disk(8, 32, 0.0)) < 1e-10);

  // O(h^2) on the exactly sampled helicoid, dropping ~4x per refinement.
  const double r16 = mean_curvature_residual(fixtures::helicoid_grid(16, 65, 0.2));
  const double r32 = mean_curvature_residual(fixtures::helicoid_grid(32, 129, 0.2));
  CHECK(r16 < 0.25);
  CHECK(r16 / r32 > 2.0);
  CHECK(r16 / r32 < 8.0);

  auto cap = fixtures::polar_graph(24, 96, 0.05, 0.8, 0.0, 2 * kPi, [](double r, double) {
    return -std::sqrt(1.0 - r * r);
  });
  CHECK(mean_curvature_residual(cap) >= 0.1);
}

TEST_CASE("solve error to the analytic helicoid shrinks under refinement") {
  const double lam = 1.0 / (2 * kPi);
  auto zerr_at = [lam](int nr, int cols) {
    auto loop = fixtures::helicoid_loop(nr, cols, lam);
    plateau::SolverParams params;
    auto [mesh, rec] = solve_plateau(loop, nr, params);
    REQUIRE(rec.status == SolveStatus::Converged);
    double zerr = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v)
      zerr = std::max(zerr, std::abs(mesh.V(v, 2) - lam * mesh.chart_theta[v]));
    return zerr;
  };
  const double coarse = zerr_at(8, 49), fine = zerr_at(16, 97);
  CHECK(fine <= 0.5 * coarse);  // at least linear in h
}

TEST_CASE("degenerate solve is reported, mesh still returned") {
  auto loop = fixtures::helicoid_loop(8, 33, 0.2);
  SolverParams params;
  params.area_floor_rel = 0.9;  // impossible floor: every update is rejected
  auto [mesh, rec] = solve_plateau(loop, 8, params);
  CHECK(rec.status == SolveStatus::Degenerate);
  CHECK(mesh.vertex_count() == 9 * 33);
}
