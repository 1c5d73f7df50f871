#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lamlab/boundary.hpp"

using namespace lamlab;
using namespace lamlab::boundary;
using fixtures::kPi;

namespace {

WindingProfile make_profile(const kset::ClosedSetSpec& K, int n, double lam0, double a, double b,
                            double eta = 0.05) {
  ProfileParams pp;
  pp.n = n;
  pp.lambda0 = lam0;
  pp.eta = eta;
  pp.a = a;
  pp.b = b;
  return build_profile(K, pp);
}

}  // namespace

TEST_CASE("winding rate: base rate, saturation on K, and the frozen example") {
  auto empty = kset::ClosedSetSpec::finite_points({}, -0.5, 0.5);
  auto prof0 = make_profile(empty, 8, 2 * kPi, -0.5, 0.5);
  CHECK(prof0.rate(0.2) == doctest::Approx(2 * kPi).epsilon(1e-14));

  auto point = kset::ClosedSetSpec::finite_points({0.0}, -0.5, 0.5);
  auto prof = make_profile(point, 8, 2 * kPi, -0.5, 0.5);
  CHECK(prof.rate(0.0) == doctest::Approx(2 * kPi + 8.0).epsilon(1e-14));
  // n=8, K={0}, z=0.25, lambda0=2pi -> 2pi + 1/(0.25 + 1/8) = 2pi + 8/3.
  CHECK(prof.rate(0.25) == doctest::Approx(2 * kPi + 8.0 / 3.0).epsilon(1e-13));
  CHECK(prof.rate(0.25) == doctest::Approx(8.9499).epsilon(1e-4));
}

TEST_CASE("winding rate is frozen on the end collars") {
  auto point = kset::ClosedSetSpec::finite_points({0.0}, -0.5, 0.5);
  auto prof = make_profile(point, 8, 1.0, -0.5, 0.5, 0.05);
  const double edge = prof.rate(-0.45);
  CHECK(prof.rate(-0.5) == doctest::Approx(edge).epsilon(1e-14));
  CHECK(prof.rate(-0.48) == doctest::Approx(edge).epsilon(1e-14));
  CHECK(prof.rate(-0.44) != doctest::Approx(edge).epsilon(1e-6));
}

TEST_CASE("winding rate is strictly positive and capped by lambda0 + n") {
  auto K = kset::ClosedSetSpec::cantor({-0.2, 0.3}, 2, -0.5, 0.5);
  for (int n : {1, 4, 16}) {
    auto prof = make_profile(K, n, 0.5, -0.5, 0.5);
    for (int i = 0; i <= 200; ++i) {
      const double z = -0.5 + i / 200.0;
      CHECK(prof.rate(z) > 0.0);
      CHECK(prof.rate(z) <= 0.5 + n + 1e-12);
    }
  }
}

TEST_CASE("winding rate converges upward to lambda0 + 1/dist off K") {
  auto point = kset::ClosedSetSpec::finite_points({0.0}, -0.5, 0.5);
  const double z = 0.2;  // dist 0.2
  double prev = 0;
  for (int n : {2, 4, 8, 16, 32, 64}) {
    auto prof = make_profile(point, n, 1.0, -0.5, 0.5);
    const double r = prof.rate(z);
    CHECK(r > prev);
    prev = r;
  }
  CHECK(prev == doctest::Approx(1.0 + 1.0 / 0.2).epsilon(0.1));
}

TEST_CASE("winding angle: constant-rate case is linear") {
  auto empty = kset::ClosedSetSpec::finite_points({}, 0, 1);
  auto prof = make_profile(empty, 1, 2 * kPi, 0, 1);
  for (double z : {0.0, 0.3, 0.77, 1.0})
    CHECK(prof.angle(z) == doctest::Approx(2 * kPi * z).epsilon(1e-10));
  CHECK(prof.total_angle() == doctest::Approx(2 * kPi).epsilon(1e-10));
}

TEST_CASE("winding angle matches a dense kink-aligned trapezoid oracle") {
  auto K = kset::ClosedSetSpec::cantor({-0.2, 0.3}, 2, -0.5, 0.5);
  auto prof = make_profile(K, 16, 1.5, -0.5, 0.5);
  auto f = [&prof](double z) { return prof.rate(z); };
  const double oracle = fixtures::trapezoid_oracle(f, prof.breakpoints(), 200000);
  CHECK(prof.total_angle() == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("winding angle is strictly increasing") {
  auto K = kset::ClosedSetSpec::finite_points({-0.1, 0.2}, -0.5, 0.5);
  auto prof = make_profile(K, 8, 1.0, -0.5, 0.5);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int t = 0; t < 200; ++t) {
    double z1 = d(fixtures::rng()), z2 = d(fixtures::rng());
    if (z1 > z2) std::swap(z1, z2);
    if (z2 - z1 < 1e-9) continue;
    CHECK(prof.angle(z2) > prof.angle(z1));
  }
}

TEST_CASE("sample_gamma: constant rate gives coarse uniform sampling") {
  auto empty = kset::ClosedSetSpec::finite_points({}, 0, 1);
  auto prof = make_profile(empty, 1, 2 * kPi, 0, 1);
  auto s = sample_gamma(prof, kPi / 2, 1.0 / 64.0);
  CHECK(s.size() >= 5);
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(s.theta[i] - s.theta[i - 1] <= kPi / 2 + 1e-9);
    CHECK(s.z[i] - s.z[i - 1] <= 1.0 / 64.0 + 1e-9);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec3 p = s.point(i);
    CHECK(std::abs(std::hypot(p.x(), p.y()) - 1.0) < 1e-12);
  }
}

TEST_CASE("sample density near K tracks the winding rate") {
  auto point = kset::ClosedSetSpec::finite_points({0.0}, -0.5, 0.5);
  auto prof = make_profile(point, 16, 2 * kPi, -0.5, 0.5);
  auto s = sample_gamma(prof, kPi / 24, 1.0 / 64.0);
  auto count_in = [&s](double lo, double hi) {
    int c = 0;
    for (double z : s.z)
      if (z >= lo && z < hi) c++;
    return c;
  };
  const double width = 0.04;
  const double near = count_in(-width / 2, width / 2);
  const double far = 0.5 * (count_in(0.38, 0.38 + width) + count_in(-0.42, -0.42 + width));
  const double rate_ratio = prof.rate(0.0) / prof.rate(0.4);
  const double density_ratio = near / std::max(1.0, far);
  CHECK(density_ratio >= rate_ratio / 2.0);
  CHECK(density_ratio <= rate_ratio * 2.0);
}

TEST_CASE("sample_gamma rejects runs beyond the sample cap") {
  auto empty = kset::ClosedSetSpec::finite_points({}, 0, 1);
  auto prof = make_profile(empty, 1, 2 * kPi, 0, 1);
  CHECK_THROWS_AS(sample_gamma(prof, kPi / 24, 1e-9), std::runtime_error);
}

TEST_CASE("assemble_boundary: closure, roles, and helix arclength") {
  auto empty = kset::ClosedSetSpec::finite_points({}, 0, 1);
  auto prof = make_profile(empty, 1, 2 * kPi, 0, 1);
  auto s = sample_gamma(prof, kPi / 96, 1.0 / 192.0);
  auto loop = assemble_boundary(s, 0, 1, 16);

  CHECK((loop.points.front() - loop.points.back()).norm() == doctest::Approx(0.0));

  std::size_t helix = 0, rtop = 0, axis = 0, rbot = 0;
  for (std::size_t i = 0; i + 1 < loop.points.size(); ++i) {  // closure point excluded
    switch (loop.roles[i]) {
      case LoopRole::Helix: helix++; break;
      case LoopRole::RadialTop: rtop++; break;
      case LoopRole::Axis: axis++; break;
      case LoopRole::RadialBottom: rbot++; break;
    }
  }
  CHECK(helix == s.size());
  CHECK(axis == s.size());
  CHECK(rtop == 15);
  CHECK(rbot == 15);
  CHECK(loop.points.size() == 2 * s.size() + 2 * 15 + 1);

  // Helix arclength sqrt(1 + 4 pi^2) plus two radial units plus one axis unit.
  const double closed_form = std::sqrt(1.0 + 4.0 * kPi * kPi) + 3.0;
  CHECK(loop.length() == doctest::Approx(closed_form).epsilon(2e-3));
  CHECK(closed_form == doctest::Approx(9.3622).epsilon(1e-4));
}

TEST_CASE("assemble_boundary rejects bad sample sets") {
  GammaSamples s;
  s.z = {0.0, 0.5, 0.4, 1.0};
  s.theta = {0.0, 1.0, 2.0, 3.0};
  CHECK_THROWS_AS(assemble_boundary(s, 0, 1, 8), std::invalid_argument);
  GammaSamples t;
  t.z = {0.0, 0.5};
  t.theta = {0.0, 1.0};
  CHECK_THROWS_AS(assemble_boundary(t, 0, 2.0, 8), std::invalid_argument);
}
