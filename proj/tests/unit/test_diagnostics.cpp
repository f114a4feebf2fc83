#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tgrowth/config.hpp"
#include "tgrowth/diagnostics.hpp"
#include "tgrowth/error.hpp"

using namespace tgrowth;

namespace {

Trajectory zero_run() {
  RunConfig c = testing::small_config();
  c.initial.amplitude = 0.0;
  return simulate(c);
}

}  // namespace

TEST_CASE("test functions") {
  TestFunction b;
  b.radius = 2.0;
  b.t_start = 0.2;
  b.t_end = 0.6;
  CHECK(b.time_factor(0.1) == 0.0);
  CHECK(b.time_factor(0.4) == doctest::Approx(1.0));
  CHECK(b.spatial({0.0, 0.0}, 10.0) == 1.0);
  CHECK(b.spatial({2.5, 0.0}, 10.0) == 0.0);
  for (double t : {0.25, 0.33, 0.5}) {
    const double d = 1e-6;
    CHECK(b.time_derivative(t) == doctest::Approx((b.time_factor(t + d) - b.time_factor(t - d)) / (2 * d)).epsilon(1e-6));
  }
  for (auto kind : {TestKind::space_time_bump, TestKind::indicator_smooth}) {
    b.kind = kind;
    for (double x : {0.3, 1.1, 2.2}) {
      const double d = 1e-6;
      const std::array<double, 2> at{x, 0.4};
      const double fd = (b.spatial({x + d, 0.4}, 10.0) - b.spatial({x - d, 0.4}, 10.0)) / (2 * d);
      CHECK(b.spatial_gradient(at, 10.0)[0] == doctest::Approx(fd).epsilon(1e-5));
      CHECK(b.spatial(at, 10.0) >= 0.0);
      CHECK(b.spatial(at, 10.0) <= 1.0);
    }
  }
  const auto r = TestFunction::ramp();
  CHECK(r.time_factor(0.7) == 0.7);
  CHECK(r.time_derivative(0.7) == 1.0);
}

TEST_CASE("quadrature") {
  CHECK(trapezoid({0.0, 1.0, 3.0}, {1.0, 1.0, 1.0}) == 3.0);
  CHECK(cumulative_trapezoid({0.0, 1.0, 2.0}, {0.0, 2.0, 2.0}) == std::vector<double>{0.0, 1.0, 3.0});
  CHECK_THROWS_AS(trapezoid({0.0}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("centroid across the periodic seam") {
  const SpatialGrid g(1, 64, 8.0);
  Field f(g);
  f[0] = 1.0;
  f[63] = 1.0;
  CHECK(std::abs(std::abs(mass_centroid(f)[0]) - 4.0) <= 1e-12);
}

TEST_CASE("a priori checks") {
  SUBCASE("default run passes") {
    const auto rep = verify_apriori(simulate(RunConfig{}));
    REQUIRE(rep.checks.size() == 4);
    for (const auto& c : rep.checks) {
      INFO(c.name << " " << c.detail);
      CHECK(c.passed);
      CHECK(c.margin >= 0.0);
    }
    CHECK(rep.all_passed());
  }
  SUBCASE("zero state passes with zero margins") {
    const auto rep = verify_apriori(zero_run());
    CHECK(rep.all_passed());
    for (const auto& c : rep.checks) CHECK(c.margin >= 0.0);
  }
}

TEST_CASE("functionals vanish on the zero trajectory") {
  const auto traj = zero_run();
  const auto bump = TestFunction::default_bump(traj);
  CHECK(w_minus_p_l2(traj) == 0.0);
  CHECK(grad_w_l2(traj) == 0.0);
  CHECK(pweak_functional(traj, bump) == 0.0);
  CHECK(lemma7_functional(traj, bump) == 0.0);
  CHECK(complementarity_residual(traj, bump) == 0.0);
  CHECK(energy_evolution_residual(traj, entropy_pair(11.0, 10.0), TestFunction::ramp()) == 0.0);
  const auto rec = build_record(traj, "zero");
  for (const auto& [name, v] : rec.series)
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("Darcy branch identities") {
  RunConfig c = testing::small_config();
  c.params.viscosity = 0.0;
  const auto traj = simulate(c);
  CHECK(w_minus_p_l2(traj) == 0.0);
  CHECK(lemma7_functional(traj, TestFunction::default_bump(traj)) == 0.0);
}

TEST_CASE("functional edge cases") {
  const auto traj = simulate(testing::small_config());
  const auto bump = TestFunction::default_bump(traj);
  double pmax = 0.0;
  for (const auto& s : traj.snapshots) pmax = std::max(pmax, max_value(s.p));
  CHECK(pweak_functional(traj, bump, pmax) == 0.0);
  CHECK_THROWS_AS(pweak_functional(traj, bump, -1.0), ValidationError);
  TestFunction off = bump;
  off.amplitude = 0.0;
  CHECK(pweak_functional(traj, off) == 0.0);
  CHECK(complementarity_residual(traj, off) == 0.0);
  CHECK(lemma7_functional(traj, off) == 0.0);
  CHECK(w_minus_p_l2(traj) > 0.0);

  // Constant pressure: W = p, grad W = 0.
  RunConfig h;
  h.points = 16;
  h.initial.profile = Profile::uniform;
  h.params.horizon = 0.1;
  const auto flat = simulate(h);
  CHECK(w_minus_p_l2(flat) <= 1e-14);
  CHECK(grad_w_l2(flat) <= 1e-13);
  CHECK(lemma7_functional(flat, TestFunction::default_bump(flat)) <= 1e-13);
}

TEST_CASE("norm-type functionals are linear") {
  const auto traj = simulate(testing::small_config());
  for (double alpha : {2.0, 0.5}) {
    Trajectory scaled = traj;
    for (auto& s : scaled.snapshots) {
      for (double& v : s.p.values()) v *= alpha;
      for (double& v : s.w.values()) v *= alpha;
    }
    CHECK(w_minus_p_l2(scaled) == doctest::Approx(alpha * w_minus_p_l2(traj)).epsilon(1e-13));
    CHECK(grad_w_l2(scaled) == doctest::Approx(alpha * grad_w_l2(traj)).epsilon(1e-13));
  }
}

TEST_CASE("grad W norm of a single mode") {
  // Build a synthetic trajectory with W = cos(xi x) at every snapshot.
  Trajectory traj = simulate(testing::small_config());
  const auto& g = traj.grid();
  const double xi = 2 * std::numbers::pi * 3 / g.box_length();
  for (auto& s : traj.snapshots)
    for (std::size_t c = 0; c < s.w.size(); ++c) s.w[c] = std::cos(xi * g.centre(c)[0]);
  // int_0^T int_box xi^2 sin^2 = T L xi^2 / 2.
  const double expect = std::sqrt(traj.params.horizon * g.box_length() * xi * xi / 2);
  CHECK(std::abs(grad_w_l2(traj) - expect) <= 1e-8);
}

TEST_CASE("energy identity dissipation term sign") {
  const auto traj = simulate(testing::small_config());
  const auto pair = entropy_pair(traj.params.stiffness + 1, traj.params.stiffness);
  const auto eta = TestFunction::ramp();
  for (const auto& s : traj.snapshots) {
    const auto grad = gradient(s.w, *traj.plan);
    for (std::size_t c = 0; c < s.w.size(); ++c)
      CHECK(-pair.d2z(s.w[c]) * eta.time_factor(s.state.time) * grad[0][c] * grad[0][c] <= 0.0);
  }
}

TEST_CASE("energy identity stationary state") {
  RunConfig c;
  c.points = 16;
  c.phenotypes = 1;
  c.law = GrowthLaw::linear(1.0, 0.0);
  c.initial.profile = Profile::uniform;
  c.initial.trait_modulation = 0.0;
  c.initial.amplitude = std::pow(0.9, 1.0 / 9.0);
  c.params.viscosity = 0.0;
  c.params.horizon = 0.2;
  const auto traj = simulate(c);
  CHECK(energy_evolution_residual(traj, entropy_pair(11.0, 10.0), TestFunction::ramp()) <= 1e-8);
}

TEST_CASE("phenotype Lipschitz") {
  SUBCASE("default run") {
    const auto traj = simulate(RunConfig{});
    const auto rep = phenotype_lipschitz_check(traj, 1, 5);
    CHECK(rep.passed);
    CHECK(rep.ratio <= 1.0);
    CHECK(rep.c1 == doctest::Approx(std::exp(1.0)));
  }
  SUBCASE("trait-free dynamics") {
    RunConfig c = testing::small_config();
    c.law.gamma1 = 0.0;
    c.initial.trait_modulation = 0.0;
    const auto rep = phenotype_lipschitz_check(simulate(c), 0, 3);
    for (double d : rep.distance) CHECK(d == 0.0);
    CHECK(rep.passed);
  }
  SUBCASE("a == b") {
    const auto traj = simulate(testing::small_config());
    const auto rep = phenotype_lipschitz_check(traj, 2, 2);
    for (double d : rep.distance) CHECK(d == 0.0);
    CHECK_THROWS_AS(phenotype_lipschitz_check(traj, 0, 9), ValidationError);
  }
}

TEST_CASE("Riemann sum against the trait integral") {
  const SpatialGrid g(1, 16, 1.0);
  const auto law = GrowthLaw::linear(1.0, 1.0);
  const MultiState ones(PhenotypeSet(10), std::vector<Field>(10, Field(g, 1.0)));
  CHECK(riemann_vs_integral(ones, law, Field(g, 0.0)) == doctest::Approx(0.05).epsilon(1e-14));

  // Smooth profile in a: the error halves with N.
  // Leading term is (g(1) - g(1/N)) / (2N) with g = n G, so g(1) != g(0) matters.
  auto state_for = [&](int n) {
    std::vector<Field> fs;
    for (int i = 0; i < n; ++i) {
      const double a = (i + 1.0) / n;
      fs.emplace_back(g, 1.0 + a);
    }
    return MultiState(PhenotypeSet(n), fs);
  };
  const Field p(g, 0.3);
  const double e32 = riemann_vs_integral(state_for(32), law, p);
  const double e64 = riemann_vs_integral(state_for(64), law, p);
  CHECK(std::abs(e32 / e64 - 2.0) <= 0.1);
}

TEST_CASE("diagnostics record") {
  RunConfig c = testing::small_config();
  const auto traj = simulate(c);
  const auto rec = build_record(traj, "small");
  CHECK(rec.times == traj.times());
  for (const char* name : {"mass_1", "mass_4", "nbar_l1", "p_linf", "w_l2", "first_moment", "grad_w_sq_cumulative",
                           "w_minus_p_sq_cumulative", "lemma7_cumulative", "pweak_cumulative",
                           "complementarity_cumulative", "energy_residual", "riemann_error", "lipschitz_ratio"})
    CHECK(rec.has(name));
  for (const auto& [name, v] : rec.series)
    for (double x : v) CHECK(std::isfinite(x));
  // Cumulative series end at the scalar functionals.
  const double gw = grad_w_l2(traj);
  CHECK(std::sqrt(rec.get("grad_w_sq_cumulative").back()) == doctest::Approx(gw).epsilon(1e-12));
  const auto bump = TestFunction::default_bump(traj);
  CHECK(rec.get("pweak_cumulative").back() == doctest::Approx(pweak_functional(traj, bump)).epsilon(1e-12));
  CHECK(rec.get("lemma7_cumulative").back() == doctest::Approx(lemma7_functional(traj, bump)).epsilon(1e-12));
  CHECK(rec.get("complementarity_cumulative").back() ==
        doctest::Approx(complementarity_residual(traj, bump)).epsilon(1e-12));
  CHECK(rec.get("energy_residual").back() ==
        doctest::Approx(energy_evolution_residual(traj, entropy_pair(11.0, 10.0), TestFunction::ramp())).epsilon(1e-10));
  CHECK_THROWS_AS(rec.get("missing"), ValidationError);
  DiagnosticsRecord bad;
  bad.times = {0.0, 1.0};
  CHECK_THROWS_AS(bad.add("x", {1.0}), ValidationError);
}

TEST_CASE("space-time distance") {
  const auto a = simulate(testing::small_config());
  CHECK(space_time_distance(a, a) == 0.0);
  RunConfig c = testing::small_config();
  c.snapshot_count = 5;
  CHECK_THROWS_AS(space_time_distance(a, simulate(c)), ValidationError);
}
