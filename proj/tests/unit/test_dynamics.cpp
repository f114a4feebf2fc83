#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tgrowth/config.hpp"
#include "tgrowth/dynamics.hpp"
#include "tgrowth/error.hpp"

using namespace tgrowth;

TEST_CASE("cfl_dt caps") {
  SimParams p;
  p.cfl = 0.4;
  p.max_dt = 1.0;
  CHECK(cfl_dt(2.0, 0.1, p, {1e-6, 0.0}) == doctest::Approx(0.02));
  // Advection-free: the reaction cap or max_dt.
  CHECK(cfl_dt(0.0, 0.1, p, {2.0, 0.0}) == doctest::Approx(0.25));
  p.max_dt = 0.1;
  CHECK(cfl_dt(0.0, 0.1, p, {2.0, 0.0}) == doctest::Approx(0.1));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 1000; ++s) {
    SimParams q;
    q.cfl = 0.05 + 0.4 * u(rng);
    q.max_dt = 1e-4 + u(rng) * 1e-2;
    const double g = 5 * u(rng), h = 0.01 + u(rng), rate = 10 * u(rng), stiff = 1000 * u(rng);
    double naive = q.max_dt;
    naive = std::min(naive, q.cfl * h / std::max(g, 1e-12));
    if (rate > 0) naive = std::min(naive, 0.5 / rate);
    if (stiff > 0) naive = std::min(naive, q.cfl / stiff);
    CHECK(cfl_dt(g, h, q, {rate, stiff}) == naive);
  }
}

TEST_CASE("advect_reaction_step") {
  const SpatialGrid g(1, 64, 10.0);
  const SpectralPlan plan(g);
  SimParams params;
  params.max_dt = 1.0;

  SUBCASE("zero state is absorbing") {
    const MultiState zero(PhenotypeSet(3), g);
    const auto out = advect_reaction_step(zero, Field(g), plan, GrowthLaw{}, params, 1e-3);
    for (const auto& f : out.state.densities) CHECK(norm_linf(f) == 0.0);
    CHECK(out.clipped_cells == 0);
  }

  SUBCASE("conservative transport") {
    for (int dim : {1, 2}) {
      const SpatialGrid gd(dim, dim == 1 ? 64 : 32, 10.0);
      const SpectralPlan pd(gd);
      std::vector<Field> fs;
      for (int i = 0; i < 3; ++i) fs.push_back(testing::random_field(gd, 30 + i, 0.0, 0.5));
      const MultiState st(PhenotypeSet(3), fs);
      const Field w = solve_w(testing::random_field(gd, 99, 0.0, 1.0), 0.1, pd);
      SimParams prm = params;
      prm.cfl = 0.25;
      const double dt = cfl_dt(norm_linf(gradient_magnitude(gradient(w, pd))), gd.spacing(), prm, {});
      const auto out = advect_reaction_step(st, w, pd, GrowthLaw::zero(), prm, dt);
      for (int i = 0; i < 3; ++i) {
        const double before = integral(st.densities[static_cast<std::size_t>(i)]);
        const double after = integral(out.state.densities[static_cast<std::size_t>(i)]);
        CHECK(std::abs(after - before) <= 1e-13 * before);
      }
      CHECK(out.clipped_cells == 0);
    }
  }

  SUBCASE("homogeneous step matches the ODE") {
    const auto law = GrowthLaw::linear(0.5, 0.5);
    const double dt = 1e-3;
    const MultiState st(PhenotypeSet(2), {Field(g, 0.6), Field(g, 0.9)});
    const Field p = pressure(mean_density(st), params.stiffness);
    const auto out = advect_reaction_step(st, p, plan, law, params, dt);
    const auto ref = homogeneous_oracle({0.6, 0.9}, law, params.stiffness, dt, 1e-5);
    for (int i = 0; i < 2; ++i)
      for (double v : out.state.densities[static_cast<std::size_t>(i)].values())
        CHECK(std::abs(v - ref[static_cast<std::size_t>(i)]) <= 5 * dt * dt * ref[static_cast<std::size_t>(i)]);
  }

  SUBCASE("rejects steps beyond the bound") {
    const MultiState st(PhenotypeSet(1), {Field(g, 0.5)});
    CHECK_THROWS_AS(advect_reaction_step(st, Field(g), plan, GrowthLaw{}, params, 10.0), ValidationError);
    CHECK_THROWS_AS(advect_reaction_step(st, Field(g), plan, GrowthLaw{}, params, -1.0), ValidationError);
  }

  SUBCASE("discrete Gronwall per step") {
    const auto law = GrowthLaw::linear(0.5, 0.5);
    const MultiState st = InitialData{}.build(g, 4);
    const Field p = pressure(mean_density(st), params.stiffness);
    const Field w = solve_w(p, 0.01, plan);
    SimParams prm = params;
    prm.viscosity = 0.01;
    const double dt = cfl_dt(norm_linf(gradient_magnitude(gradient(w, plan))), g.spacing(), prm,
                             step_caps(p, prm, law, plan));
    const auto out = advect_reaction_step(st, w, plan, law, prm, dt);
    for (int i = 0; i < 4; ++i)
      CHECK(integral(out.state.densities[static_cast<std::size_t>(i)]) <=
            integral(st.densities[static_cast<std::size_t>(i)]) * (1 + dt * law.max_growth()) * (1 + 1e-14));
  }
}

TEST_CASE("homogeneous oracle") {
  const auto law = GrowthLaw::linear(1.0, 0.0);
  CHECK(homogeneous_oracle({0.0, 0.0}, law, 10.0, 1.0, 1e-4) == std::vector<double>{0.0, 0.0});
  for (double k : {3.0, 10.0, 40.0}) {
    const double star = std::pow((k - 1) / k, 1 / (k - 1));
    CHECK(std::abs(homogeneous_oracle({star}, law, k, 1.0, 1e-4)[0] - star) <= 1e-10);
  }
  // Small density: p is negligible, growth is exp(G(0, a) t).
  const auto g2 = GrowthLaw::linear(0.3, 0.8);
  const double n = homogeneous_oracle({1e-3}, g2, 10.0, 0.05, 1e-4)[0];
  CHECK(std::abs(n / (1e-3 * std::exp(1.1 * 0.05)) - 1.0) <= 1e-2);
  CHECK_THROWS_AS(homogeneous_oracle({1.0}, law, 10.0, 1.0, 1e-3), ValidationError);
}

TEST_CASE("run") {
  SUBCASE("zero horizon") {
    RunConfig c = testing::small_config();
    c.params.horizon = 0.0;
    const auto traj = run(c.initial_state(), c.params, c.law, {});
    CHECK(traj.snapshots.size() == 1);
    CHECK(traj.dt_history.empty());
  }

  SUBCASE("snapshot times are hit exactly") {
    RunConfig c = testing::small_config();
    const auto traj = simulate(c);
    const auto want = uniform_times(c.params.horizon, c.snapshot_count);
    REQUIRE(traj.times().size() == want.size());
    CHECK(traj.times() == want);
    CHECK(traj.final().state.time == c.params.horizon);
  }

  SUBCASE("homogeneous data against the ODE") {
    RunConfig c;
    c.points = 16;
    c.phenotypes = 3;
    c.params.max_dt = 1e-4;
    c.initial.profile = Profile::uniform;
    const auto traj = simulate(c);
    std::vector<double> n0;
    for (const auto& f : c.initial_state().densities) n0.push_back(f[0]);
    const auto ref = homogeneous_oracle(n0, c.law, c.params.stiffness, 1.0, 1e-5);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(std::abs(traj.final().state.densities[i][5] / ref[i] - 1.0) <= 1e-3);
  }

  SUBCASE("Gronwall bound on a Gaussian") {
    const auto traj = simulate(RunConfig{});
    const double m0 = integral(traj.initial().nbar);
    CHECK(integral(traj.final().nbar) <= std::exp(1.0) * m0 * (1 + 1e-6));
  }

  SUBCASE("nu = 0 equals the Darcy bypass bit for bit") {
    RunConfig c = testing::small_config();
    c.params.viscosity = 0.0;
    const auto a = simulate(c);
    c.darcy_bypass = true;
    const auto b = simulate(c);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
      CHECK(a.snapshots[s].p == b.snapshots[s].p);
      CHECK(a.snapshots[s].state.densities == b.snapshots[s].state.densities);
    }
    CHECK(a.dt_history == b.dt_history);
  }

  SUBCASE("deterministic") {
    const auto a = simulate(testing::small_config());
    const auto b = simulate(testing::small_config());
    CHECK(a.final().p == b.final().p);
  }

  SUBCASE("support violation") {
    RunConfig c = testing::small_config();
    c.box_length = 4.0;
    c.initial.width = 0.2;
    c.initial.amplitude = 1.3;
    c.params.horizon = 3.0;
    CHECK_THROWS_AS(simulate(c), SupportViolation);
  }

  SUBCASE("nonfinite state") {
    RunConfig c = testing::small_config();
    MultiState st = c.initial_state();
    st.densities[0][3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(run(st, c.params, c.law, {}), Error);
  }
}

TEST_CASE("pressure evolution residual") {
  SUBCASE("stationary homogeneous state") {
    RunConfig c;
    c.points = 16;
    c.phenotypes = 1;
    c.law = GrowthLaw::linear(1.0, 0.0);
    c.initial.profile = Profile::uniform;
    c.initial.trait_modulation = 0.0;
    c.initial.amplitude = std::pow(0.9, 1.0 / 9.0);  // p = 1 = p_M at k = 10
    c.params.horizon = 0.1;
    c.snapshot_count = 5;
    for (double v : pressure_evolution_residual(simulate(c))) CHECK(v <= 1e-8);
  }
  SUBCASE("zero state") {
    RunConfig c = testing::small_config();
    c.initial.amplitude = 0.0;
    for (double v : pressure_evolution_residual(simulate(c))) CHECK(v == 0.0);
  }
  SUBCASE("too few snapshots") {
    RunConfig c = testing::small_config();
    c.snapshot_count = 2;
    CHECK_THROWS_AS(pressure_evolution_residual(simulate(c)), ValidationError);
  }
  SUBCASE("first-order under refinement") {
    std::vector<double> res;
    for (int level = 0; level < 3; ++level) {
      RunConfig c;
      c.points = 64 << level;
      c.phenotypes = 2;
      c.params = SimParams{4.0, 0.05, 0.2, 0.4, 2e-3 / (1 << level)};
      c.initial.profile = Profile::wave;
      c.initial.amplitude = 1.0;
      c.snapshot_count = 3;
      c.snapshot_times = {0.0, 0.1 - 2e-3 / (1 << level), 0.1, 0.1 + 2e-3 / (1 << level), 0.2};
      const auto r = pressure_evolution_residual(simulate(c));
      res.push_back(r[1]);
    }
    MESSAGE("pressure residuals " << res[0] << " " << res[1] << " " << res[2]);
    CHECK(res[0] / res[1] >= 1.8);
    CHECK(res[1] / res[2] >= 1.8);
  }
}

TEST_CASE("edge mass fraction") {
  const SpatialGrid g(1, 16, 1.0);
  Field f(g, 0.0);
  CHECK(edge_mass_fraction(f, 2) == 0.0);
  f[0] = 1.0;
  f[8] = 3.0;
  CHECK(edge_mass_fraction(f, 2) == doctest::Approx(0.25));
}
