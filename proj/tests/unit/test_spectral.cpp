#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

#include "support.hpp"
#include "tgrowth/error.hpp"
#include "tgrowth/spectral.hpp"

using namespace tgrowth;

namespace {

constexpr double kPi = std::numbers::pi;

// Sum of a few low modes, so that it is exactly representable on the grid.
Field band_limited(const SpatialGrid& g, std::uint64_t seed, int max_mode) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(g);
  const double L = g.box_length();
  for (int m0 = 0; m0 <= max_mode; ++m0)
    for (int m1 = 0; m1 <= (g.dim() == 2 ? max_mode : 0); ++m1) {
      const double amp = u(rng), phase = kPi * u(rng);
      for (std::size_t c = 0; c < f.size(); ++c) {
        const auto x = g.centre(c);
        f[c] += amp * std::cos(2 * kPi * (m0 * x[0] + m1 * x[1]) / L + phase);
      }
    }
  return f;
}

// Sixth-order centred difference along one axis.
Field fd6(const Field& f, int axis) {
  const auto& g = f.grid();
  const int n = g.points_per_axis();
  const double h = g.spacing();
  Field out(g);
  for (std::size_t c = 0; c < f.size(); ++c) {
    auto idx = g.indices(c);
    auto at = [&](int s) {
      auto j = idx;
      j[static_cast<std::size_t>(axis)] = ((j[static_cast<std::size_t>(axis)] + s) % n + n) % n;
      return f[g.dim() == 1 ? static_cast<std::size_t>(j[0]) : static_cast<std::size_t>(j[0]) * n + j[1]];
    };
    out[c] = (-at(-3) + 9 * at(-2) - 45 * at(-1) + 45 * at(1) - 9 * at(2) + at(3)) / (60 * h);
  }
  return out;
}

}  // namespace

TEST_CASE("solve_w basics") {
  const SpatialGrid g(1, 128, 10.0);
  const SpectralPlan plan(g);
  const Field p = testing::random_field(g, 3);
  CHECK(solve_w(p, 0.0, plan) == p);
  const Field w = solve_w(Field(g, 0.7), 0.3, plan);
  for (double v : w.values()) CHECK(std::abs(v - 0.7) <= 1e-14);

  Field s(g);
  const double xi = 2 * kPi / g.box_length();
  for (std::size_t c = 0; c < s.size(); ++c) s[c] = std::sin(xi * g.centre(c)[0]);
  for (double nu : {1e-3, 0.1, 1.0}) {
    const Field ws = solve_w(s, nu, plan);
    for (std::size_t c = 0; c < s.size(); ++c) CHECK(std::abs(ws[c] - s[c] / (1 + nu * xi * xi)) <= 1e-10);
  }
  CHECK_THROWS_AS(solve_w(p, -1.0, plan), ValidationError);
  CHECK_THROWS_AS(solve_w(Field(SpatialGrid(1, 64, 10.0)), 0.1, plan), ValidationError);
}

TEST_CASE("operator and inverse") {
  for (int dim : {1, 2}) {
    const SpatialGrid g(dim, dim == 1 ? 256 : 32, 7.0);
    const SpectralPlan plan(g);
    const Field p = testing::random_field(g, 11 + dim, -1.0, 1.0);
    for (double nu : {0.0, 1e-3, 0.05, 0.5}) {
      const Field back = apply_operator(solve_w(p, nu, plan), nu, plan);
      CHECK(norm_l2(difference(back, p)) <= 1e-10 * norm_l2(p));
      const Field fwd = solve_w(apply_operator(p, nu, plan), nu, plan);
      CHECK(norm_l2(difference(fwd, p)) <= 1e-10 * norm_l2(p));
    }
    CHECK(apply_operator(p, 0.0, plan) == p);
    const Field flat = apply_operator(Field(g, 2.5), 0.2, plan);
    for (double v : flat.values()) CHECK(std::abs(v - 2.5) <= 1e-13);
  }
}

TEST_CASE("resolvent properties") {
  const SpatialGrid g(2, 32, 6.0);
  const SpectralPlan plan(g);
  const Field p = testing::random_field(g, 5, 0.0, 1.0);
  const Field w = solve_w(p, 0.02, plan);
  CHECK(integral(w) == doctest::Approx(integral(p)).epsilon(1e-12));
  CHECK(min_value(w) >= -1e-8 * max_value(p));
  double prev = std::numeric_limits<double>::infinity();
  for (double nu : {0.0, 0.01, 0.1, 1.0}) {
    const double gn = norm_l2(gradient_magnitude(gradient(solve_w(p, nu, plan), plan)));
    CHECK(gn <= prev);
    prev = gn;
  }
}

TEST_CASE("spectral gradient") {
  const SpatialGrid g(1, 128, 10.0);
  const SpectralPlan plan(g);
  const auto flat = gradient(Field(g, 3.0), plan);
  for (double v : flat[0].values()) CHECK(std::abs(v) <= 1e-14);
  Field s(g);
  const double xi = 2 * kPi / g.box_length();
  for (std::size_t c = 0; c < s.size(); ++c) s[c] = std::sin(xi * g.centre(c)[0]);
  const auto d = gradient(s, plan);
  REQUIRE(d.size() == 1);
  for (std::size_t c = 0; c < s.size(); ++c) CHECK(std::abs(d[0][c] - xi * std::cos(xi * g.centre(c)[0])) <= 1e-10);

  // Against 6th-order finite differences on band-limited data: the error
  // must shrink like h^6 under refinement.
  for (int dim : {1, 2}) {
    double prev_err = 0.0;
    for (int n : {32, 64}) {
      const SpatialGrid gn(dim, n, 10.0);
      const SpectralPlan pn(gn);
      const Field f = band_limited(gn, 21, 3);
      const auto grad = gradient(f, pn);
      double err = 0.0;
      for (int axis = 0; axis < dim; ++axis)
        err = std::max(err, norm_linf(difference(grad[static_cast<std::size_t>(axis)], fd6(f, axis))));
      if (prev_err > 0.0) CHECK(prev_err / err >= 40.0);
      if (n == 64) CHECK(err <= 1e-4);
      prev_err = err;
    }
  }
}

TEST_CASE("laplacian and mollifier") {
  const SpatialGrid g(2, 32, 4.0);
  const SpectralPlan plan(g);
  Field f(g);
  const double xi = 2 * kPi / g.box_length();
  for (std::size_t c = 0; c < f.size(); ++c) {
    const auto x = g.centre(c);
    f[c] = std::cos(xi * x[0]) * std::cos(2 * xi * x[1]);
  }
  const Field lap = laplacian(f, plan);
  for (std::size_t c = 0; c < f.size(); ++c) CHECK(std::abs(lap[c] + 5 * xi * xi * f[c]) <= 1e-10);
  const Field m = mollify(f, 0.3, plan);
  const double damp = std::exp(-0.5 * 0.09 * 5 * xi * xi);
  for (std::size_t c = 0; c < f.size(); ++c) CHECK(std::abs(m[c] - damp * f[c]) <= 1e-12);
  CHECK(norm_linf(difference(mollify(f, 0.0, plan), f)) <= 1e-14);
}

TEST_CASE("shared plan across threads is deterministic") {
  const SpatialGrid g(1, 256, 10.0);
  const SpectralPlan plan(g);
  const Field p = testing::random_field(g, 8);
  const Field ref = solve_w(p, 0.01, plan);
  std::vector<Field> out(4, Field(g));
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t)
    ts.emplace_back([&, t] {
      for (int r = 0; r < 20; ++r) out[static_cast<std::size_t>(t)] = solve_w(p, 0.01, plan);
    });
  for (auto& t : ts) t.join();
  for (const auto& o : out) CHECK(o == ref);
}

TEST_CASE("transport symbol bound") {
  const SpatialGrid g(1, 64, 10.0);
  const SpectralPlan plan(g);
  // Naive scan over the discrete modes.
  const double h = g.spacing();
  for (double nu : {0.0, 0.01, 0.1}) {
    double best = 0.0;
    for (int m = 0; m <= 32; ++m) {
      const double xi = 2 * kPi * m / g.box_length();
      best = std::max(best, xi * std::sin(xi * h) / h / (1 + nu * xi * xi));
    }
    CHECK(plan.transport_symbol_bound(nu) >= best * (1 - 1e-12));
    CHECK(plan.transport_symbol_bound(nu) <= best * 2.0 + 1e-12);
  }
}
