#include "tgrowth/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "tgrowth/error.hpp"

namespace tgrowth {

namespace {

double smoothstep5(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smoothstep5_derivative(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

// Per-snapshot space integrals f(s), s = 0..S-1.
std::vector<double> per_snapshot(const Trajectory& traj, const std::function<double(std::size_t)>& f) {
  std::vector<double> v(traj.snapshots.size());
  for (std::size_t s = 0; s < v.size(); ++s) v[s] = f(s);
  return v;
}

double first_moment(const Field& nbar) {
  const auto& g = nbar.grid();
  double s = 0.0;
  for (std::size_t c = 0; c < nbar.size(); ++c) {
    const auto x = g.centre(c);
    s += std::hypot(x[0], x[1]) * nbar[c];
  }
  return s * g.cell_volume();
}

}  // namespace

// ---------------------------------------------------------------------------
// Test functions

double TestFunction::time_factor(double t) const noexcept {
  switch (kind) {
    case TestKind::space_time_bump: {
      if (t <= t_start || t >= t_end) return 0.0;
      const double tau = (2.0 * t - t_start - t_end) / (t_end - t_start);
      const double b = 1.0 - tau * tau;
      return amplitude * b * b * b;
    }
    case TestKind::time_ramp:
      return amplitude * t;
    case TestKind::indicator_smooth:
      return amplitude;
  }
  return 0.0;
}

double TestFunction::time_derivative(double t) const noexcept {
  switch (kind) {
    case TestKind::space_time_bump: {
      if (t <= t_start || t >= t_end) return 0.0;
      const double tau = (2.0 * t - t_start - t_end) / (t_end - t_start);
      const double b = 1.0 - tau * tau;
      return amplitude * 3.0 * b * b * (-2.0 * tau) * 2.0 / (t_end - t_start);
    }
    case TestKind::time_ramp:
      return amplitude;
    case TestKind::indicator_smooth:
      return 0.0;
  }
  return 0.0;
}

double TestFunction::spatial(const std::array<double, 2>& x, double box_length) const noexcept {
  if (kind == TestKind::time_ramp) return 1.0;
  const double d0 = periodic_offset(x[0], centre[0], box_length);
  const double d1 = periodic_offset(x[1], centre[1], box_length);
  const double r2 = d0 * d0 + d1 * d1;
  if (kind == TestKind::space_time_bump) {
    const double s = r2 / (radius * radius);
    if (s >= 1.0) return 0.0;
    const double b = 1.0 - s;
    return b * b * b;
  }
  const double r = std::sqrt(r2);
  if (r <= radius) return 1.0;
  if (r >= radius + transition) return 0.0;
  return 1.0 - smoothstep5((r - radius) / transition);
}

std::array<double, 2> TestFunction::spatial_gradient(const std::array<double, 2>& x,
                                                     double box_length) const noexcept {
  if (kind == TestKind::time_ramp) return {0.0, 0.0};
  const double d0 = periodic_offset(x[0], centre[0], box_length);
  const double d1 = periodic_offset(x[1], centre[1], box_length);
  const double r2 = d0 * d0 + d1 * d1;
  if (kind == TestKind::space_time_bump) {
    const double s = r2 / (radius * radius);
    if (s >= 1.0) return {0.0, 0.0};
    const double f = -6.0 * (1.0 - s) * (1.0 - s) / (radius * radius);
    return {f * d0, f * d1};
  }
  const double r = std::sqrt(r2);
  if (r <= radius || r >= radius + transition) return {0.0, 0.0};
  const double f = -smoothstep5_derivative((r - radius) / transition) / (transition * r);
  return {f * d0, f * d1};
}

Field TestFunction::sample(const SpatialGrid& grid, double t) const {
  Field out(grid);
  const double tf = time_factor(t);
  if (tf == 0.0) return out;
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = tf * spatial(grid.centre(c), grid.box_length());
  return out;
}

std::vector<Field> TestFunction::sample_gradient(const SpatialGrid& grid, double t) const {
  std::vector<Field> out(static_cast<std::size_t>(grid.dim()), Field(grid));
  const double tf = time_factor(t);
  if (tf == 0.0) return out;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto g = spatial_gradient(grid.centre(c), grid.box_length());
    for (int a = 0; a < grid.dim(); ++a) out[static_cast<std::size_t>(a)][c] = tf * g[static_cast<std::size_t>(a)];
  }
  return out;
}

TestFunction TestFunction::default_bump(const Trajectory& traj) {
  TestFunction f;
  f.kind = TestKind::space_time_bump;
  f.centre = mass_centroid(traj.initial().nbar);
  f.radius = 0.25 * traj.grid().box_length();
  const double horizon = traj.params.horizon;
  f.t_start = 0.25 * horizon;
  f.t_end = 0.75 * horizon;
  return f;
}

TestFunction TestFunction::ramp() {
  TestFunction f;
  f.kind = TestKind::time_ramp;
  return f;
}

std::array<double, 2> mass_centroid(const Field& f) {
  const auto& g = f.grid();
  const double length = g.box_length();
  std::array<double, 2> out{0.0, 0.0};
  for (int axis = 0; axis < g.dim(); ++axis) {
    double sx = 0.0;
    double cx = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) {
      const double theta = 2.0 * std::numbers::pi * g.centre(c)[static_cast<std::size_t>(axis)] / length;
      sx += f[c] * std::sin(theta);
      cx += f[c] * std::cos(theta);
    }
    if (sx == 0.0 && cx == 0.0) continue;
    out[static_cast<std::size_t>(axis)] = std::atan2(sx, cx) * length / (2.0 * std::numbers::pi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size()) throw ValidationError("trapezoid: node and value counts differ");
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return s;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size()) throw ValidationError("trapezoid: node and value counts differ");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return out;
}

// ---------------------------------------------------------------------------
// A priori checks

bool AprioriReport::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

AprioriReport verify_apriori(const Trajectory& traj) {
  AprioriReport report;
  const auto times = traj.times();
  const double growth = traj.law.max_growth();
  const auto& plan = *traj.plan;

  {
    CheckResult mass{"mass_growth_bound", true, std::numeric_limits<double>::infinity(), ""};
    const double m0 = integral(traj.initial().nbar);
    for (std::size_t s = 0; s < times.size(); ++s) {
      const double m = integral(traj.snapshots[s].nbar);
      const double bound = m0 * std::exp(growth * times[s]) * (1.0 + 1e-6);
      mass.margin = std::min(mass.margin, bound - m);
      if (m > bound) mass.passed = false;
    }
    mass.detail = "mass(t) <= mass(0) exp(" + std::to_string(growth) + " t)(1 + 1e-6)";
    report.checks.push_back(mass);
  }

  {
    const double limit = traj.pressure_ceiling * (1.0 + traj.max_principle_tol);
    const double seen = traj.max_pressure_ratio * traj.pressure_ceiling;
    CheckResult mp{"max_principle", traj.max_principle_violations == 0, limit - seen,
                   "max p <= (1 + tol) max(max p(0), max p_M)"};
    report.checks.push_back(mp);
  }

  {
    bool nonneg = traj.clipped_cells == 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& snap : traj.snapshots)
      for (const auto& f : snap.state.densities) lowest = std::min(lowest, min_value(f));
    nonneg = nonneg && lowest >= 0.0;
    report.checks.push_back({"positivity", nonneg, lowest,
                             "clipped cells: " + std::to_string(traj.clipped_cells)});
  }

  {
    // d/dt int |x| nbar <= int nbar |grad W| + G int |x| nbar, so
    // M1(t) <= (M1(0) + |nbar_0|_1 + iint_{Q_t} nbar |grad W|) e^{G t}.
    const auto flux = per_snapshot(traj, [&](std::size_t s) {
      const auto& snap = traj.snapshots[s];
      const Field speed = gradient_magnitude(gradient(snap.w, plan));
      double acc = 0.0;
      for (std::size_t c = 0; c < speed.size(); ++c) acc += snap.nbar[c] * speed[c];
      return acc * snap.nbar.grid().cell_volume();
    });
    const auto flux_int = cumulative_trapezoid(times, flux);
    const double m1_0 = first_moment(traj.initial().nbar);
    const double l1_0 = norm_l1(traj.initial().nbar);
    CheckResult moment{"first_moment_bound", true, std::numeric_limits<double>::infinity(), ""};
    for (std::size_t s = 0; s < times.size(); ++s) {
      const double m1 = first_moment(traj.snapshots[s].nbar);
      const double bound = (m1_0 + l1_0 + flux_int[s]) * std::exp(growth * times[s]);
      moment.margin = std::min(moment.margin, bound - m1);
      if (m1 > bound) moment.passed = false;
    }
    moment.detail = "int |x| nbar <= (M1(0) + |nbar_0|_1 + iint nbar |grad W|) e^{G t}";
    report.checks.push_back(moment);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Space-time functionals

double w_minus_p_l2(const Trajectory& traj) {
  const auto v = per_snapshot(traj, [&](std::size_t s) {
    const auto& snap = traj.snapshots[s];
    double acc = 0.0;
    for (std::size_t c = 0; c < snap.p.size(); ++c) {
      const double d = snap.w[c] - snap.p[c];
      acc += d * d;
    }
    return acc * snap.p.grid().cell_volume();
  });
  return std::sqrt(std::max(trapezoid(traj.times(), v), 0.0));
}

double grad_w_l2(const Trajectory& traj) {
  const auto v = per_snapshot(traj, [&](std::size_t s) {
    const auto grad = gradient(traj.snapshots[s].w, *traj.plan);
    double acc = 0.0;
    for (const auto& g : grad)
      for (double x : g.values()) acc += x * x;
    return acc * traj.grid().cell_volume();
  });
  return std::sqrt(std::max(trapezoid(traj.times(), v), 0.0));
}

double pweak_functional(const Trajectory& traj, const TestFunction& psi, double level) {
  if (!(level >= 0.0)) throw ValidationError("pressure level V must be nonnegative");
  const auto v = per_snapshot(traj, [&](std::size_t s) {
    const auto& snap = traj.snapshots[s];
    const double t = snap.state.time;
    if (psi.time_factor(t) == 0.0) return 0.0;
    const Field weight = psi.sample(traj.grid(), t);
    const Field lap_w = laplacian(snap.w, *traj.plan);
    const Field growth = weighted_growth(snap.state, snap.p, traj.law);
    double acc = 0.0;
    for (std::size_t c = 0; c < weight.size(); ++c) {
      const double excess = snap.p[c] - level;
      if (excess <= 0.0 || weight[c] == 0.0) continue;
      acc += weight[c] * excess * (lap_w[c] + growth[c]);
    }
    return acc * traj.grid().cell_volume();
  });
  return trapezoid(traj.times(), v);
}

double lemma7_functional(const Trajectory& traj, const TestFunction& phi) {
  const double k = traj.params.stiffness;
  const double root = 1.0 / (k - 1.0);
  const double ck = std::pow((k - 1.0) / k, root);
  const auto v = per_snapshot(traj, [&](std::size_t s) {
    const auto& snap = traj.snapshots[s];
    const double t = snap.state.time;
    if (phi.time_factor(t) == 0.0) return 0.0;
    const Field weight = phi.sample(traj.grid(), t);
    const Field speed = gradient_magnitude(gradient(snap.w, *traj.plan));
    double acc = 0.0;
    for (std::size_t c = 0; c < weight.size(); ++c) {
      if (weight[c] == 0.0 || snap.w[c] == snap.p[c]) continue;
      const double gap = std::pow(std::max(snap.p[c], 0.0), root) - std::pow(std::max(snap.w[c], 0.0), root);
      acc += weight[c] * ck * std::abs(gap) * speed[c];
    }
    return acc * traj.grid().cell_volume();
  });
  return trapezoid(traj.times(), v);
}

double complementarity_residual(const Trajectory& traj, const TestFunction& psi) {
  const auto& plan = *traj.plan;
  const double width = 2.0 * traj.grid().spacing();
  const auto v = per_snapshot(traj, [&](std::size_t s) {
    const auto& snap = traj.snapshots[s];
    const double t = snap.state.time;
    if (psi.time_factor(t) == 0.0) return 0.0;
    const Field weight = psi.sample(traj.grid(), t);
    const auto grad_weight = psi.sample_gradient(traj.grid(), t);
    const auto grad_ps = gradient(mollify(snap.p, width, plan), plan);
    const int count = snap.state.count();
    double acc = 0.0;
    for (std::size_t c = 0; c < weight.size(); ++c) {
      double sq = 0.0;
      double cross = 0.0;
      for (std::size_t a = 0; a < grad_ps.size(); ++a) {
        sq += grad_ps[a][c] * grad_ps[a][c];
        cross += grad_weight[a][c] * grad_ps[a][c];
      }
      double source = 0.0;
      if (weight[c] != 0.0 && snap.p[c] != 0.0)
        for (int i = 0; i < count; ++i)
          source += snap.state.densities[static_cast<std::size_t>(i)][c] *
                    traj.law(snap.p[c], snap.state.phenotypes.trait(i));
      source /= count;
      acc += -weight[c] * sq - snap.p[c] * cross + weight[c] * snap.p[c] * source;
    }
    return acc * traj.grid().cell_volume();
  });
  return trapezoid(traj.times(), v);
}

namespace {

// Space integral of the right-hand side of the energy identity at one
// snapshot (without the time weight).
double energy_rhs_density(const Snapshot& snap, const EntropyPair& pair, const GrowthLaw& law,
                          const SpectralPlan& plan) {
  const Field lap_w = laplacian(snap.w, plan);
  const auto grad_w = gradient(snap.w, plan);
  const Field growth = weighted_growth(snap.state, snap.p, law);
  double acc = 0.0;
  for (std::size_t c = 0; c < snap.p.size(); ++c) {
    double grad_sq = 0.0;
    for (const auto& g : grad_w) grad_sq += g[c] * g[c];
    const double dzp = pair.dz(snap.p[c]);
    const double dzw = snap.w[c] == snap.p[c] ? dzp : pair.dz(snap.w[c]);
    double dissipation = 0.0;
    if (grad_sq > 0.0) dissipation = pair.d2z(snap.w[c]) * grad_sq;
    acc += (dzp - dzw) * lap_w[c] - dissipation + (pair.e(snap.nbar[c]) + dzp) * growth[c];
  }
  return acc * snap.p.grid().cell_volume();
}

double entropy_integral(const Field& nbar, const EntropyPair& pair) {
  double acc = 0.0;
  for (double v : nbar.values()) acc += pair.e(v);
  return acc * nbar.grid().cell_volume();
}

}  // namespace

double energy_evolution_residual(const Trajectory& traj, const EntropyPair& pair, const TestFunction& eta) {
  const auto times = traj.times();
  const auto energy = per_snapshot(traj, [&](std::size_t s) { return entropy_integral(traj.snapshots[s].nbar, pair); });
  std::vector<double> weighted_energy(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) weighted_energy[s] = eta.time_derivative(times[s]) * energy[s];
  const double lhs = eta.time_factor(times.back()) * energy.back() - eta.time_factor(times.front()) * energy.front() -
                     trapezoid(times, weighted_energy);
  const auto rhs_density = per_snapshot(traj, [&](std::size_t s) {
    const double w = eta.time_factor(times[s]);
    if (w == 0.0) return 0.0;
    return w * energy_rhs_density(traj.snapshots[s], pair, traj.law, *traj.plan);
  });
  return std::abs(lhs - trapezoid(times, rhs_density));
}

// ---------------------------------------------------------------------------
// Trait-direction checks

LipschitzReport phenotype_lipschitz_check(const Trajectory& traj, int ia, int ib) {
  const int count = traj.initial().state.count();
  if (ia < 0 || ib < 0 || ia >= count || ib >= count) throw ValidationError("phenotype index out of range");
  LipschitzReport rep;
  const double horizon = traj.params.horizon;
  const double growth = traj.law.max_growth();
  const double a = traj.initial().state.phenotypes.trait(ia);
  const double b = traj.initial().state.phenotypes.trait(ib);

  double slice_mass = 0.0;
  for (const auto& snap : traj.snapshots) {
    const auto& na = snap.state.densities[static_cast<std::size_t>(ia)];
    const auto& nb = snap.state.densities[static_cast<std::size_t>(ib)];
    slice_mass = std::max({slice_mass, norm_l1(na), norm_l1(nb)});
    rep.distance.push_back(norm_l1(difference(na, nb)));
  }
  rep.c1 = std::exp(growth * horizon);
  const double ramp = growth > 0.0 ? (std::exp(growth * horizon) - 1.0) / growth : horizon;
  rep.c2 = slice_mass * traj.law.max_trait_slope() * ramp;
  const double bound = rep.c1 * rep.distance.front() + rep.c2 * std::abs(a - b);
  rep.ratio = 0.0;
  for (double d : rep.distance) {
    if (d == 0.0) continue;
    rep.ratio = std::max(rep.ratio, bound > 0.0 ? d / bound : std::numeric_limits<double>::infinity());
  }
  rep.passed = rep.ratio <= 1.0;
  return rep;
}

double riemann_vs_integral(const MultiState& state, const GrowthLaw& law, const Field& p) {
  const int count = state.count();
  const int panels = 16 * count;
  const double step = 1.0 / panels;
  const auto& grid = state.grid();
  std::vector<double> slices(static_cast<std::size_t>(count));
  double acc = 0.0;
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    for (int i = 0; i < count; ++i) slices[static_cast<std::size_t>(i)] = state.densities[static_cast<std::size_t>(i)][c];
    double riemann = 0.0;
    for (int i = 0; i < count; ++i) riemann += slices[static_cast<std::size_t>(i)] * law(p[c], state.phenotypes.trait(i));
    riemann /= count;

    auto interpolant = [&](int node) {
      const int q = node / 16;
      if (q == 0) return slices.front();
      if (q >= count) return slices.back();
      const double frac = (node % 16) / 16.0;
      const double lo = slices[static_cast<std::size_t>(q - 1)];
      const double hi = slices[static_cast<std::size_t>(q)];
      return lo + (hi - lo) * frac;
    };
    double simpson = 0.0;
    for (int j = 0; j <= panels; ++j) {
      const double weight = (j == 0 || j == panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      const double a = static_cast<double>(j) / panels;
      simpson += weight * interpolant(j) * law(p[c], a);
    }
    simpson *= step / 3.0;
    const double d = riemann - simpson;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(grid.cell_count()));
}

// ---------------------------------------------------------------------------
// Records

void DiagnosticsRecord::add(std::string name, std::vector<double> values) {
  if (values.size() != times.size())
    throw ValidationError("series '" + name + "' is not aligned with the snapshot times");
  series.emplace_back(std::move(name), std::move(values));
}

const std::vector<double>& DiagnosticsRecord::get(const std::string& name) const {
  for (const auto& [key, values] : series)
    if (key == name) return values;
  throw ValidationError("no series named '" + name + "'");
}

bool DiagnosticsRecord::has(const std::string& name) const noexcept {
  return std::any_of(series.begin(), series.end(), [&](const auto& kv) { return kv.first == name; });
}

namespace {

// Traits closest to 1/4 and 3/4; the Lipschitz pair recorded by default.
std::pair<int, int> quarter_traits(int count) {
  auto nearest = [count](double a) {
    int best = 0;
    for (int i = 1; i < count; ++i)
      if (std::abs(static_cast<double>(i + 1) / count - a) < std::abs(static_cast<double>(best + 1) / count - a))
        best = i;
    return best;
  };
  return {nearest(0.25), nearest(0.75)};
}

}  // namespace

DiagnosticsRecord build_record(const Trajectory& traj, std::string run_id) {
  DiagnosticsRecord rec;
  rec.run_id = std::move(run_id);
  rec.times = traj.times();
  const auto& plan = *traj.plan;
  const auto& snaps = traj.snapshots;
  const std::size_t count = snaps.size();
  const double volume = traj.grid().cell_volume();
  const double k = traj.params.stiffness;

  const int phenotypes = traj.initial().state.count();
  for (int i = 0; i < phenotypes; ++i)
    rec.add("mass_" + std::to_string(i + 1), per_snapshot(traj, [&](std::size_t s) {
              return integral(snaps[s].state.densities[static_cast<std::size_t>(i)]);
            }));

  auto norms = [&](const std::string& name, auto pick) {
    rec.add(name + "_l1", per_snapshot(traj, [&](std::size_t s) { return norm_l1(pick(snaps[s])); }));
    rec.add(name + "_l2", per_snapshot(traj, [&](std::size_t s) { return norm_l2(pick(snaps[s])); }));
    rec.add(name + "_linf", per_snapshot(traj, [&](std::size_t s) { return norm_linf(pick(snaps[s])); }));
  };
  norms("nbar", [](const Snapshot& s) -> const Field& { return s.nbar; });
  norms("p", [](const Snapshot& s) -> const Field& { return s.p; });
  norms("w", [](const Snapshot& s) -> const Field& { return s.w; });
  rec.add("first_moment", per_snapshot(traj, [&](std::size_t s) { return first_moment(snaps[s].nbar); }));

  const auto bump = TestFunction::default_bump(traj);
  const auto pair = entropy_pair(k + 1.0, k);
  const double root = 1.0 / (k - 1.0);
  const double ck = std::pow((k - 1.0) / k, root);
  const double width = 2.0 * traj.grid().spacing();

  std::vector<double> grad_sq(count), gap_sq(count), lemma7(count), pweak(count), compl_(count), energy(count),
      energy_rhs(count), riemann(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto& snap = snaps[s];
    const double t = snap.state.time;
    const auto grad_w = gradient(snap.w, plan);
    const Field speed = gradient_magnitude(grad_w);
    const Field lap_w = laplacian(snap.w, plan);
    const Field growth = weighted_growth(snap.state, snap.p, traj.law);
    const Field weight = bump.sample(traj.grid(), t);
    const auto grad_weight = bump.sample_gradient(traj.grid(), t);
    const auto grad_ps = gradient(mollify(snap.p, width, plan), plan);

    double gsq = 0.0, dsq = 0.0, l7 = 0.0, pw = 0.0, cr = 0.0;
    for (std::size_t c = 0; c < snap.p.size(); ++c) {
      gsq += speed[c] * speed[c];
      const double d = snap.w[c] - snap.p[c];
      dsq += d * d;
      if (weight[c] != 0.0) {
        if (d != 0.0)
          l7 += weight[c] * ck *
                std::abs(std::pow(std::max(snap.p[c], 0.0), root) - std::pow(std::max(snap.w[c], 0.0), root)) * speed[c];
        if (snap.p[c] > 0.0) pw += weight[c] * snap.p[c] * (lap_w[c] + growth[c]);
      }
      double sq = 0.0, cross = 0.0;
      for (std::size_t a = 0; a < grad_ps.size(); ++a) {
        sq += grad_ps[a][c] * grad_ps[a][c];
        cross += grad_weight[a][c] * grad_ps[a][c];
      }
      // nbar * sum_i F_i G_i equals (1/N) sum_i n_i G_i.
      cr += -weight[c] * sq - snap.p[c] * cross + weight[c] * snap.p[c] * snap.nbar[c] * growth[c];
    }
    grad_sq[s] = gsq * volume;
    gap_sq[s] = dsq * volume;
    lemma7[s] = l7 * volume;
    pweak[s] = pw * volume;
    compl_[s] = cr * volume;
    energy[s] = entropy_integral(snap.nbar, pair);
    energy_rhs[s] = t * energy_rhs_density(snap, pair, traj.law, plan);
    riemann[s] = riemann_vs_integral(snap.state, traj.law, snap.p);
  }
  rec.add("grad_w_sq_cumulative", cumulative_trapezoid(rec.times, grad_sq));
  rec.add("w_minus_p_sq_cumulative", cumulative_trapezoid(rec.times, gap_sq));
  rec.add("lemma7_cumulative", cumulative_trapezoid(rec.times, lemma7));
  rec.add("pweak_cumulative", cumulative_trapezoid(rec.times, pweak));
  rec.add("complementarity_cumulative", cumulative_trapezoid(rec.times, compl_));

  // Energy identity with eta(t) = t on [0, t_s].
  const auto energy_int = cumulative_trapezoid(rec.times, energy);
  const auto rhs_int = cumulative_trapezoid(rec.times, energy_rhs);
  std::vector<double> energy_res(count);
  for (std::size_t s = 0; s < count; ++s)
    energy_res[s] = std::abs(rec.times[s] * energy[s] - energy_int[s] - rhs_int[s]);
  rec.add("energy_residual", std::move(energy_res));
  rec.add("riemann_error", std::move(riemann));

  std::vector<double> lipschitz(count, 0.0);
  if (phenotypes >= 2) {
    const auto [ia, ib] = quarter_traits(phenotypes);
    const auto rep = phenotype_lipschitz_check(traj, ia, ib);
    const double a = traj.initial().state.phenotypes.trait(ia);
    const double b = traj.initial().state.phenotypes.trait(ib);
    const double bound = rep.c1 * rep.distance.front() + rep.c2 * std::abs(a - b);
    for (std::size_t s = 0; s < count; ++s) lipschitz[s] = bound > 0.0 ? rep.distance[s] / bound : 0.0;
  }
  rec.add("lipschitz_ratio", std::move(lipschitz));
  return rec;
}

std::vector<std::pair<std::string, double>> summary_scalars(const Trajectory& traj) {
  const auto bump = TestFunction::default_bump(traj);
  const double k = traj.params.stiffness;
  const auto& fin = traj.final();
  return {
      {"w_minus_p_l2", w_minus_p_l2(traj)},
      {"grad_w_l2", grad_w_l2(traj)},
      {"pweak", pweak_functional(traj, bump, 0.0)},
      {"lemma7", lemma7_functional(traj, bump)},
      {"complementarity", complementarity_residual(traj, bump)},
      {"energy_residual", energy_evolution_residual(traj, entropy_pair(k + 1.0, k), TestFunction::ramp())},
      {"riemann", riemann_vs_integral(fin.state, traj.law, fin.p)},
      {"mass_final", integral(fin.nbar)},
      {"max_p_final", max_value(fin.p)},
  };
}

double space_time_distance(const Trajectory& a, const Trajectory& b, const std::string& which) {
  const auto ta = a.times();
  const auto tb = b.times();
  if (ta.size() != tb.size()) throw ValidationError("trajectories have different snapshot counts");
  for (std::size_t s = 0; s < ta.size(); ++s)
    if (std::abs(ta[s] - tb[s]) > 1e-12 * std::max(1.0, std::abs(ta[s])))
      throw ValidationError("trajectories have different snapshot times");
  if (which != "p" && which != "w") throw ValidationError("distance field must be 'p' or 'w'");
  std::vector<double> v(ta.size());
  for (std::size_t s = 0; s < ta.size(); ++s) {
    const Field& fa = which == "p" ? a.snapshots[s].p : a.snapshots[s].w;
    const Field& fb = which == "p" ? b.snapshots[s].p : b.snapshots[s].w;
    double acc = 0.0;
    for (std::size_t c = 0; c < fa.size(); ++c) acc += (fa[c] - fb[c]) * (fa[c] - fb[c]);
    v[s] = acc * fa.grid().cell_volume();
  }
  return std::sqrt(std::max(trapezoid(ta, v), 0.0));
}

}  // namespace tgrowth
