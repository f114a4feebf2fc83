#include "tgrowth/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgrowth/error.hpp"

namespace tgrowth {

namespace {

constexpr double kMinSpeed = 1e-12;
constexpr double kSupportTolerance = 1e-10;
constexpr int kSupportCells = 2;

// Flat index of the periodic neighbour one step forward along `axis`.
std::size_t forward_neighbour(const SpatialGrid& g, std::size_t c, int axis) {
  const int n = g.points_per_axis();
  const auto un = static_cast<std::size_t>(n);
  if (g.dim() == 1) return (c + 1) % un;
  const std::size_t i0 = c / un;
  const std::size_t i1 = c % un;
  if (axis == 0) return ((i0 + 1) % un) * un + i1;
  return i0 * un + (i1 + 1) % un;
}

std::size_t backward_neighbour(const SpatialGrid& g, std::size_t c, int axis) {
  const int n = g.points_per_axis();
  const auto un = static_cast<std::size_t>(n);
  if (g.dim() == 1) return (c + un - 1) % un;
  const std::size_t i0 = c / un;
  const std::size_t i1 = c % un;
  if (axis == 0) return ((i0 + un - 1) % un) * un + i1;
  return i0 * un + (i1 + un - 1) % un;
}

double max_abs_gradient(const std::vector<Field>& grad) { return norm_linf(gradient_magnitude(grad)); }

// Face velocities u_{c+1/2} = -(g_c + g_{c+1}) / 2 along each axis.
std::vector<std::vector<double>> face_velocities(const std::vector<Field>& grad) {
  const auto& g = grad.front().grid();
  std::vector<std::vector<double>> faces;
  for (int axis = 0; axis < g.dim(); ++axis) {
    const auto& d = grad[static_cast<std::size_t>(axis)];
    std::vector<double> u(g.cell_count());
    for (std::size_t c = 0; c < u.size(); ++c) u[c] = -0.5 * (d[c] + d[forward_neighbour(g, c, axis)]);
    faces.push_back(std::move(u));
  }
  return faces;
}

StepOutcome step_unchecked(const MultiState& state, const std::vector<Field>& grad, const Field& p,
                           const GrowthLaw& law, double dt) {
  const auto& g = state.grid();
  const double lambda = dt / g.spacing();
  const auto faces = face_velocities(grad);
  StepOutcome out{state, 0};
  out.state.time = state.time + dt;

  std::vector<double> flux(g.cell_count());
  std::vector<double> rate(g.cell_count());
  for (int i = 0; i < state.count(); ++i) {
    const auto& n = state.densities[static_cast<std::size_t>(i)];
    auto& next = out.state.densities[static_cast<std::size_t>(i)];
    for (int axis = 0; axis < g.dim(); ++axis) {
      const auto& u = faces[static_cast<std::size_t>(axis)];
      for (std::size_t c = 0; c < flux.size(); ++c) {
        const double v = u[c];
        flux[c] = v > 0.0 ? v * n[c] : v * n[forward_neighbour(g, c, axis)];
      }
      for (std::size_t c = 0; c < flux.size(); ++c)
        next[c] -= lambda * (flux[c] - flux[backward_neighbour(g, c, axis)]);
    }
    const double a = state.phenotypes.trait(i);
    for (std::size_t c = 0; c < rate.size(); ++c) {
      const double factor = 1.0 + dt * law(p[c], a);
      double v = next[c] * factor;
      if (v < 0.0) {
        ++out.clipped_cells;
        v = 0.0;
      }
      next[c] = v;
    }
  }
  return out;
}

struct StateFields {
  Field nbar;
  Field p;
  Field w;
};

StateFields compute_fields(const MultiState& state, const SimParams& params, const SpectralPlan& plan,
                           Potential potential) {
  Field nbar = mean_density(state);
  if (!nbar.all_finite()) throw NonFiniteState("nonfinite density at t = " + std::to_string(state.time));
  Field p = pressure(nbar, params.stiffness);
  Field w = potential == Potential::darcy_bypass ? p : solve_w(p, params.viscosity, plan);
  return {std::move(nbar), std::move(p), std::move(w)};
}

}  // namespace

double cfl_dt(double max_grad_w, double spacing, const SimParams& params, const StepCaps& caps) {
  double dt = params.cfl * spacing / std::max(max_grad_w, kMinSpeed);
  if (caps.growth_rate > 0.0) dt = std::min(dt, 0.5 / caps.growth_rate);
  if (caps.pressure_stiffness > 0.0) dt = std::min(dt, params.cfl / caps.pressure_stiffness);
  return std::min(dt, params.max_dt);
}

StepCaps step_caps(const Field& p, const SimParams& params, const GrowthLaw& law, const SpectralPlan& plan) {
  const double p_max = std::max(max_value(p), 0.0);
  StepCaps caps;
  caps.growth_rate = law.max_rate(p_max);
  caps.pressure_stiffness = (params.stiffness - 1.0) * p_max *
                            (plan.transport_symbol_bound(params.viscosity) + law.max_pressure_slope(p_max));
  return caps;
}

StepOutcome advect_reaction_step(const MultiState& state, const Field& w, const SpectralPlan& plan,
                                 const GrowthLaw& law, const SimParams& params, double dt) {
  if (!(dt >= 0.0)) throw ValidationError("time step must be nonnegative");
  const Field p = pressure(mean_density(state), params.stiffness);
  const auto grad = gradient(w, plan);
  const double bound = cfl_dt(max_abs_gradient(grad), plan.grid().spacing(), params, step_caps(p, params, law, plan));
  if (dt > bound * (1.0 + 1e-12))
    throw ValidationError("time step " + std::to_string(dt) + " exceeds the stability bound " + std::to_string(bound));
  return step_unchecked(state, grad, p, law, dt);
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const auto& s : snapshots) t.push_back(s.state.time);
  return t;
}

std::vector<double> uniform_times(double horizon, int count) {
  if (count < 2) throw ValidationError("snapshot count must be at least 2");
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = horizon * i / (count - 1);
  t.back() = horizon;
  return t;
}

double edge_mass_fraction(const Field& nbar, int cells) {
  const auto& g = nbar.grid();
  const int n = g.points_per_axis();
  double total = 0.0;
  double edge = 0.0;
  for (std::size_t c = 0; c < nbar.size(); ++c) {
    const auto idx = g.indices(c);
    bool near = idx[0] < cells || idx[0] >= n - cells;
    if (g.dim() == 2) near = near || idx[1] < cells || idx[1] >= n - cells;
    total += std::abs(nbar[c]);
    if (near) edge += std::abs(nbar[c]);
  }
  return total > 0.0 ? edge / total : 0.0;
}

Trajectory run(const MultiState& initial, const SimParams& params, const GrowthLaw& law,
               std::vector<double> snapshot_times, const RunOptions& options) {
  SimParams checked = params;
  if (params.horizon == 0.0) checked.horizon = 1.0;
  checked.validate();
  law.validate();
  initial.validate();

  const double horizon = params.horizon;
  snapshot_times.push_back(0.0);
  snapshot_times.push_back(horizon);
  std::sort(snapshot_times.begin(), snapshot_times.end());
  snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()), snapshot_times.end());
  if (snapshot_times.front() < 0.0 || snapshot_times.back() > horizon)
    throw ValidationError("snapshot times must lie in [0, T]");

  Trajectory traj;
  traj.params = params;
  traj.law = law;
  traj.plan = std::make_shared<const SpectralPlan>(initial.grid());
  const auto& plan = *traj.plan;

  MultiState state = initial;
  state.time = 0.0;
  auto fields = compute_fields(state, params, plan, options.potential);

  double ceiling = max_value(fields.p);
  if (law.kind != GrowthKind::none)
    for (double a : state.phenotypes.traits()) ceiling = std::max(ceiling, pressure_zero(law, a));
  traj.pressure_ceiling = ceiling;
  traj.max_principle_tol = options.max_principle_tol;

  auto monitor = [&](const Field& p) {
    if (ceiling <= 0.0) return;
    const double ratio = max_value(p) / ceiling;
    traj.max_pressure_ratio = std::max(traj.max_pressure_ratio, ratio);
    if (ratio > 1.0 + options.max_principle_tol) ++traj.max_principle_violations;
  };
  monitor(fields.p);

  if (options.enforce_support && edge_mass_fraction(fields.nbar, kSupportCells) > kSupportTolerance)
    throw SupportViolation("initial data reaches the box edge");

  traj.snapshots.push_back({state, fields.nbar, fields.p, fields.w});

  double t = 0.0;
  std::size_t next = 1;
  while (next < snapshot_times.size()) {
    const double target = snapshot_times[next];
    const auto grad = gradient(fields.w, plan);
    double dt = cfl_dt(max_abs_gradient(grad), plan.grid().spacing(), params,
                       step_caps(fields.p, params, law, plan));
    bool hit = false;
    if (t + dt >= target - 1e-13 * std::max(1.0, target)) {
      dt = target - t;
      hit = true;
    }
    auto outcome = step_unchecked(state, grad, fields.p, law, dt);
    traj.clipped_cells += outcome.clipped_cells;
    traj.dt_history.push_back(dt);
    state = std::move(outcome.state);
    t = hit ? target : t + dt;
    state.time = t;

    fields = compute_fields(state, params, plan, options.potential);
    monitor(fields.p);
    if (options.enforce_support) {
      const double frac = edge_mass_fraction(fields.nbar, kSupportCells);
      if (frac > kSupportTolerance)
        throw SupportViolation("mass fraction " + std::to_string(frac) + " within two cells of the box edge at t = " +
                               std::to_string(t));
    }
    if (hit) {
      traj.snapshots.push_back({state, fields.nbar, fields.p, fields.w});
      ++next;
    }
  }
  return traj;
}

std::vector<double> homogeneous_oracle(const std::vector<double>& n0, const GrowthLaw& law, double k,
                                       double horizon, double dt_fine) {
  if (!(dt_fine > 0.0 && dt_fine <= 1e-4)) throw ValidationError("oracle step must lie in (0, 1e-4]");
  if (!(horizon >= 0.0)) throw ValidationError("oracle horizon must be nonnegative");
  const std::size_t count = n0.size();
  const PhenotypeSet set(static_cast<int>(count));

  auto rhs = [&](const std::vector<double>& n) {
    double nbar = 0.0;
    for (double v : n) nbar += v;
    nbar = std::max(nbar / static_cast<double>(count), 0.0);
    const double p = pressure(nbar, k);
    std::vector<double> f(count);
    for (std::size_t i = 0; i < count; ++i) f[i] = n[i] * law(p, set.trait(static_cast<int>(i)));
    return f;
  };

  const auto steps = static_cast<long>(std::ceil(horizon / dt_fine - 1e-9));
  if (steps == 0) return n0;
  const double h = horizon / static_cast<double>(steps);
  std::vector<double> n = n0;
  std::vector<double> tmp(count);
  for (long s = 0; s < steps; ++s) {
    const auto k1 = rhs(n);
    for (std::size_t i = 0; i < count; ++i) tmp[i] = n[i] + 0.5 * h * k1[i];
    const auto k2 = rhs(tmp);
    for (std::size_t i = 0; i < count; ++i) tmp[i] = n[i] + 0.5 * h * k2[i];
    const auto k3 = rhs(tmp);
    for (std::size_t i = 0; i < count; ++i) tmp[i] = n[i] + h * k3[i];
    const auto k4 = rhs(tmp);
    for (std::size_t i = 0; i < count; ++i) n[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return n;
}

std::vector<double> pressure_evolution_residual(const Trajectory& traj) {
  const auto& snaps = traj.snapshots;
  if (snaps.size() < 3) throw ValidationError("pressure residual needs at least 3 snapshots");
  const auto& plan = *traj.plan;
  const double k = traj.params.stiffness;
  std::vector<double> out;
  for (std::size_t s = 1; s + 1 < snaps.size(); ++s) {
    const auto& cur = snaps[s];
    const double span = snaps[s + 1].state.time - snaps[s - 1].state.time;
    const auto grad_p = gradient(cur.p, plan);
    const auto grad_w = gradient(cur.w, plan);
    const Field lap_w = laplacian(cur.w, plan);
    const Field growth = weighted_growth(cur.state, cur.p, traj.law);
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t c = 0; c < cur.p.size(); ++c) {
      if (!(cur.p[c] > 1e-8)) continue;
      const double dpdt = (snaps[s + 1].p[c] - snaps[s - 1].p[c]) / span;
      double transport = 0.0;
      for (std::size_t a = 0; a < grad_p.size(); ++a) transport += grad_p[a][c] * grad_w[a][c];
      const double r = dpdt - transport - (k - 1.0) * cur.p[c] * (lap_w[c] + growth[c]);
      sum += std::abs(r);
      ++cells;
    }
    out.push_back(cells > 0 ? sum / static_cast<double>(cells) : 0.0);
  }
  return out;
}

}  // namespace tgrowth
