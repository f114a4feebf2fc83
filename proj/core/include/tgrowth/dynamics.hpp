#pragma once

#include <memory>
#include <vector>

#include "tgrowth/model.hpp"
#include "tgrowth/spectral.hpp"

namespace tgrowth {

/// Rates that bound the admissible explicit time step, besides advection.
struct StepCaps {
  /// max |G| over the operating pressure range; caps dt at 0.5 / rate.
  double growth_rate = 0.0;
  /// Largest linearised rate of the pressure feedback, (k-1) max p times the
  /// transport symbol plus |dG/dp|; caps dt at cfl / stiffness.
  double pressure_stiffness = 0.0;
};

/// dt = min(cfl h / max(|grad W|_inf, 1e-12), 0.5 / growth_rate,
///          cfl / pressure_stiffness, max_dt). Zero rates disable their cap.
double cfl_dt(double max_grad_w, double spacing, const SimParams& params, const StepCaps& caps);

/// The caps for the current state (pressure range taken from p).
StepCaps step_caps(const Field& p, const SimParams& params, const GrowthLaw& law, const SpectralPlan& plan);

struct StepOutcome {
  MultiState state;
  /// Cells where the reaction factor went negative and was clipped to zero.
  std::size_t clipped_cells = 0;
};

/// One forward-Euler step of d_t n_i = div(n_i grad W) + n_i G(p, a_i):
/// donor-cell upwind transport with face velocity -avg(grad W), then the
/// pointwise reaction with p taken at the start of the step.
///
/// Throws ValidationError if dt exceeds the stability bound for this state.
StepOutcome advect_reaction_step(const MultiState& state, const Field& w, const SpectralPlan& plan,
                                 const GrowthLaw& law, const SimParams& params, double dt);

struct Snapshot {
  MultiState state;
  Field nbar;
  Field p;
  Field w;
};

/// How run() forms the potential W.
enum class Potential {
  brinkman,      ///< W = (I - nu Laplacian)^{-1} p
  darcy_bypass,  ///< W := p with no transform, irrespective of nu
};

struct RunOptions {
  Potential potential = Potential::brinkman;
  /// Abort when mass reaches the box edge. Disable only for data that is
  /// genuinely periodic (homogeneous or wave profiles).
  bool enforce_support = true;
  /// Tolerance of the maximum-principle surrogate on p.
  double max_principle_tol = 0.05;
};

struct Trajectory {
  SimParams params;
  GrowthLaw law;
  std::shared_ptr<const SpectralPlan> plan;
  std::vector<Snapshot> snapshots;
  std::vector<double> dt_history;
  std::size_t clipped_cells = 0;
  /// Largest value of max p / (pressure ceiling) seen over all steps.
  double max_pressure_ratio = 0.0;
  /// Steps on which max p exceeded the ceiling times (1 + tol).
  std::size_t max_principle_violations = 0;
  /// max(max p(0), max_i p_M(a_i)).
  double pressure_ceiling = 0.0;
  double max_principle_tol = 0.05;

  const SpatialGrid& grid() const noexcept { return plan->grid(); }
  std::vector<double> times() const;
  const Snapshot& initial() const { return snapshots.front(); }
  const Snapshot& final() const { return snapshots.back(); }
};

/// Evolves `initial` to params.horizon, recording a snapshot at each entry of
/// `snapshot_times` (0 and T are always included). Deterministic.
///
/// Throws SupportViolation when more than 1e-10 of the mass sits within two
/// cells of the box edge, and NonFiniteState on NaN/inf.
Trajectory run(const MultiState& initial, const SimParams& params, const GrowthLaw& law,
               std::vector<double> snapshot_times, const RunOptions& options = {});

/// Uniform snapshot schedule with `count` points on [0, T] (count >= 2).
std::vector<double> uniform_times(double horizon, int count);

/// Fourth-order Runge-Kutta solution of n_i' = n_i G(Pi_k(nbar), a_i), the
/// spatially homogeneous reduction, at step dt_fine (<= 1e-4).
std::vector<double> homogeneous_oracle(const std::vector<double>& n0, const GrowthLaw& law, double k,
                                       double horizon, double dt_fine);

/// L1 cell average, over cells with p > 1e-8, of
/// d_t p - grad p . grad W - (k-1) p (Laplacian W + sum_i F_i G_i(p)),
/// at every interior snapshot (centred time differences).
std::vector<double> pressure_evolution_residual(const Trajectory& traj);

/// Mass fraction of nbar within `cells` cells of the box edge.
double edge_mass_fraction(const Field& nbar, int cells);

}  // namespace tgrowth
