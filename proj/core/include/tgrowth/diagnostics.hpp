#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tgrowth/dynamics.hpp"
#include "tgrowth/entropy.hpp"

namespace tgrowth {

enum class TestKind {
  space_time_bump,   ///< C^2 bump (1 - r^2/R^2)^3 in space times the same shape on [t0, t1]
  time_ramp,         ///< eta(t) = t, spatially constant
  indicator_smooth,  ///< 1 on the ball of radius R, quintic roll-off to 0 over `transition`
};

/// Test function for the space-time functionals. Values lie in [0, 1] for
/// the bump kinds, and the spatial part uses minimal-image distances.
struct TestFunction {
  TestKind kind = TestKind::space_time_bump;
  std::array<double, 2> centre{0.0, 0.0};
  double radius = 1.0;
  double t_start = 0.0;
  double t_end = 1.0;
  double transition = 0.5;
  double amplitude = 1.0;

  double time_factor(double t) const noexcept;
  double time_derivative(double t) const noexcept;
  double spatial(const std::array<double, 2>& x, double box_length) const noexcept;
  std::array<double, 2> spatial_gradient(const std::array<double, 2>& x, double box_length) const noexcept;

  /// psi(., t) sampled on the grid.
  Field sample(const SpatialGrid& grid, double t) const;
  /// Spatial gradient of psi(., t) sampled on the grid.
  std::vector<Field> sample_gradient(const SpatialGrid& grid, double t) const;

  /// Bump of radius L/4 at the initial mass centroid, active on [T/4, 3T/4].
  static TestFunction default_bump(const Trajectory& traj);
  static TestFunction ramp();
};

/// Centre of mass of a nonnegative field using circular means per axis, so
/// that a bump straddling the periodic seam is located correctly.
std::array<double, 2> mass_centroid(const Field& f);

/// Trapezoidal rule on possibly nonuniform nodes.
double trapezoid(const std::vector<double>& t, const std::vector<double>& v);
/// Running trapezoidal integral, starting at 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& v);

struct CheckResult {
  std::string name;
  bool passed = false;
  /// bound - measured at the tightest point (>= 0 when passing).
  double margin = 0.0;
  std::string detail;
};

struct AprioriReport {
  std::vector<CheckResult> checks;
  bool all_passed() const noexcept;
};

/// Mass growth bound, maximum-principle surrogate, positivity (no clipped
/// cells) and the first-moment bound.
AprioriReport verify_apriori(const Trajectory& traj);

/// (iint (W - p)^2)^{1/2}.
double w_minus_p_l2(const Trajectory& traj);
/// (iint |grad W|^2)^{1/2}.
double grad_w_l2(const Trajectory& traj);
/// iint psi (p - V)_+ (Laplacian W + sum_i F_i G_i(p)).
double pweak_functional(const Trajectory& traj, const TestFunction& psi, double level = 0.0);
/// iint phi |nbar - ((k-1) W / k)^{1/(k-1)}| |grad W|, evaluated as
/// c_k |p^{1/(k-1)} - W_+^{1/(k-1)}| so that W == p gives exactly zero.
double lemma7_functional(const Trajectory& traj, const TestFunction& phi);
/// iint psi p (Laplacian p + (1/N) sum_i n_i G_i(p)) with the Laplacian moved
/// onto psi and a mollified p (width 2h).
double complementarity_residual(const Trajectory& traj, const TestFunction& psi);
/// |LHS - RHS| of the energy evolution identity for the time weight eta.
double energy_evolution_residual(const Trajectory& traj, const EntropyPair& pair, const TestFunction& eta);

struct LipschitzReport {
  bool passed = false;
  /// max over snapshots of d(t) / (C1 d(0) + C2 |a - b|); 0 when d == 0.
  double ratio = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<double> distance;  ///< d(t) per snapshot
};

/// L1 stability of the trait slices with indices ia, ib (0-based).
LipschitzReport phenotype_lipschitz_check(const Trajectory& traj, int ia, int ib);

/// Root-mean-square over cells of (1/N) sum_i n_i G(p, a_i) - int_0^1 n~(a) G(p, a) da,
/// where n~ interpolates the slices linearly (constant on [0, 1/N]) and the
/// integral uses composite Simpson on 16 N panels.
double riemann_vs_integral(const MultiState& state, const GrowthLaw& law, const Field& p);

/// Named scalar time series aligned with the snapshot times.
struct DiagnosticsRecord {
  std::string run_id;
  std::vector<double> times;
  std::vector<std::pair<std::string, std::vector<double>>> series;

  void add(std::string name, std::vector<double> values);
  const std::vector<double>& get(const std::string& name) const;
  bool has(const std::string& name) const noexcept;
};

/// Every per-snapshot functional of a trajectory (cumulative ones are
/// running space-time integrals).
DiagnosticsRecord build_record(const Trajectory& traj, std::string run_id);

/// Scalar summary of the headline functionals, keyed by name.
std::vector<std::pair<std::string, double>> summary_scalars(const Trajectory& traj);

/// (iint (a - b)^2)^{1/2} over two trajectories with identical snapshot times,
/// for the field selected by `which` ("p" or "w").
double space_time_distance(const Trajectory& a, const Trajectory& b, const std::string& which = "p");

}  // namespace tgrowth
