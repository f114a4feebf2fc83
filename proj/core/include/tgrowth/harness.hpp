#pragma once

#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tgrowth/config.hpp"
#include "tgrowth/diagnostics.hpp"

namespace tgrowth {

/// Least-squares line through (log parameter, log value).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;

  /// Every value was exactly zero (slope is +infinity).
  bool converged() const noexcept;
};

/// Needs >= 3 points with positive parameters and nonnegative values. All
/// values zero returns the converged sentinel; a mix of zero and nonzero
/// values is rejected.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

/// Monotone trend over >= 4 values. One inversion is tolerated when both
/// neighbouring ratios are within 10% of 1.
bool monotone_trend(const std::vector<double>& values, bool decreasing);
/// Every consecutive pair strictly decreases.
bool strictly_decreasing(const std::vector<double>& values);

/// (N, k, nu) parameter sweep sharing everything else in `base`.
struct SweepGrid {
  RunConfig base;
  std::vector<int> phenotypes;
  std::vector<double> stiffness;
  std::vector<double> viscosity;
  /// Take the axes pointwise (a path) instead of their product.
  bool zip = false;
  int workers = 1;
  std::string output_dir = "sweep";

  void validate() const;
  /// One validated config per entry, in sweep order (N outermost, nu innermost).
  std::vector<RunConfig> entries() const;
};

/// Run config plus a [sweep] section (N, k, nu, zip, workers, output).
SweepGrid parse_sweep_config(const std::string& text);
SweepGrid load_sweep_config(const std::string& path);

using Tuple = std::tuple<int, double, double>;  // (N, k, nu)

struct SweepEntry {
  std::string hash;
  int phenotypes = 0;
  double stiffness = 0.0;
  double viscosity = 0.0;
  bool ok = false;
  std::string error;
  std::vector<std::pair<std::string, double>> scalars;
  /// Entry directory, absolute or relative to the working directory.
  std::string dir;

  Tuple key() const { return {phenotypes, stiffness, viscosity}; }
  double scalar(const std::string& name) const;
};

struct SweepTable {
  std::string dir;
  std::vector<SweepEntry> entries;

  const SweepEntry* find(const Tuple& key) const noexcept;
};

/// Hex SHA-256 of the canonical serialization (output directory blanked).
std::string config_hash(const RunConfig& config);

/// Runs every entry not already committed under grid.output_dir, on a
/// bounded worker pool, and writes the manifest. Run aborts mark the entry
/// failed; I/O failures propagate.
SweepTable sweep(const SweepGrid& grid);
/// Reads a sweep directory (manifest and status files only).
SweepTable load_sweep(const std::string& dir);

/// Cell averages onto a grid coarser by a power of two; preserves the
/// cell-sum integral.
Field restrict_to(const Field& fine, const SpatialGrid& coarse);

/// ||p_{j+1} - p_j||_{L^2} of the final pressures along `path`, over the
/// default test-bump window, after restriction to the coarsest grid.
std::vector<double> self_convergence(const SweepTable& table, const std::vector<Tuple>& path);

/// The nu = 0 endpoint (W := p) of a config.
Trajectory darcy_reference(const RunConfig& config);

enum class Axis { phenotypes, stiffness, viscosity };

struct TargetSpec {
  std::string name;    ///< CLI name
  std::string scalar;  ///< status key
  Axis axis;
  /// slope >= threshold when at_least, else slope <= threshold
  /// (strict when threshold is 0).
  double threshold;
  bool at_least;
  double min_r_squared;
};

/// wminusp, lemma7, pweak, complementarity, riemann.
const TargetSpec& target_spec(const std::string& name);

struct RateReport {
  TargetSpec spec;
  RateFit fit;
  bool passed = false;
};

/// Fits |scalar| against the target's axis over the sweep's ok entries.
RateReport evaluate_rates(const SweepTable& table, const std::string& target);

}  // namespace tgrowth
