#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "tgrowth/dynamics.hpp"
#include "tgrowth/toml_lite.hpp"

namespace tgrowth {

enum class Profile {
  gaussian,    ///< truncated at 6 widths
  double_bump, ///< two gaussians at centre -+ separation / 2 along axis 0
  uniform,     ///< spatially constant; periodic, no support check
  wave,        ///< 1 + 0.5 prod cos(2 pi x / L); periodic, no support check
};

/// n_i(x, 0) = amplitude (1 + trait_modulation (a_i - 1/2)) profile(x).
struct InitialData {
  Profile profile = Profile::gaussian;
  std::array<double, 2> centre{0.0, 0.0};
  double width = 0.5;
  double amplitude = 0.95;
  double trait_modulation = 0.5;
  double separation = 2.0;

  /// Compactly supported profiles are checked against the box edge.
  bool compact() const noexcept { return profile == Profile::gaussian || profile == Profile::double_bump; }
  /// profile(x) at one point.
  double shape(const std::array<double, 2>& x, double box_length) const noexcept;
  MultiState build(const SpatialGrid& grid, int phenotypes) const;

  bool operator==(const InitialData&) const = default;
};

struct RunConfig {
  int dim = 1;
  int points = 256;
  double box_length = 10.0;
  int phenotypes = 8;
  SimParams params{10.0, 1e-2, 1.0, 0.4, 1e-3};
  bool darcy_bypass = false;
  GrowthLaw law;
  InitialData initial;
  int snapshot_count = 21;
  /// Overrides snapshot_count when nonempty.
  std::vector<double> snapshot_times;
  std::string output_dir = "out";

  /// Throws ValidationError naming the violated invariant.
  void validate() const;

  SpatialGrid grid() const { return SpatialGrid(dim, points, box_length); }
  MultiState initial_state() const { return initial.build(grid(), phenotypes); }
  std::vector<double> snapshots() const;
  RunOptions run_options() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses config text; unknown sections or keys are errors. The result is
/// validated.
RunConfig parse_config(const std::string& text);
/// Same, from an already parsed document; sections listed in `extra` are
/// left for the caller.
RunConfig config_from_document(const toml::Document& doc, const std::set<std::string>& extra = {});
RunConfig load_config(const std::string& path);
/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// Runs the simulator for a config.
Trajectory simulate(const RunConfig& config);

std::string to_string(Profile p);
std::string to_string(GrowthKind k);

/// Reads a whole file; throws IoError with the path on failure.
std::string read_text_file(const std::string& path);

}  // namespace tgrowth
