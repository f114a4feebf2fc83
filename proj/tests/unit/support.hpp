#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "tgrowth/config.hpp"
#include "tgrowth/grid.hpp"

namespace testing {

inline tgrowth::Field random_field(const tgrowth::SpatialGrid& g, std::uint64_t seed, double lo = 0.0,
                                   double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  tgrowth::Field f(g);
  for (double& v : f.values()) v = u(rng);
  return f;
}

/// Fresh directory under the test working directory.
inline std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::current_path() / "unit-scratch" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Small, fast variant of the default Gaussian run.
inline tgrowth::RunConfig small_config() {
  tgrowth::RunConfig c;
  c.points = 128;
  c.phenotypes = 4;
  c.params.horizon = 0.5;
  c.snapshot_count = 11;
  return c;
}

}  // namespace testing
