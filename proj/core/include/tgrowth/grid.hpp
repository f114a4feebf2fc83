#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace tgrowth {

/// Uniform periodic grid on the box [-L/2, L/2)^d, d in {1, 2}.
///
/// Cells are stored row-major: for d = 2 the flat index is i0 * n + i1, with
/// axis 0 varying slowest. Cell centres sit at -L/2 + (i + 1/2) h.
class SpatialGrid {
 public:
  SpatialGrid(int dim, int points_per_axis, double box_length);

  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return points_; }
  double box_length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / points_; }
  double cell_volume() const noexcept;
  std::size_t cell_count() const noexcept;

  /// Centre coordinate of index i along any axis.
  double axis_coordinate(int i) const noexcept { return -0.5 * length_ + (i + 0.5) * spacing(); }
  /// Per-axis indices of a flat cell index (unused axes are 0).
  std::array<int, 2> indices(std::size_t cell) const noexcept;
  std::array<double, 2> centre(std::size_t cell) const noexcept;

  bool operator==(const SpatialGrid&) const = default;

 private:
  int dim_;
  int points_;
  double length_;
};

/// Scalar function sampled at the cell centres of a SpatialGrid.
class Field {
 public:
  explicit Field(SpatialGrid grid, double fill = 0.0);
  Field(SpatialGrid grid, std::vector<double> values);

  const SpatialGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& raw() noexcept { return values_; }
  const std::vector<double>& raw() const noexcept { return values_; }

  bool all_finite() const noexcept;

  bool operator==(const Field&) const = default;

 private:
  SpatialGrid grid_;
  std::vector<double> values_;
};

// Cell-sum quadratures (sum of value * cell volume).
double integral(const Field& f);
double norm_l1(const Field& f);
double norm_l2(const Field& f);
double norm_linf(const Field& f);
double max_value(const Field& f);
double min_value(const Field& f);

/// Pointwise a - b; grids must match.
Field difference(const Field& a, const Field& b);

/// Minimal-image displacement x - c along one axis of a periodic box.
double periodic_offset(double x, double c, double box_length) noexcept;

}  // namespace tgrowth
