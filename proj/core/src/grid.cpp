#include "tgrowth/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tgrowth/error.hpp"

namespace tgrowth {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

SpatialGrid::SpatialGrid(int dim, int points_per_axis, double box_length)
    : dim_(dim), points_(points_per_axis), length_(box_length) {
  if (dim != 1 && dim != 2) throw ValidationError("grid dimension must be 1 or 2");
  if (points_per_axis < 8 || !is_power_of_two(points_per_axis))
    throw ValidationError("points per axis must be a power of two and at least 8, got " +
                          std::to_string(points_per_axis));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw ValidationError("box length must be positive");
}

double SpatialGrid::cell_volume() const noexcept {
  const double h = spacing();
  return dim_ == 1 ? h : h * h;
}

std::size_t SpatialGrid::cell_count() const noexcept {
  const auto n = static_cast<std::size_t>(points_);
  return dim_ == 1 ? n : n * n;
}

std::array<int, 2> SpatialGrid::indices(std::size_t cell) const noexcept {
  if (dim_ == 1) return {static_cast<int>(cell), 0};
  const auto n = static_cast<std::size_t>(points_);
  return {static_cast<int>(cell / n), static_cast<int>(cell % n)};
}

std::array<double, 2> SpatialGrid::centre(std::size_t cell) const noexcept {
  const auto idx = indices(cell);
  return {axis_coordinate(idx[0]), dim_ == 2 ? axis_coordinate(idx[1]) : 0.0};
}

Field::Field(SpatialGrid grid, double fill) : grid_(grid), values_(grid.cell_count(), fill) {}

Field::Field(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count())
    throw ValidationError("field length " + std::to_string(values_.size()) +
                          " does not match cell count " + std::to_string(grid_.cell_count()));
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double integral(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double norm_l1(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += std::abs(v);
  return s * f.grid().cell_volume();
}

double norm_l2(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.grid().cell_volume());
}

double norm_linf(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_value(const Field& f) { return *std::max_element(f.raw().begin(), f.raw().end()); }
double min_value(const Field& f) { return *std::min_element(f.raw().begin(), f.raw().end()); }

Field difference(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw ValidationError("field grids differ");
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

double periodic_offset(double x, double c, double box_length) noexcept {
  double d = x - c;
  d -= box_length * std::round(d / box_length);
  return d;
}

}  // namespace tgrowth
