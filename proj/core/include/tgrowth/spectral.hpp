#pragma once

#include <memory>
#include <vector>

#include "tgrowth/grid.hpp"

namespace tgrowth {

/// Real-to-complex transform plans and wavenumber tables for one grid.
///
/// Immutable after construction. Every transform allocates its own scratch
/// buffers, so a single plan may be shared by concurrent callers.
class SpectralPlan {
 public:
  explicit SpectralPlan(const SpatialGrid& grid);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;
  SpectralPlan(SpectralPlan&&) noexcept;
  SpectralPlan& operator=(SpectralPlan&&) noexcept;

  const SpatialGrid& grid() const noexcept { return grid_; }
  /// Number of stored half-spectrum modes.
  std::size_t mode_count() const noexcept { return wave_sq_.size(); }
  /// |xi|^2 per stored mode; zero mode first.
  const std::vector<double>& wave_sq() const noexcept { return wave_sq_; }

  /// Largest amplification over the modes of the face-averaged upwind
  /// transport operator applied to (I - nu Laplacian)^{-1}; the diffusive
  /// stiffness of the pressure-driven flux is (k - 1) p times this.
  double transport_symbol_bound(double nu) const noexcept;

  // Internal helpers shared by the free functions below.
  struct Impl;
  const Impl& impl() const noexcept { return *impl_; }

 private:
  SpatialGrid grid_;
  std::vector<double> wave_sq_;
  std::unique_ptr<Impl> impl_;
};

/// Solves (I - nu Laplacian) W = p. For nu == 0 returns p unchanged.
Field solve_w(const Field& p, double nu, const SpectralPlan& plan);

/// W - nu Laplacian(W) with the same spectral Laplacian.
Field apply_operator(const Field& w, double nu, const SpectralPlan& plan);

/// Spectral partial derivatives, one field per axis. The Nyquist mode is
/// dropped along the differentiated axis.
std::vector<Field> gradient(const Field& w, const SpectralPlan& plan);

/// Spectral Laplacian.
Field laplacian(const Field& w, const SpectralPlan& plan);

/// Gaussian smoothing of the given width, applied as exp(-width^2 |xi|^2 / 2).
Field mollify(const Field& f, double width, const SpectralPlan& plan);

/// Pointwise Euclidean norm of a gradient.
Field gradient_magnitude(const std::vector<Field>& grad);

}  // namespace tgrowth
