#pragma once

#include <vector>

#include "tgrowth/grid.hpp"

namespace tgrowth {

/// The N discrete traits a_i = i / N, i = 1..N.
class PhenotypeSet {
 public:
  explicit PhenotypeSet(int count);

  int count() const noexcept { return count_; }
  /// Trait of the 0-based phenotype index i, i.e. (i + 1) / N.
  double trait(int i) const noexcept { return static_cast<double>(i + 1) / count_; }
  std::vector<double> traits() const;

  bool operator==(const PhenotypeSet&) const = default;

 private:
  int count_;
};

/// The N phenotype densities at one instant.
struct MultiState {
  PhenotypeSet phenotypes;
  std::vector<Field> densities;
  double time = 0.0;

  MultiState(PhenotypeSet set, std::vector<Field> fields, double t = 0.0);
  /// All-zero state.
  MultiState(PhenotypeSet set, const SpatialGrid& grid, double t = 0.0);

  const SpatialGrid& grid() const noexcept { return densities.front().grid(); }
  int count() const noexcept { return phenotypes.count(); }

  /// Throws ValidationError on negative or nonfinite densities.
  void validate() const;
};

struct SimParams {
  double stiffness = 10.0;  ///< k, must exceed 2
  double viscosity = 0.0;   ///< nu; 0 selects the Darcy branch
  double horizon = 1.0;     ///< T
  double cfl = 0.4;
  double max_dt = 1e-3;

  void validate() const;
  bool operator==(const SimParams&) const = default;
};

enum class GrowthKind {
  linear,     ///< G = gamma0 + gamma1 a - c p
  exp_decay,  ///< G = (gamma0 + gamma1 a) exp(-p) - c p
  none,       ///< G = 0; transport-only runs, outside the model hypotheses
};

/// Trait-structured growth rate G(p, a).
struct GrowthLaw {
  GrowthKind kind = GrowthKind::linear;
  double gamma0 = 0.5;
  double gamma1 = 0.5;
  double decay = 1.0;  ///< c, the bound -dG/dp >= c

  static GrowthLaw linear(double gamma0, double gamma1, double c = 1.0);
  static GrowthLaw exp_decay(double gamma0, double gamma1, double c);
  static GrowthLaw zero();

  double operator()(double p, double a) const noexcept;
  double dp(double p, double a) const noexcept;
  double da(double p, double a) const noexcept;

  /// sup over a in [0,1] of G(0, a), clamped at 0: the growth bound in the
  /// mass estimates.
  double max_growth() const noexcept;
  /// sup over a in [0,1], p >= 0 of |dG/da|.
  double max_trait_slope() const noexcept;
  /// max |G(p, a)| over p in [0, p_max], a in [0,1].
  double max_rate(double p_max) const noexcept;
  /// max |dG/dp| over p in [0, p_max], a in [0,1].
  double max_pressure_slope(double p_max) const noexcept;

  void validate() const;
  bool operator==(const GrowthLaw&) const = default;
};

Field mean_density(const MultiState& state);

/// p = k/(k-1) nbar^{k-1}. Accepts k >= 2; rejects negative densities.
double pressure(double nbar, double k);
Field pressure(const Field& nbar, double k);

/// Inverse of the pressure law: nbar = ((k-1) p / k)^{1/(k-1)}.
double density_from_pressure(double p, double k);

/// F_i = n_i / sum_j n_j where nbar > 0, else 0.
std::vector<Field> fractions(const MultiState& state);

/// G(p, a); rejects a outside [0, 1].
double growth_eval(const GrowthLaw& law, double p, double a);
Field growth_eval(const GrowthLaw& law, const Field& p, double a);

/// Unique p* >= 0 with G(p*, a) = 0.
double pressure_zero(const GrowthLaw& law, double a);

/// sum_i F_i G(p, a_i), cellwise: the density-weighted mean growth rate.
Field weighted_growth(const MultiState& state, const Field& p, const GrowthLaw& law);

}  // namespace tgrowth
