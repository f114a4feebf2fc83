#include "tgrowth/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tgrowth/error.hpp"

namespace tgrowth {

PhenotypeSet::PhenotypeSet(int count) : count_(count) {
  if (count < 1) throw ValidationError("phenotype count must be at least 1");
}

std::vector<double> PhenotypeSet::traits() const {
  std::vector<double> a(static_cast<std::size_t>(count_));
  for (int i = 0; i < count_; ++i) a[static_cast<std::size_t>(i)] = trait(i);
  return a;
}

MultiState::MultiState(PhenotypeSet set, std::vector<Field> fields, double t)
    : phenotypes(set), densities(std::move(fields)), time(t) {
  if (static_cast<int>(densities.size()) != phenotypes.count())
    throw ValidationError("expected " + std::to_string(phenotypes.count()) + " density fields, got " +
                          std::to_string(densities.size()));
  for (const auto& f : densities)
    if (!(f.grid() == densities.front().grid()))
      throw ValidationError("density fields live on different grids");
}

MultiState::MultiState(PhenotypeSet set, const SpatialGrid& grid, double t)
    : phenotypes(set), densities(static_cast<std::size_t>(set.count()), Field(grid)), time(t) {}

void MultiState::validate() const {
  if (!(time >= 0.0)) throw ValidationError("state time must be nonnegative");
  for (const auto& f : densities)
    for (double v : f.values())
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError("densities must be finite and nonnegative");
}

void SimParams::validate() const {
  if (!(stiffness > 2.0) || !std::isfinite(stiffness))
    throw ValidationError("stiffness must exceed 2");
  if (!(viscosity >= 0.0) || !std::isfinite(viscosity))
    throw ValidationError("viscosity must be nonnegative");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon T must be positive");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ValidationError("cfl must lie in (0, 1)");
  if (!(max_dt > 0.0) || !std::isfinite(max_dt)) throw ValidationError("max_dt must be positive");
}

GrowthLaw GrowthLaw::linear(double gamma0, double gamma1, double c) {
  return {GrowthKind::linear, gamma0, gamma1, c};
}

GrowthLaw GrowthLaw::exp_decay(double gamma0, double gamma1, double c) {
  return {GrowthKind::exp_decay, gamma0, gamma1, c};
}

GrowthLaw GrowthLaw::zero() { return {GrowthKind::none, 0.0, 0.0, 0.0}; }

double GrowthLaw::operator()(double p, double a) const noexcept {
  const double base = gamma0 + gamma1 * a;
  switch (kind) {
    case GrowthKind::linear:
      return base - decay * p;
    case GrowthKind::exp_decay:
      return base * std::exp(-p) - decay * p;
    case GrowthKind::none:
      break;
  }
  return 0.0;
}

double GrowthLaw::dp(double p, double a) const noexcept {
  switch (kind) {
    case GrowthKind::linear:
      return -decay;
    case GrowthKind::exp_decay:
      return -(gamma0 + gamma1 * a) * std::exp(-p) - decay;
    case GrowthKind::none:
      break;
  }
  return 0.0;
}

double GrowthLaw::da(double p, double /*a*/) const noexcept {
  switch (kind) {
    case GrowthKind::linear:
      return gamma1;
    case GrowthKind::exp_decay:
      return gamma1 * std::exp(-p);
    case GrowthKind::none:
      break;
  }
  return 0.0;
}

double GrowthLaw::max_growth() const noexcept {
  return std::max({(*this)(0.0, 0.0), (*this)(0.0, 1.0), 0.0});
}

double GrowthLaw::max_trait_slope() const noexcept {
  return kind == GrowthKind::none ? 0.0 : std::abs(gamma1);
}

double GrowthLaw::max_rate(double p_max) const noexcept {
  // G is monotone in p and affine in the trait-dependent coefficient, so the
  // extremes sit at the corners of [0, p_max] x [0, 1].
  double m = 0.0;
  for (double p : {0.0, p_max})
    for (double a : {0.0, 1.0}) m = std::max(m, std::abs((*this)(p, a)));
  return m;
}

double GrowthLaw::max_pressure_slope(double /*p_max*/) const noexcept {
  // |dG/dp| is largest at p = 0 for both kinds.
  return std::max(std::abs(dp(0.0, 0.0)), std::abs(dp(0.0, 1.0)));
}

void GrowthLaw::validate() const {
  if (kind == GrowthKind::none) return;
  if (!std::isfinite(gamma0) || !std::isfinite(gamma1))
    throw ValidationError("growth coefficients must be finite");
  if (!(decay > 0.0) || !std::isfinite(decay))
    throw ValidationError("growth decay constant c must be positive");
  if (kind == GrowthKind::exp_decay && (gamma0 < 0.0 || gamma0 + gamma1 < 0.0))
    throw ValidationError("exp-decay growth needs gamma0 + gamma1 a >= 0 on [0, 1]");
}

Field mean_density(const MultiState& state) {
  Field nbar(state.grid());
  for (const auto& f : state.densities)
    for (std::size_t c = 0; c < nbar.size(); ++c) nbar[c] += f[c];
  const double inv = 1.0 / state.count();
  for (double& v : nbar.values()) v *= inv;
  return nbar;
}

double pressure(double nbar, double k) {
  if (!(nbar >= 0.0)) throw ValidationError("pressure law needs a nonnegative density");
  if (!(k >= 2.0)) throw ValidationError("pressure law needs k >= 2");
  return k / (k - 1.0) * std::pow(nbar, k - 1.0);
}

Field pressure(const Field& nbar, double k) {
  if (!(k >= 2.0)) throw ValidationError("pressure law needs k >= 2");
  const double scale = k / (k - 1.0);
  Field p(nbar.grid());
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (!(nbar[c] >= 0.0)) throw ValidationError("pressure law needs a nonnegative density");
    p[c] = scale * std::pow(nbar[c], k - 1.0);
  }
  return p;
}

double density_from_pressure(double p, double k) {
  return std::pow((k - 1.0) / k * std::max(p, 0.0), 1.0 / (k - 1.0));
}

std::vector<Field> fractions(const MultiState& state) {
  const auto& grid = state.grid();
  Field total(grid);
  for (const auto& f : state.densities)
    for (std::size_t c = 0; c < total.size(); ++c) total[c] += f[c];
  std::vector<Field> out;
  out.reserve(state.densities.size());
  for (const auto& f : state.densities) {
    Field frac(grid);
    for (std::size_t c = 0; c < frac.size(); ++c) frac[c] = total[c] > 0.0 ? f[c] / total[c] : 0.0;
    out.push_back(std::move(frac));
  }
  return out;
}

double growth_eval(const GrowthLaw& law, double p, double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("trait must lie in [0, 1]");
  return law(p, a);
}

Field growth_eval(const GrowthLaw& law, const Field& p, double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("trait must lie in [0, 1]");
  Field g(p.grid());
  for (std::size_t c = 0; c < g.size(); ++c) g[c] = law(p[c], a);
  return g;
}

double pressure_zero(const GrowthLaw& law, double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("trait must lie in [0, 1]");
  if (law.kind == GrowthKind::none) throw ValidationError("zero growth law has no isolated zero");
  const double g0 = law(0.0, a);
  if (law.kind == GrowthKind::linear) {
    if (g0 < 0.0) throw ValidationError("growth law has no nonnegative zero for this trait");
    return g0 / law.decay;
  }
  double lo = 0.0;
  double hi = g0 / law.decay + 1.0;
  if (!(g0 >= 0.0) || !(law(hi, a) <= 0.0))
    throw ValidationError("growth law: no sign change bracketed in [0, G(0,a)/c + 1]");
  if (g0 == 0.0) return 0.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (law(mid, a) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Field weighted_growth(const MultiState& state, const Field& p, const GrowthLaw& law) {
  const auto& grid = state.grid();
  Field num(grid);
  Field den(grid);
  for (int i = 0; i < state.count(); ++i) {
    const double a = state.phenotypes.trait(i);
    const auto& n = state.densities[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < num.size(); ++c) {
      num[c] += n[c] * law(p[c], a);
      den[c] += n[c];
    }
  }
  for (std::size_t c = 0; c < num.size(); ++c) num[c] = den[c] > 0.0 ? num[c] / den[c] : 0.0;
  return num;
}

}  // namespace tgrowth
