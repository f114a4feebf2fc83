#include "tgrowth/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgrowth/error.hpp"

namespace tgrowth {

namespace {

double exponent(const EntropyPair& pair) { return pair.m / (pair.k - 1.0); }

double coefficient(const EntropyPair& pair) {
  return (1.0 - 1.0 / pair.m) * std::pow((pair.k - 1.0) / pair.k, exponent(pair));
}

}  // namespace

double EntropyPair::e(double n) const noexcept { return std::pow(std::max(n, 0.0), m) / m; }

double EntropyPair::de(double n) const noexcept { return std::pow(std::max(n, 0.0), m - 1.0); }

double EntropyPair::z(double p) const noexcept {
  const double q = exponent(*this);
  return coefficient(*this) * std::pow(std::max(p, 0.0), q + 1.0) / (q + 1.0);
}

double EntropyPair::dz(double p) const noexcept {
  return coefficient(*this) * std::pow(std::max(p, 0.0), exponent(*this));
}

double EntropyPair::d2z(double p) const noexcept {
  const double q = exponent(*this);
  const double c = coefficient(*this) * q;
  if (p <= 0.0) {
    if (q > 1.0) return 0.0;
    return q == 1.0 ? c : std::numeric_limits<double>::infinity();
  }
  return c * std::pow(p, q - 1.0);
}

EntropyPair entropy_pair(double m, double k) {
  if (!(m >= 2.0)) throw ValidationError("entropy exponent m must be at least 2");
  if (!(k > 2.0)) throw ValidationError("stiffness must exceed 2");
  return {m, k};
}

}  // namespace tgrowth
