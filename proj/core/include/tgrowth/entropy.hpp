#pragma once

namespace tgrowth {

/// Convex pair e(n) = n^m / m and z with n e'(n) - e(n) = z'(Pi_k(n)).
///
/// With q = m / (k - 1) and s = (k - 1) / k:
///   z'(p)  = (1 - 1/m) s^q p^q
///   z''(p) = (1 - 1/m) q s^q p^(q-1)
///   z(p)   = (1 - 1/m) s^q p^(q+1) / (q + 1)
/// Choosing m = k + 1 gives e(n) = n^(k+1) / (k+1).
struct EntropyPair {
  double m;
  double k;

  double e(double n) const noexcept;
  double de(double n) const noexcept;
  double z(double p) const noexcept;
  double dz(double p) const noexcept;
  double d2z(double p) const noexcept;
};

/// Rejects m < 2 and k <= 2.
EntropyPair entropy_pair(double m, double k);

}  // namespace tgrowth
