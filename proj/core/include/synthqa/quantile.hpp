#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "synthqa/error.hpp"

namespace synthqa {

// Quantile with linear interpolation between order statistics: position
// q * (n - 1) in the sorted sample.
inline double quantile_linear_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level outside [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile_linear(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_linear_sorted(values, q);
}

}  // namespace synthqa
