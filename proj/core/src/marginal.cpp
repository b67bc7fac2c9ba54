#include "vinegc/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vinegc/numerics.hpp"

namespace vinegc {

EmpiricalMarginal::EmpiricalMarginal(std::span<const double> x) {
  if (x.size() < 2) {
    throw std::invalid_argument("EmpiricalMarginal: need at least 2 values");
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("EmpiricalMarginal: non-finite value");
    }
  }
  sorted_.assign(x.begin(), x.end());
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalMarginal::pit(double value) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), value);
  const double count = static_cast<double>(it - sorted_.begin());
  return num::clamp_unit(count / static_cast<double>(sorted_.size() + 1));
}

double EmpiricalMarginal::quantile(double u) const {
  const double n = static_cast<double>(sorted_.size());
  const double scaled = u * (n + 1.0);  // node i+1 maps to sorted_[i]
  if (scaled <= 1.0) return sorted_.front();
  if (scaled >= n) return sorted_.back();
  const double idx = scaled - 1.0;
  const auto lo = static_cast<std::size_t>(idx);
  const double frac = idx - static_cast<double>(lo);
  return sorted_[lo] + frac * (sorted_[lo + 1] - sorted_[lo]);
}

EmpiricalMarginal ecdf_fit(std::span<const double> x) {
  return EmpiricalMarginal(x);
}

}  // namespace vinegc
