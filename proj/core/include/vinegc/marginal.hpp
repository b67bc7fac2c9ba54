#pragma once

#include <span>
#include <vector>

namespace vinegc {

// Rank-based empirical marginal: probability integral transform with the
// T+1 denominator, and a piecewise-linear interpolated inverse through the
// points (i/(n+1), x_(i)). Immutable after construction.
class EmpiricalMarginal {
 public:
  EmpiricalMarginal() = default;
  explicit EmpiricalMarginal(std::span<const double> x);

  // (#{t : x_t <= value}) / (n+1), clamped to [1e-10, 1 - 1e-10] so results
  // are usable as copula coordinates.
  double pit(double value) const;

  // Interpolated inverse of the step ecdf; u outside [1/(n+1), n/(n+1)]
  // clamps to the extreme order statistics (no extrapolation).
  double quantile(double u) const;

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted_values() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

EmpiricalMarginal ecdf_fit(std::span<const double> x);

}  // namespace vinegc
