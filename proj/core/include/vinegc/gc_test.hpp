#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vinegc/mvine.hpp"

namespace vinegc {

enum class TestVariant { full_sample, split_sample };

struct GCConfig {
  int k = 0;       // Markov order; 0 = select by AIC over 1..k_max
  int k_max = 4;
  int T0 = 0;      // first scored index (1-based); 0 = ceil(T/2)
  int N = 200;     // predictions per time point
  int B = 200;     // bootstrap replicates
  double alpha = 0.05;
  std::vector<CopulaFamily> candidates;  // empty = all families
  std::uint64_t seed = 1;
  TestVariant variant = TestVariant::full_sample;
  unsigned workers = 1;
};

struct ModelSummary {
  int d = 0;
  int k = 0;
  double loglik = 0.0;
  double aic = 0.0;
  int n_params = 0;
  std::pair<int, int> fit_window{0, 0};
};

struct GCTestResult {
  double statistic = 0.0;
  std::vector<double> null_stats;
  double p_value = 1.0;
  bool reject = false;
  int k_used = 1;
  int b_effective = 0;
  bool b_reduced = false;  // replicates lost to fit failures after one retry
  ModelSummary model_x, model_xy;
  GCConfig config;
};

// Part A: the log-ratio of restricted to unrestricted summed squared
// prediction errors over t = T0..T, with conditional means estimated by the
// empirical mean of N simulated predictions per time point. Prediction
// sub-streams derive from (seed, t), so the value is independent of any
// evaluation order.
double gc_statistic(std::span<const double> x, std::span<const double> y,
                    const MVineModel& model_x, const MVineModel& model_xy,
                    const GCConfig& cfg, std::uint64_t seed);

// Part B: B statistics computed on null paths generated from the fitted
// first-tree copulas, refitting both models per path with the same k and
// candidate set. Failed replicates are retried once, then dropped (flagged
// through the b_reduced/b_effective fields of mvine_test).
struct NullDistribution {
  std::vector<double> stats;
  int requested = 0;
  int failed = 0;
};
NullDistribution null_distribution(const MVineModel& model_xy, std::size_t T,
                                   const GCConfig& cfg, std::uint64_t seed);

// The full test of "Y Granger-causes X": resolves k, fits both models on the
// variant's window, computes the statistic and its bootstrap null
// distribution, and assembles the rank-based p-value.
GCTestResult mvine_test(std::span<const double> x, std::span<const double> y,
                        const GCConfig& cfg);

// Structured text report of one test result (stable field order, versioned).
std::string format_result(const GCTestResult& result);

}  // namespace vinegc
