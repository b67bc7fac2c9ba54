#pragma once

#include <span>
#include <vector>

namespace vinegc {

struct OlsResult {
  std::vector<double> coefficients;
  std::vector<double> residuals;
  double rss = 0.0;
};

// Least squares via column-pivoted QR; throws std::runtime_error naming the
// first rank-deficient column.
OlsResult ols(const std::vector<std::vector<double>>& design_columns,
              std::span<const double> response);

struct LinearGCResult {
  int p = 0;             // lag order used
  double statistic = 0.0;  // S = T (RSS0 - RSS1) / RSS1
  double p_value = 1.0;    // upper tail of chi-square(p)
  double rss0 = 0.0;       // restricted (X lags only)
  double rss1 = 0.0;       // unrestricted (X and Y lags)
  std::vector<double> restricted_coefficients;
  std::vector<double> unrestricted_coefficients;
};

// Tests "Y Granger-causes X" with the asymptotic chi-square statistic from
// OLS autoregressions on the common effective sample t = p+1..T.
// p_lags = 0 selects the lag by minimum AIC over 1..max_auto_lag.
LinearGCResult granger_linear(std::span<const double> x,
                              std::span<const double> y, int p_lags,
                              int max_auto_lag = 10);

// Upper-tail probability of the chi-square distribution with df degrees of
// freedom (the reference distribution of the statistic above).
double chi_square_upper_tail(double value, int df);

}  // namespace vinegc
