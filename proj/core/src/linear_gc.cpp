#include "vinegc/linear_gc.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vinegc {

OlsResult ols(const std::vector<std::vector<double>>& design_columns,
              std::span<const double> response) {
  const std::size_t ncol = design_columns.size();
  const std::size_t nrow = response.size();
  if (ncol == 0 || nrow < ncol) {
    throw std::invalid_argument("ols: need rows >= columns >= 1");
  }
  Eigen::MatrixXd X(nrow, ncol);
  for (std::size_t c = 0; c < ncol; ++c) {
    if (design_columns[c].size() != nrow) {
      throw std::invalid_argument("ols: ragged design matrix");
    }
    for (std::size_t r = 0; r < nrow; ++r) X(r, c) = design_columns[c][r];
  }
  Eigen::VectorXd yv(nrow);
  for (std::size_t r = 0; r < nrow; ++r) yv(r) = response[r];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(ncol)) {
    // Identify an offending column: the first one dropped by the pivoting.
    const auto perm = qr.colsPermutation().indices();
    const int bad = perm(qr.rank());
    throw std::runtime_error("ols: design is rank deficient at column " +
                             std::to_string(bad));
  }
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - X * beta;

  OlsResult out;
  out.coefficients.assign(beta.data(), beta.data() + beta.size());
  out.residuals.assign(resid.data(), resid.data() + resid.size());
  out.rss = resid.squaredNorm();
  return out;
}

double chi_square_upper_tail(double value, int df) {
  if (df < 1) throw std::invalid_argument("chi_square_upper_tail: df >= 1");
  if (value <= 0.0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, value));
}

namespace {

struct LagDesign {
  std::vector<std::vector<double>> restricted;    // intercept + x lags
  std::vector<std::vector<double>> unrestricted;  // + y lags
  std::vector<double> response;
};

LagDesign build_designs(std::span<const double> x, std::span<const double> y,
                        int p) {
  const int T = static_cast<int>(x.size());
  const int n = T - p;
  LagDesign d;
  d.response.assign(x.begin() + p, x.end());
  d.restricted.emplace_back(n, 1.0);  // intercept
  for (int j = 1; j <= p; ++j) {
    std::vector<double> lag(n);
    for (int t = 0; t < n; ++t) lag[t] = x[t + p - j];
    d.restricted.push_back(std::move(lag));
  }
  d.unrestricted = d.restricted;
  for (int j = 1; j <= p; ++j) {
    std::vector<double> lag(n);
    for (int t = 0; t < n; ++t) lag[t] = y[t + p - j];
    d.unrestricted.push_back(std::move(lag));
  }
  return d;
}

LinearGCResult run_test(std::span<const double> x, std::span<const double> y,
                        int p) {
  const LagDesign d = build_designs(x, y, p);
  const OlsResult restricted = ols(d.restricted, d.response);
  const OlsResult unrestricted = ols(d.unrestricted, d.response);

  LinearGCResult out;
  out.p = p;
  out.rss0 = restricted.rss;
  out.rss1 = unrestricted.rss;
  out.restricted_coefficients = restricted.coefficients;
  out.unrestricted_coefficients = unrestricted.coefficients;
  const double T = static_cast<double>(d.response.size());
  out.statistic =
      (out.rss1 > 0.0) ? std::max(0.0, T * (out.rss0 - out.rss1) / out.rss1)
                       : 0.0;
  out.p_value = (out.rss1 > 0.0 && out.rss0 > out.rss1)
                    ? chi_square_upper_tail(out.statistic, p)
                    : 1.0;
  return out;
}

}  // namespace

LinearGCResult granger_linear(std::span<const double> x,
                              std::span<const double> y, int p_lags,
                              int max_auto_lag) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("granger_linear: series lengths differ");
  }
  const int T = static_cast<int>(x.size());
  if (p_lags < 0) throw std::invalid_argument("granger_linear: p must be > 0");

  int p = p_lags;
  if (p == 0) {
    // Minimum-AIC lag on the unrestricted regression, ties toward smaller p.
    double best_aic = std::numeric_limits<double>::infinity();
    for (int cand = 1; cand <= max_auto_lag; ++cand) {
      if (T <= 2 * cand + 2) break;
      const LagDesign d = build_designs(x, y, cand);
      const OlsResult fit = ols(d.unrestricted, d.response);
      const double n = static_cast<double>(d.response.size());
      const double aic =
          n * std::log(fit.rss / n) + 2.0 * (2.0 * cand + 1.0);
      if (aic < best_aic) {
        best_aic = aic;
        p = cand;
      }
    }
    if (p == 0) {
      throw std::invalid_argument("granger_linear: series too short");
    }
  }
  if (T <= 2 * p + 2) {
    throw std::invalid_argument("granger_linear: need T > 2p + 2");
  }
  return run_test(x, y, p);
}

}  // namespace vinegc
