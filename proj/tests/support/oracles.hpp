// Test-only oracles, kept independent of the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "vinegc/copula.hpp"

namespace oracle {

// Composite Simpson integration (independent of the library quadrature).
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int panels = 512) {
  const double h = (b - a) / (2 * panels);
  double acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) {
    acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

// Chi-square(1) upper tail via the complementary error function; a closed
// form independent of the incomplete-gamma route used by the library.
inline double chi2_1_upper(double x) {
  return std::erfc(std::sqrt(x / 2.0));
}

// Chi-square upper tail for small integer df by explicit series:
// df even: Q = exp(-x/2) sum_{j<df/2} (x/2)^j / j!.
// df odd:  reduce to erfc plus the finite series.
inline double chi2_upper(double x, int df) {
  if (x <= 0.0) return 1.0;
  if (df % 2 == 0) {
    const double half = x / 2.0;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < df / 2; ++j) {
      term *= half / j;
      sum += term;
    }
    return std::exp(-half) * sum;
  }
  // odd df: Q_{df}(x) = Q_1(x) + 2 phi(sqrt(x)) sum_{j=1}^{(df-1)/2}
  //   x^{j-1/2} / (1 3 5 ... (2j-1))
  double q = chi2_1_upper(x);
  const double root = std::sqrt(x);
  const double phi = std::exp(-x / 2.0) / std::sqrt(2.0 * M_PI);
  double term = 1.0;
  double acc = 0.0;
  for (int j = 1; j <= (df - 1) / 2; ++j) {
    term *= x / (2.0 * j - 1.0);
    acc += term / root;
  }
  return q + 2.0 * phi * acc;
}

// Kolmogorov-Smirnov uniformity test p-value (asymptotic series).
inline double ks_uniform_pvalue(std::vector<double> p) {
  const std::size_t n = p.size();
  if (n < 5) throw std::invalid_argument("ks: need at least 5 points");
  std::sort(p.begin(), p.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(p[i] - lo), std::abs(p[i] - hi)});
  }
  const double lambda = (std::sqrt(double(n)) + 0.12 + 0.11 / std::sqrt(double(n))) * d;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    sum += ((j % 2) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Standard error of a one-parameter MLE from the numeric observed
// information of the pooled log-likelihood.
inline double mle_se(const std::function<double(double)>& loglik,
                     double theta_hat, double h = 1e-4) {
  const double d2 = (loglik(theta_hat + h) - 2.0 * loglik(theta_hat) +
                     loglik(theta_hat - h)) /
                    (h * h);
  if (d2 >= 0.0) throw std::runtime_error("mle_se: not a maximum");
  return 1.0 / std::sqrt(-d2);
}

// Forward sampler for the five-class k=1 bivariate M-vine on the copula
// scale, written directly from the pair-copula conditional cascade; used to
// simulate ground-truth data for fit-recovery checks.
struct MVineK1Truth {
  vinegc::PairCopula cross;   // (X_t, Y_t)
  vinegc::PairCopula serial;  // (X_t, X_{t+1})
  vinegc::PairCopula ma;      // (Y_t, X_{t+1} | X_t)
  vinegc::PairCopula mb;      // (X_t, Y_{t+1} | X_{t+1})
  vinegc::PairCopula deep;    // (Y_t, Y_{t+1} | X_t, X_{t+1})

  std::pair<std::vector<double>, std::vector<double>> sample(
      std::size_t T, std::mt19937_64& rng) const {
    using vinegc::hfunc;
    using vinegc::hinv;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> u(T), v(T);
    u[0] = unif(rng);
    v[0] = hinv(cross, unif(rng), u[0], 1);
    for (std::size_t t = 0; t + 1 < T; ++t) {
      // X_{t+1} | (X_t, Y_t)
      const double a_ma = hfunc(cross, {u[t], v[t]}, 1);  // C_{Y|X}
      const double z = hinv(ma, unif(rng), a_ma, 1);
      u[t + 1] = hinv(serial, z, u[t], 1);
      // Y_{t+1} | (X_t, Y_t, X_{t+1})
      const double b_ma = hfunc(serial, {u[t], u[t + 1]}, 1);  // C_{X+|X}
      const double first_deep = hfunc(ma, {a_ma, b_ma}, 2);    // C_{Y|X,X+}
      const double a_mb = hfunc(serial, {u[t], u[t + 1]}, 2);  // C_{X|X+}
      const double z1 = hinv(deep, unif(rng), first_deep, 1);
      const double z2 = hinv(mb, z1, a_mb, 1);
      v[t + 1] = hinv(cross, z2, u[t + 1], 1);
    }
    return {std::move(u), std::move(v)};
  }
};

}  // namespace oracle
