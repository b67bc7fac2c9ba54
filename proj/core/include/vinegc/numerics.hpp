#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vinegc::num {

// Clamping floor/ceiling for arguments that must stay strictly inside (0,1).
inline constexpr double unit_eps = 1e-10;

inline double clamp_unit(double x) {
  if (x < unit_eps) return unit_eps;
  if (x > 1.0 - unit_eps) return 1.0 - unit_eps;
  return x;
}

// Bounded derivative-free minimisation (Brent's localmin).
// Returns the argmin of f on [a, b].
template <class F>
double brent_minimize(F&& f, double a, double b, double tol = 1e-8,
                      int max_iter = 200) {
  constexpr double golden = 0.3819660112501051;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0.0, q = 0.0, r = 0.0;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        parabolic = true;
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

// Bracketed root finding by Illinois-type regula falsi with bisection
// safeguards. f(lo) and f(hi) must have opposite signs (or a bound is
// returned). Throws std::runtime_error when max_iter is exhausted.
template <class F>
double find_root_bracketed(F&& f, double lo, double hi, double ftol = 1e-10,
                           int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (std::abs(flo) <= ftol) return lo;
  if (std::abs(fhi) <= ftol) return hi;
  if (flo * fhi > 0.0) {
    // No sign change: the target lies outside the representable bracket.
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
  }
  double x = lo;
  int side = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double denom = fhi - flo;
    x = (std::abs(denom) > 0.0) ? (lo * fhi - hi * flo) / denom
                                : 0.5 * (lo + hi);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (std::abs(fx) <= ftol || hi - lo <= 1e-15 * (1.0 + std::abs(x))) {
      return x;
    }
    if (fx * flo < 0.0) {
      hi = x; fhi = fx;
      if (side == -1) flo *= 0.5;  // Illinois reduction
      side = -1;
    } else {
      lo = x; flo = fx;
      if (side == 1) fhi *= 0.5;
      side = 1;
    }
  }
  throw std::runtime_error("find_root_bracketed: no convergence after max_iter");
}

// Gauss-Legendre nodes and weights on [a, b].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre(int n, double a = 0.0, double b = 1.0);

// Standard normal distribution pieces.
double norm_cdf(double x);
double norm_quantile(double p);
double norm_pdf(double x);

// Bivariate standard normal CDF P(X <= x, Y <= y) with correlation rho.
// Drezner-Wesolowsky/Genz hybrid, absolute accuracy ~5e-16.
double bvn_cdf(double x, double y, double rho);

// Kendall's tau (tau-a, concordance counting).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Deterministic sub-stream derivation: hashes a seed and a path of stream
// identifiers into an independent 64-bit generator state (splitmix64 chain).
std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

inline std::mt19937_64 substream(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(mix_seed(seed, path));
}

}  // namespace vinegc::num
