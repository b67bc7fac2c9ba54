#include "vinegc/numerics.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>

namespace vinegc::num {

Quadrature gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const int m = (n + 1) / 2;
  const double xm = 0.5 * (b + a);
  const double xl = 0.5 * (b - a);
  for (int i = 0; i < m; ++i) {
    // Newton iteration on the Legendre polynomial, Chebyshev start.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    q.nodes[i] = xm - xl * z;
    q.nodes[n - 1 - i] = xm + xl * z;
    q.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    q.weights[n - 1 - i] = q.weights[i];
  }
  return q;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

double norm_quantile(double p) {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::quantile(dist, p);
}

namespace {

// Gauss-Legendre abscissae/weights used by the Genz BVN algorithm.
constexpr std::array<double, 3> gl6_x = {0.9324695142031522,
                                         0.6612093864662647,
                                         0.2386191860831970};
constexpr std::array<double, 3> gl6_w = {0.1713244923791705,
                                         0.3607615730481384,
                                         0.4679139345726904};
constexpr std::array<double, 6> gl12_x = {0.9815606342467191, 0.9041172563704750,
                                          0.7699026741943050, 0.5873179542866171,
                                          0.3678314989981802, 0.1252334085114692};
constexpr std::array<double, 6> gl12_w = {0.04717533638651177, 0.1069393259953183,
                                          0.1600783285433464,  0.2031674267230659,
                                          0.2334925365383547,  0.2491470458134029};
constexpr std::array<double, 10> gl20_x = {
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
    0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
    0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
    0.07652652113349733};
constexpr std::array<double, 10> gl20_w = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
    0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
    0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
    0.1527533871307259};

// Genz's BVND: P(X > dh, Y > dk) for standard bivariate normal.
double bvn_upper(double dh, double dk, double r) {
  const double tp = 2.0 * M_PI;
  double h = dh, k = dk, hk = h * k;
  double bvn = 0.0;

  const double* xs = gl20_x.data();
  const double* ws = gl20_w.data();
  int ng = 10;
  if (std::abs(r) < 0.3) {
    xs = gl6_x.data(); ws = gl6_w.data(); ng = 3;
  } else if (std::abs(r) < 0.75) {
    xs = gl12_x.data(); ws = gl12_w.data(); ng = 6;
  }

  if (std::abs(r) < 0.925) {
    if (std::abs(r) > 0.0) {
      const double hs = 0.5 * (h * h + k * k);
      const double asr = 0.5 * std::asin(r);
      for (int i = 0; i < ng; ++i) {
        for (int pm : {-1, 1}) {
          const double sn = std::sin(asr * (1.0 + pm * xs[i]));
          bvn += ws[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn = bvn * asr / tp;
    }
    bvn += norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::abs(r) < 1.0) {
      const double as = (1.0 - r) * (1.0 + r);
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      const double asr = -0.5 * (bs / as + hk);
      double series = 0.0;
      if (asr > -100.0) {
        series = a * std::exp(asr) *
                 (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      }
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * norm_cdf(-b / a);
        series -=
            std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a *= 0.5;
      double quad = 0.0;
      for (int i = 0; i < ng; ++i) {
        for (int pm : {-1, 1}) {
          const double x = a * (1.0 + pm * xs[i]);
          const double xsq = x * x;
          const double asr2 = -0.5 * (bs / xsq + hk);
          if (asr2 > -100.0) {
            const double rs = std::sqrt(1.0 - xsq);
            const double sp2 = 1.0 + c * xsq * (1.0 + 5.0 * d * xsq);
            const double ep =
                std::exp(-0.5 * hk * xsq / ((1.0 + rs) * (1.0 + rs))) / rs;
            quad += a * ws[i] * std::exp(asr2) * (sp2 - ep);
          }
        }
      }
      bvn = (quad - series) / tp;
    }
    if (r > 0.0) {
      bvn += norm_cdf(-std::max(h, k));
    } else {
      bvn = -bvn;
      if (k > h) {
        bvn += norm_cdf(k) - norm_cdf(h);
      }
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bvn_cdf(double x, double y, double rho) {
  if (rho >= 1.0) return norm_cdf(std::min(x, y));
  if (rho <= -1.0) {
    return std::max(0.0, norm_cdf(x) + norm_cdf(y) - 1.0);
  }
  return bvn_upper(-x, -y, rho);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) {
    throw std::invalid_argument("kendall_tau: need two equal series, n >= 2");
  }
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = (x[i] - x[j]) * (y[i] - y[j]);
      if (s > 0.0) ++concordant;
      else if (s < 0.0) ++discordant;
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(concordant - discordant) / pairs;
}

std::uint64_t mix_seed(std::uint64_t seed,
                       std::initializer_list<std::uint64_t> path) {
  auto splitmix = [](std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t state = seed;
  std::uint64_t out = splitmix(state);
  for (std::uint64_t id : path) {
    state ^= splitmix(state) + id;
    out = splitmix(state);
  }
  return out;
}

}  // namespace vinegc::num
