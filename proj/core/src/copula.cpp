#include "vinegc/copula.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace vinegc {

namespace {

using num::clamp_unit;
using num::unit_eps;

double t_cdf(double x, double nu) {
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::cdf(dist, x);
}

double t_quantile(double p, double nu) {
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::quantile(dist, p);
}

double t_logpdf_const(double nu) {
  // log of Gamma((nu+1)/2) / (Gamma(nu/2) sqrt(nu pi))
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI);
}

}  // namespace

int param_count(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::independence: return 0;
    case CopulaFamily::student_t: return 2;
    default: return 1;
  }
}

bool is_rotatable(CopulaFamily f) {
  return f == CopulaFamily::clayton || f == CopulaFamily::gumbel ||
         f == CopulaFamily::joe;
}

std::string_view family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::gaussian: return "gaussian";
    case CopulaFamily::student_t: return "student_t";
    case CopulaFamily::clayton: return "clayton";
    case CopulaFamily::gumbel: return "gumbel";
    case CopulaFamily::frank: return "frank";
    case CopulaFamily::joe: return "joe";
  }
  return "unknown";
}

std::optional<CopulaFamily> family_from_name(std::string_view name) {
  for (CopulaFamily f :
       {CopulaFamily::independence, CopulaFamily::gaussian,
        CopulaFamily::student_t, CopulaFamily::clayton, CopulaFamily::gumbel,
        CopulaFamily::frank, CopulaFamily::joe}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

std::span<const CopulaFamily> all_families() {
  static constexpr std::array<CopulaFamily, 7> fams = {
      CopulaFamily::independence, CopulaFamily::gaussian,
      CopulaFamily::student_t,    CopulaFamily::clayton,
      CopulaFamily::gumbel,       CopulaFamily::frank,
      CopulaFamily::joe};
  return fams;
}

namespace {

void validate_theta(CopulaFamily f, const std::vector<double>& th) {
  const int want = param_count(f);
  if (static_cast<int>(th.size()) != want) {
    throw std::invalid_argument("PairCopula: wrong parameter count for " +
                                std::string(family_name(f)));
  }
  for (double v : th) {
    if (!std::isfinite(v)) {
      throw std::domain_error("PairCopula: non-finite parameter");
    }
  }
  switch (f) {
    case CopulaFamily::independence:
      break;
    case CopulaFamily::gaussian:
      if (!(th[0] > -1.0 && th[0] < 1.0)) {
        throw std::domain_error("gaussian: rho must lie in (-1, 1)");
      }
      break;
    case CopulaFamily::student_t:
      if (!(th[0] > -1.0 && th[0] < 1.0)) {
        throw std::domain_error("student_t: rho must lie in (-1, 1)");
      }
      if (!(th[1] > 2.0 && th[1] <= 50.0)) {
        throw std::domain_error("student_t: nu must lie in (2, 50]");
      }
      break;
    case CopulaFamily::clayton:
      if (!(th[0] > 0.0 && th[0] <= 28.0)) {
        throw std::domain_error("clayton: theta must lie in (0, 28]");
      }
      break;
    case CopulaFamily::gumbel:
      if (!(th[0] >= 1.0 && th[0] <= 17.0)) {
        throw std::domain_error("gumbel: theta must lie in [1, 17]");
      }
      break;
    case CopulaFamily::frank:
      if (th[0] == 0.0 || !(std::abs(th[0]) <= 35.0)) {
        throw std::domain_error("frank: theta must lie in [-35, 35] \\ {0}");
      }
      break;
    case CopulaFamily::joe:
      if (!(th[0] > 1.0 && th[0] <= 30.0)) {
        throw std::domain_error("joe: theta must lie in (1, 30]");
      }
      break;
  }
}

}  // namespace

PairCopula::PairCopula(CopulaFamily family, std::vector<double> theta,
                       Rotation rotation)
    : family_(family), theta_(std::move(theta)), rotation_(rotation) {
  validate_theta(family_, theta_);
  if (rotation_ != Rotation::deg0 && !is_rotatable(family_)) {
    throw std::invalid_argument(
        "PairCopula: rotations apply only to asymmetric families");
  }
}

// ---------------------------------------------------------------------------
// Base (unrotated) family implementations. All are exchangeable, so the
// which=2 variants reduce to argument swaps; rotations are applied on top.
// ---------------------------------------------------------------------------

namespace {

struct View {
  CopulaFamily fam;
  double th0 = 0.0;
  double th1 = 0.0;
  Rotation rot = Rotation::deg0;
};

// Frank with negative parameter is evaluated as the 270-degree reflection of
// Frank(|theta|); that keeps the stable positive-parameter code path.
View resolve(const PairCopula& c) {
  View v;
  v.fam = c.family();
  v.rot = c.rotation();
  if (!c.theta().empty()) v.th0 = c.theta()[0];
  if (c.theta().size() > 1) v.th1 = c.theta()[1];
  if (v.fam == CopulaFamily::frank && v.th0 < 0.0) {
    v.th0 = -v.th0;
    v.rot = Rotation::deg270;
  }
  return v;
}

double base_logpdf(const View& c, double u, double v) {
  switch (c.fam) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian: {
      const double r = c.th0;
      const double q = (1.0 - r) * (1.0 + r);
      const double x = num::norm_quantile(u);
      const double y = num::norm_quantile(v);
      return -0.5 * std::log(q) -
             (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * q);
    }
    case CopulaFamily::student_t: {
      const double r = c.th0, nu = c.th1;
      const double q = (1.0 - r) * (1.0 + r);
      const double x = t_quantile(u, nu);
      const double y = t_quantile(v, nu);
      const double lc = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                        2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(q);
      return lc +
             0.5 * (nu + 1.0) *
                 (std::log1p(x * x / nu) + std::log1p(y * y / nu)) -
             0.5 * (nu + 2.0) *
                 std::log1p((x * x - 2.0 * r * x * y + y * y) / (nu * q));
    }
    case CopulaFamily::clayton: {
      const double th = c.th0;
      const double lu = std::log(u), lv = std::log(v);
      const double A = -th * lu, B = -th * lv;
      const double M = std::max(A, B);
      const double S =
          M + std::log(std::exp(A - M) + std::exp(B - M) - std::exp(-M));
      return std::log1p(th) - (th + 1.0) * (lu + lv) - (2.0 + 1.0 / th) * S;
    }
    case CopulaFamily::gumbel: {
      const double th = c.th0;
      const double au = -std::log(u), av = -std::log(v);
      const double A = th * std::log(au), B = th * std::log(av);
      const double M = std::max(A, B);
      const double logS = M + std::log(std::exp(A - M) + std::exp(B - M));
      const double S_pow = std::exp(logS / th);  // S^{1/th}
      return -S_pow + (th - 1.0) * (std::log(au) + std::log(av)) + au + av +
             (1.0 / th - 2.0) * logS + std::log(S_pow + th - 1.0);
    }
    case CopulaFamily::frank: {
      const double th = c.th0;
      if (th < 1e-8) return 0.0;
      const double eu = std::exp(-th * u), ev = std::exp(-th * v);
      const double pos = eu * (-std::expm1(-th * v)) +
                         ev * (-std::expm1(-th * (1.0 - v)));
      return std::log(th) + std::log(-std::expm1(-th)) - th * (u + v) -
             2.0 * std::log(pos);
    }
    case CopulaFamily::joe: {
      const double th = c.th0;
      const double lp = std::log1p(-u), lq = std::log1p(-v);
      const double pth = std::exp(th * lp), qth = std::exp(th * lq);
      const double A = pth + qth * (1.0 - pth);
      return (1.0 / th - 2.0) * std::log(A) + (th - 1.0) * (lp + lq) +
             std::log(th - 1.0 + A);
    }
  }
  return 0.0;
}

double base_h1(const View& c, double u, double v);

double base_cdf(const View& c, double u, double v) {
  switch (c.fam) {
    case CopulaFamily::independence:
      return u * v;
    case CopulaFamily::gaussian:
      return num::bvn_cdf(num::norm_quantile(u), num::norm_quantile(v), c.th0);
    case CopulaFamily::student_t: {
      // No elementary closed form: integrate the conditional cdf over the
      // first coordinate.
      auto integrand = [&](double s) { return base_h1(c, s, v); };
      double err = 0.0;
      const double val =
          boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
              integrand, 0.0, u, 12, 1e-13, &err);
      return std::clamp(val, 0.0, 1.0);
    }
    case CopulaFamily::clayton: {
      const double th = c.th0;
      const double A = -th * std::log(u), B = -th * std::log(v);
      const double M = std::max(A, B);
      const double S =
          M + std::log(std::exp(A - M) + std::exp(B - M) - std::exp(-M));
      return std::exp(-S / th);
    }
    case CopulaFamily::gumbel: {
      const double th = c.th0;
      const double A = th * std::log(-std::log(u));
      const double B = th * std::log(-std::log(v));
      const double M = std::max(A, B);
      const double logS = M + std::log(std::exp(A - M) + std::exp(B - M));
      return std::exp(-std::exp(logS / th));
    }
    case CopulaFamily::frank: {
      const double th = c.th0;
      if (th < 1e-8) return u * v;
      const double eu = std::exp(-th * u), ev = std::exp(-th * v);
      const double pos = eu * (-std::expm1(-th * v)) +
                         ev * (-std::expm1(-th * (1.0 - v)));
      return -(std::log(pos) - std::log(-std::expm1(-th))) / th;
    }
    case CopulaFamily::joe: {
      const double th = c.th0;
      const double pth = std::exp(th * std::log1p(-u));
      const double qth = std::exp(th * std::log1p(-v));
      const double A = pth + qth * (1.0 - pth);
      return 1.0 - std::exp(std::log(A) / th);
    }
  }
  return u * v;
}

double base_h1(const View& c, double u, double v) {
  switch (c.fam) {
    case CopulaFamily::independence:
      return v;
    case CopulaFamily::gaussian: {
      const double r = c.th0;
      const double x = num::norm_quantile(u);
      const double y = num::norm_quantile(v);
      return num::norm_cdf((y - r * x) / std::sqrt((1.0 - r) * (1.0 + r)));
    }
    case CopulaFamily::student_t: {
      const double r = c.th0, nu = c.th1;
      const double x = t_quantile(u, nu);
      const double y = t_quantile(v, nu);
      const double s =
          std::sqrt((nu + x * x) * (1.0 - r) * (1.0 + r) / (nu + 1.0));
      return t_cdf((y - r * x) / s, nu + 1.0);
    }
    case CopulaFamily::clayton: {
      const double th = c.th0;
      const double lu = std::log(u), lv = std::log(v);
      const double A = -th * lu, B = -th * lv;
      const double M = std::max(A, B);
      const double S =
          M + std::log(std::exp(A - M) + std::exp(B - M) - std::exp(-M));
      return std::exp(-(th + 1.0) * lu - (1.0 + 1.0 / th) * S);
    }
    case CopulaFamily::gumbel: {
      const double th = c.th0;
      const double au = -std::log(u);
      const double A = th * std::log(au), B = th * std::log(-std::log(v));
      const double M = std::max(A, B);
      const double logS = M + std::log(std::exp(A - M) + std::exp(B - M));
      return std::exp(-std::exp(logS / th) + (th - 1.0) * std::log(au) +
                      (1.0 / th - 1.0) * logS + au);
    }
    case CopulaFamily::frank: {
      const double th = c.th0;
      if (th < 1e-8) return v;
      const double eu = std::exp(-th * u), ev = std::exp(-th * v);
      const double pos = eu * (-std::expm1(-th * v)) +
                         ev * (-std::expm1(-th * (1.0 - v)));
      return eu * (-std::expm1(-th * v)) / pos;
    }
    case CopulaFamily::joe: {
      const double th = c.th0;
      const double lp = std::log1p(-u), lq = std::log1p(-v);
      const double pth = std::exp(th * lp), qth = std::exp(th * lq);
      const double A = pth + qth * (1.0 - pth);
      return std::exp((1.0 / th - 1.0) * std::log(A) + (th - 1.0) * lp +
                      std::log1p(-qth));
    }
  }
  return v;
}

double base_hinv1(const View& c, double w, double u) {
  switch (c.fam) {
    case CopulaFamily::independence:
      return w;
    case CopulaFamily::gaussian: {
      const double r = c.th0;
      const double x = num::norm_quantile(u);
      const double z = num::norm_quantile(w);
      return num::norm_cdf(z * std::sqrt((1.0 - r) * (1.0 + r)) + r * x);
    }
    case CopulaFamily::student_t: {
      const double r = c.th0, nu = c.th1;
      const double x = t_quantile(u, nu);
      const double s =
          std::sqrt((nu + x * x) * (1.0 - r) * (1.0 + r) / (nu + 1.0));
      return t_cdf(t_quantile(w, nu + 1.0) * s + r * x, nu);
    }
    case CopulaFamily::clayton: {
      const double th = c.th0;
      // v = (1 + u^{-th} (w^{-th/(1+th)} - 1))^{-1/th}, in log space.
      const double A = -th * std::log(u);
      const double t = std::expm1(-th / (1.0 + th) * std::log(w));
      if (t <= 0.0) return 1.0 - unit_eps;
      const double lt = A + std::log(t);
      const double log1pe =
          (lt > 30.0) ? lt : std::log1p(std::exp(lt));
      return clamp_unit(std::exp(-log1pe / th));
    }
    case CopulaFamily::frank: {
      const double th = c.th0;
      if (th < 1e-8) return w;
      const double eu = std::exp(-th * u);
      const double gu = std::expm1(-th * u);
      const double D = std::expm1(-th);
      const double gv = w * D / (eu - w * gu);
      return clamp_unit(-std::log1p(gv) / th);
    }
    case CopulaFamily::gumbel:
    case CopulaFamily::joe:
      break;  // handled numerically below
    default:
      break;
  }
  // Bracketed inversion of the monotone conditional cdf.
  auto f = [&](double v) { return base_h1(c, u, v) - w; };
  const double root =
      num::find_root_bracketed(f, unit_eps, 1.0 - unit_eps, 1e-11, 200);
  return clamp_unit(root);
}

double tau_frank(double th) {
  // tau = 1 - 4/th (1 - D1(th)) with D1 the first Debye function.
  const double a = std::abs(th);
  if (a < 1e-10) return 0.0;
  static const num::Quadrature q = num::gauss_legendre(64, 0.0, 1.0);
  double d1 = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double t = a * q.nodes[i];
    const double integrand = (t < 1e-12) ? 1.0 : t / std::expm1(t);
    d1 += q.weights[i] * integrand;  // nodes scaled to (0,1); dt = a dx
  }
  const double tau_pos = 1.0 - 4.0 / a * (1.0 - d1);
  return th > 0.0 ? tau_pos : -tau_pos;
}

double tau_joe(double th) {
  // tau = 1 + (4/th) Int_0^1 log1p(-s^th)/s^th * (1 - s^th) * s ds,
  // written so the s -> 0 limit is finite.
  static const num::Quadrature q = num::gauss_legendre(128, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double s = q.nodes[i];
    const double x = std::exp(th * std::log(s));  // s^th in (0,1)
    const double ratio = (x < 1e-12) ? -1.0 : std::log1p(-x) / x;
    acc += q.weights[i] * ratio * (1.0 - x) * s;
  }
  return 1.0 + 4.0 / th * acc;
}

double base_tau(const View& c) {
  switch (c.fam) {
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::gaussian:
    case CopulaFamily::student_t:
      return 2.0 * std::asin(c.th0) / M_PI;
    case CopulaFamily::clayton: return c.th0 / (c.th0 + 2.0);
    case CopulaFamily::gumbel: return 1.0 - 1.0 / c.th0;
    case CopulaFamily::frank: return tau_frank(c.th0);
    case CopulaFamily::joe: return tau_joe(c.th0);
  }
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Rotation dispatch
// ---------------------------------------------------------------------------

double log_pdf(const PairCopula& c, UnitPair p) {
  const View view = resolve(c);
  switch (view.rot) {
    case Rotation::deg0: return base_logpdf(view, p.u, p.v);
    case Rotation::deg90: return base_logpdf(view, 1.0 - p.u, p.v);
    case Rotation::deg180: return base_logpdf(view, 1.0 - p.u, 1.0 - p.v);
    case Rotation::deg270: return base_logpdf(view, p.u, 1.0 - p.v);
  }
  return 0.0;
}

double pdf(const PairCopula& c, UnitPair p) { return std::exp(log_pdf(c, p)); }

double cdf(const PairCopula& c, UnitPair p) {
  const View view = resolve(c);
  double val = 0.0;
  switch (view.rot) {
    case Rotation::deg0:
      val = base_cdf(view, p.u, p.v);
      break;
    case Rotation::deg90:
      val = p.v - base_cdf(view, 1.0 - p.u, p.v);
      break;
    case Rotation::deg180:
      val = p.u + p.v - 1.0 + base_cdf(view, 1.0 - p.u, 1.0 - p.v);
      break;
    case Rotation::deg270:
      val = p.u - base_cdf(view, p.u, 1.0 - p.v);
      break;
  }
  return std::clamp(val, 0.0, 1.0);
}

double hfunc(const PairCopula& c, UnitPair p, int which) {
  if (which != 1 && which != 2) {
    throw std::invalid_argument("hfunc: which must be 1 or 2");
  }
  const View view = resolve(c);
  // Exchangeable base families: the which=2 derivative is the which=1
  // derivative with swapped coordinates.
  auto h1 = [&](double u, double v) { return base_h1(view, u, v); };
  auto h2 = [&](double u, double v) { return base_h1(view, v, u); };
  double val = 0.0;
  switch (view.rot) {
    case Rotation::deg0:
      val = (which == 1) ? h1(p.u, p.v) : h2(p.u, p.v);
      break;
    case Rotation::deg90:
      val = (which == 1) ? h1(1.0 - p.u, p.v) : 1.0 - h2(1.0 - p.u, p.v);
      break;
    case Rotation::deg180:
      val = (which == 1) ? 1.0 - h1(1.0 - p.u, 1.0 - p.v)
                         : 1.0 - h2(1.0 - p.u, 1.0 - p.v);
      break;
    case Rotation::deg270:
      val = (which == 1) ? 1.0 - h1(p.u, 1.0 - p.v) : h2(p.u, 1.0 - p.v);
      break;
  }
  return clamp_unit(val);
}

double hinv(const PairCopula& c, double w, double conditioning, int which) {
  if (which != 1 && which != 2) {
    throw std::invalid_argument("hinv: which must be 1 or 2");
  }
  w = clamp_unit(w);
  const double cond = clamp_unit(conditioning);
  const View view = resolve(c);
  auto inv1 = [&](double ww, double cc) { return base_hinv1(view, ww, cc); };
  double val = 0.0;
  switch (view.rot) {
    case Rotation::deg0:
      val = inv1(w, cond);
      break;
    case Rotation::deg90:
      val = (which == 1) ? inv1(w, 1.0 - cond) : 1.0 - inv1(1.0 - w, cond);
      break;
    case Rotation::deg180:
      val = 1.0 - inv1(1.0 - w, 1.0 - cond);
      break;
    case Rotation::deg270:
      val = (which == 1) ? 1.0 - inv1(1.0 - w, cond) : inv1(w, 1.0 - cond);
      break;
  }
  return clamp_unit(val);
}

double tau(const PairCopula& c) {
  const View view = resolve(c);
  const double t = base_tau(view);
  return (view.rot == Rotation::deg90 || view.rot == Rotation::deg270) ? -t : t;
}

std::vector<double> tau_to_param(CopulaFamily f, double tau_value) {
  switch (f) {
    case CopulaFamily::independence:
      return {};
    case CopulaFamily::student_t:
      throw std::logic_error(
          "tau_to_param: student_t nu is not identified by tau");
    case CopulaFamily::gaussian:
      return {std::clamp(std::sin(M_PI_2 * tau_value), -0.99999, 0.99999)};
    case CopulaFamily::clayton: {
      const double t = std::clamp(std::abs(tau_value), 1e-6, 28.0 / 30.0);
      return {std::clamp(2.0 * t / (1.0 - t), 1e-5, 28.0)};
    }
    case CopulaFamily::gumbel: {
      const double t = std::clamp(std::abs(tau_value), 0.0, 1.0 - 1.0 / 17.0);
      return {1.0 / (1.0 - t)};
    }
    case CopulaFamily::frank: {
      if (std::abs(tau_value) < 1e-7) return {1e-6};
      const double a = std::abs(tau_value);
      if (a >= tau_frank(35.0)) return {tau_value > 0 ? 35.0 : -35.0};
      const double th = num::find_root_bracketed(
          [&](double x) { return tau_frank(x) - a; }, 1e-6, 35.0, 1e-10, 200);
      return {tau_value > 0 ? th : -th};
    }
    case CopulaFamily::joe: {
      const double a = std::clamp(std::abs(tau_value), 1e-8, tau_joe(30.0));
      if (a <= tau_joe(1.0 + 1e-6)) return {1.0 + 1e-6};
      const double th = num::find_root_bracketed(
          [&](double x) { return tau_joe(x) - a; }, 1.0 + 1e-6, 30.0, 1e-10,
          200);
      return {th};
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

namespace {

struct Domain {
  double lo, hi;
};

Domain fit_domain(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::gaussian: return {-0.99999, 0.99999};
    case CopulaFamily::clayton: return {1e-4, 28.0};
    case CopulaFamily::gumbel: return {1.0, 17.0};
    case CopulaFamily::frank: return {-35.0, 35.0};
    case CopulaFamily::joe: return {1.0 + 1e-6, 30.0};
    default: return {0.0, 0.0};
  }
}

// Reflect observations so a rotated family can be fitted through its base
// form: pdf_rot(u, v) = pdf_base(reflect(u, v)).
std::vector<UnitPair> reflect_obs(std::span<const UnitPair> obs, Rotation rot) {
  std::vector<UnitPair> out;
  out.reserve(obs.size());
  for (const UnitPair& p : obs) {
    switch (rot) {
      case Rotation::deg0: out.push_back(p); break;
      case Rotation::deg90: out.emplace_back(1.0 - p.u, p.v); break;
      case Rotation::deg180: out.emplace_back(1.0 - p.u, 1.0 - p.v); break;
      case Rotation::deg270: out.emplace_back(p.u, 1.0 - p.v); break;
    }
  }
  return out;
}

double loglik_at(CopulaFamily f, double th0, double th1,
                 std::span<const UnitPair> obs) {
  View view{f, th0, th1, Rotation::deg0};
  bool flip_v = false;
  if (f == CopulaFamily::frank && th0 < 0.0) {
    view.th0 = -th0;
    flip_v = true;
  }
  double acc = 0.0;
  for (const UnitPair& p : obs) {
    acc += base_logpdf(view, p.u, flip_v ? 1.0 - p.v : p.v);
  }
  return acc;
}

// Gaussian profile pieces: the log-likelihood depends on the data only
// through three sums of normal scores.
struct GaussStats {
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  std::size_t n = 0;
};

GaussStats gauss_stats(std::span<const UnitPair> obs) {
  GaussStats s;
  s.n = obs.size();
  for (const UnitPair& p : obs) {
    const double x = num::norm_quantile(p.u);
    const double y = num::norm_quantile(p.v);
    s.sxx += x * x;
    s.syy += y * y;
    s.sxy += x * y;
  }
  return s;
}

double gauss_loglik(const GaussStats& s, double r) {
  const double q = (1.0 - r) * (1.0 + r);
  return -0.5 * static_cast<double>(s.n) * std::log(q) -
         (r * r * (s.sxx + s.syy) - 2.0 * r * s.sxy) / (2.0 * q);
}

PairFit fit_student_t(std::span<const UnitPair> obs, double tau_hat) {
  const double rho_start = std::sin(M_PI_2 * tau_hat);
  std::vector<double> x(obs.size()), y(obs.size());

  auto profile = [&](double log_nu) {
    const double nu = std::exp(log_nu);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      x[i] = t_quantile(obs[i].u, nu);
      y[i] = t_quantile(obs[i].v, nu);
    }
    const double lc = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                      2.0 * std::lgamma(0.5 * (nu + 1.0));
    double margin = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      margin += std::log1p(x[i] * x[i] / nu) + std::log1p(y[i] * y[i] / nu);
    }
    auto nll = [&](double r) {
      const double q = (1.0 - r) * (1.0 + r);
      double acc = obs.size() * (lc - 0.5 * std::log(q)) +
                   0.5 * (nu + 1.0) * margin;
      for (std::size_t i = 0; i < obs.size(); ++i) {
        acc -= 0.5 * (nu + 2.0) *
               std::log1p((x[i] * x[i] - 2.0 * r * x[i] * y[i] +
                           y[i] * y[i]) /
                          (nu * q));
      }
      return -acc;
    };
    const double r_best = num::brent_minimize(nll, -0.99999, 0.99999, 1e-7);
    return std::pair<double, double>{r_best, -nll(r_best)};
  };

  auto outer = [&](double log_nu) { return -profile(log_nu).second; };
  const double log_nu_best =
      num::brent_minimize(outer, std::log(2.001), std::log(50.0), 1e-4);
  const double nu = std::min(std::exp(log_nu_best), 50.0);
  auto [rho, ll] = profile(std::log(nu));

  if (!std::isfinite(ll)) {
    return {PairCopula(CopulaFamily::student_t,
                       {std::clamp(rho_start, -0.99999, 0.99999), 10.0}),
            loglik_at(CopulaFamily::student_t, rho_start, 10.0, obs), true};
  }
  return {PairCopula(CopulaFamily::student_t, {rho, nu}), ll, false};
}

}  // namespace

PairFit fit_pair_mle(CopulaFamily family, std::span<const UnitPair> obs,
                     Rotation rotation) {
  if (obs.size() < 10) {
    throw std::invalid_argument("fit_pair_mle: need at least 10 observations");
  }
  if (rotation != Rotation::deg0 && !is_rotatable(family)) {
    throw std::invalid_argument("fit_pair_mle: family is not rotatable");
  }
  if (family == CopulaFamily::independence) {
    return {PairCopula(), 0.0, false};
  }

  const std::vector<UnitPair> base_obs = reflect_obs(obs, rotation);
  std::vector<double> us(base_obs.size()), vs(base_obs.size());
  for (std::size_t i = 0; i < base_obs.size(); ++i) {
    us[i] = base_obs[i].u;
    vs[i] = base_obs[i].v;
  }
  const double tau_hat = num::kendall_tau(us, vs);

  if (family == CopulaFamily::student_t) {
    return fit_student_t(base_obs, tau_hat);
  }

  if (family == CopulaFamily::gaussian) {
    const GaussStats s = gauss_stats(base_obs);
    auto nll = [&](double r) { return -gauss_loglik(s, r); };
    const Domain dom = fit_domain(family);
    const double rho = num::brent_minimize(nll, dom.lo, dom.hi, 1e-8);
    const double ll = gauss_loglik(s, rho);
    if (!std::isfinite(ll)) {
      const double rho0 = std::clamp(std::sin(M_PI_2 * tau_hat), dom.lo, dom.hi);
      return {PairCopula(CopulaFamily::gaussian, {rho0}, rotation),
              gauss_loglik(s, rho0), true};
    }
    return {PairCopula(CopulaFamily::gaussian, {rho}, rotation), ll, false};
  }

  // One-parameter Archimedean families.
  const Domain dom = fit_domain(family);
  auto nll = [&](double th) { return -loglik_at(family, th, 0.0, base_obs); };
  const double th_opt = num::brent_minimize(nll, dom.lo, dom.hi, 1e-7);
  const double ll_opt = -nll(th_opt);

  // tau-inversion start doubles as a safeguard for a misled line search.
  double th_seed = 0.5 * (dom.lo + dom.hi);
  try {
    const std::vector<double> seed = tau_to_param(family, tau_hat);
    if (!seed.empty()) th_seed = std::clamp(seed[0], dom.lo, dom.hi);
  } catch (const std::exception&) {
  }
  const double ll_seed = -nll(th_seed);

  const bool warn = !std::isfinite(ll_opt);
  double th_best, ll_best;
  if (std::isfinite(ll_opt) && ll_opt >= ll_seed) {
    th_best = th_opt;
    ll_best = ll_opt;
  } else {
    th_best = th_seed;
    ll_best = ll_seed;
  }
  if (family == CopulaFamily::frank && std::abs(th_best) < 1e-6) {
    th_best = (tau_hat >= 0.0) ? 1e-6 : -1e-6;
    ll_best = -nll(th_best);
  }
  return {PairCopula(family, {th_best}, rotation), ll_best, warn};
}

FamilySelection select_family(std::span<const UnitPair> obs,
                              std::span<const CopulaFamily> candidates) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_family: empty candidate set");
  }
  std::vector<double> us(obs.size()), vs(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    us[i] = obs[i].u;
    vs[i] = obs[i].v;
  }
  const double tau_hat = obs.size() >= 2 ? num::kendall_tau(us, vs) : 0.0;

  FamilySelection best;
  bool have_best = false;
  std::exception_ptr last_error;

  for (CopulaFamily f : all_families()) {
    if (std::find(candidates.begin(), candidates.end(), f) ==
        candidates.end()) {
      continue;
    }
    std::vector<Rotation> rotations = {Rotation::deg0};
    if (is_rotatable(f)) {
      rotations = (tau_hat >= 0.0)
                      ? std::vector<Rotation>{Rotation::deg0, Rotation::deg180}
                      : std::vector<Rotation>{Rotation::deg90, Rotation::deg270};
    }
    for (Rotation rot : rotations) {
      try {
        const PairFit fit = fit_pair_mle(f, obs, rot);
        const double aic =
            -2.0 * fit.loglik + 2.0 * param_count(f);
        if (!have_best || aic < best.aic) {
          best = {fit.copula, fit.loglik, aic, fit.fallback_warning};
          have_best = true;
        }
      } catch (...) {
        last_error = std::current_exception();
      }
    }
  }
  if (!have_best) {
    if (last_error) std::rethrow_exception(last_error);
    throw std::runtime_error("select_family: every candidate fit failed");
  }
  return best;
}

std::vector<UnitPair> sample_pair(const PairCopula& c, std::size_t n,
                                  std::mt19937_64& rng) {
  if (n < 1) throw std::invalid_argument("sample_pair: n must be >= 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<UnitPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unif(rng);
    const double w = unif(rng);
    out.emplace_back(u, hinv(c, w, u, 1));
  }
  return out;
}

}  // namespace vinegc
