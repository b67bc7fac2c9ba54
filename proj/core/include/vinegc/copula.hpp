#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vinegc/numerics.hpp"

namespace vinegc {

enum class CopulaFamily {
  independence,
  gaussian,
  student_t,
  clayton,
  gumbel,
  frank,
  joe,
};

// Rotations are reflections of the unit square: 90 maps u -> 1-u, 180 maps
// (u,v) -> (1-u,1-v) (survival copula), 270 maps v -> 1-v. Only meaningful
// for the asymmetric families (clayton, gumbel, joe).
enum class Rotation { deg0 = 0, deg90 = 90, deg180 = 180, deg270 = 270 };

int param_count(CopulaFamily f);
bool is_rotatable(CopulaFamily f);
std::string_view family_name(CopulaFamily f);
std::optional<CopulaFamily> family_from_name(std::string_view name);

// Argument carrier for the copula calculus; coordinates are clamped to
// [1e-10, 1 - 1e-10] on construction.
struct UnitPair {
  double u;
  double v;
  UnitPair(double u_, double v_)
      : u(num::clamp_unit(u_)), v(num::clamp_unit(v_)) {}
};

class PairCopula {
 public:
  PairCopula() : family_(CopulaFamily::independence) {}
  PairCopula(CopulaFamily family, std::vector<double> theta,
             Rotation rotation = Rotation::deg0);

  CopulaFamily family() const { return family_; }
  const std::vector<double>& theta() const { return theta_; }
  Rotation rotation() const { return rotation_; }
  int n_params() const { return static_cast<int>(theta_.size()); }

 private:
  CopulaFamily family_;
  std::vector<double> theta_;
  Rotation rotation_ = Rotation::deg0;
};

// Copula density c(u, v).
double pdf(const PairCopula& c, UnitPair p);
double log_pdf(const PairCopula& c, UnitPair p);

// Copula distribution function C(u, v).
double cdf(const PairCopula& c, UnitPair p);

// Conditional distribution functions ("h-functions").
// which = 1: dC/du, the cdf of V given U = u.
// which = 2: dC/dv, the cdf of U given V = v.
// Results are clamped to [1e-10, 1 - 1e-10].
double hfunc(const PairCopula& c, UnitPair p, int which);

// Inverse of the h-function in its free argument:
// hfunc(c, {conditioning, hinv(c, w, conditioning, 1)}, 1) == w.
// Closed form where available, otherwise bracketed regula falsi.
double hinv(const PairCopula& c, double w, double conditioning, int which);

// Kendall's tau of the copula, and the inverse link for one-parameter
// families. tau_to_param throws std::logic_error for student_t (nu is not
// identified by tau) and returns an empty vector for independence.
double tau(const PairCopula& c);
std::vector<double> tau_to_param(CopulaFamily f, double tau_value);

struct PairFit {
  PairCopula copula;
  double loglik = 0.0;
  bool fallback_warning = false;  // optimizer failed; tau-inversion estimate
};

// Maximum likelihood fit of a single family/rotation on pseudo-observations.
// Requires at least 10 observations.
PairFit fit_pair_mle(CopulaFamily family, std::span<const UnitPair> obs,
                     Rotation rotation = Rotation::deg0);

struct FamilySelection {
  PairCopula copula;
  double loglik = 0.0;
  double aic = 0.0;
  bool fallback_warning = false;
};

// AIC-minimising choice over the candidate set; asymmetric families are
// tried in the rotations matching the sign of the empirical Kendall's tau.
// Ties break by family enumeration order, then rotation 0 < 90 < 180 < 270.
FamilySelection select_family(std::span<const UnitPair> obs,
                              std::span<const CopulaFamily> candidates);

// i.i.d. draws by conditional inversion: u ~ U(0,1), v = hinv(c, w, u, 1).
std::vector<UnitPair> sample_pair(const PairCopula& c, std::size_t n,
                                  std::mt19937_64& rng);

// Default candidate set spanning no-tail, one-tail and symmetric-tail
// dependence.
std::span<const CopulaFamily> all_families();

}  // namespace vinegc
