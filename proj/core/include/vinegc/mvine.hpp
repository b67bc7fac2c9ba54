#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vinegc/copula.hpp"
#include "vinegc/marginal.hpp"

namespace vinegc {

// A variable of the vine lattice: row 0 is the X spine (the series being
// predicted), row 1 the Y pendant; off is the time offset within a
// translation class, normalised so the smallest offset is 0.
struct VineVar {
  int row = 0;
  int off = 0;
  friend bool operator==(const VineVar&, const VineVar&) = default;
};

enum class ClassKind { cross, serial, mixed_a, mixed_b, deep };

// One translation-equivalence class of vine edges. Classes at tree level
// m >= 2 carry the wiring needed to compute their conditional
// pseudo-observations from the two parent classes one level down.
struct EdgeClass {
  int tree_level = 1;
  ClassKind kind = ClassKind::serial;
  int deep_index = 0;  // tree_level - 2 for deep classes
  VineVar a, b;        // conditioned pair (a from the left parent)
  std::vector<VineVar> conditioning;
  int lag_span = 0;    // |a.off - b.off|
  bool fitted = false; // lag_span <= k; otherwise the class is independence

  int left_parent = -1, right_parent = -1;  // class index, previous level
  int left_which = 0, right_which = 0;      // h-function argument selector
  int left_shift = 0, right_shift = 0;      // parent instance = t + shift

  std::string label() const;
};

struct MVineStructure {
  int d = 1;
  int k = 1;
  // levels[m-1] holds the classes of tree level m, in path order.
  std::vector<std::vector<EdgeClass>> levels;

  int n_fitted_classes() const;
  std::vector<const EdgeClass*> fitted_classes() const;
};

// Translation-invariant M-vine structure for a d-dimensional k-Markov
// series; depends only on (d, k). d=1 yields the D-vine ladder, d=2 the
// X-spine caterpillar with Y pendants and the alternating higher trees.
MVineStructure build_structure(int d, int k);

struct FittedClass {
  EdgeClass cls;
  PairCopula copula;  // independence when !cls.fitted
  double loglik = 0.0;
  std::size_t n_obs = 0;
  bool fallback_warning = false;
};

struct MVineModel {
  MVineStructure structure;
  std::vector<EmpiricalMarginal> marginals;     // one per row
  std::vector<std::vector<FittedClass>> levels; // mirrors structure.levels
  double loglik = 0.0;
  int n_params = 0;
  std::pair<int, int> fit_window{0, 0};  // 1-based inclusive observation range

  int d() const { return structure.d; }
  int k() const { return structure.k; }
  double aic() const { return -2.0 * loglik + 2.0 * n_params; }
  const FittedClass& cls(int level, int index) const {
    return levels[level - 1][index];
  }
};

// Pooled step-wise MLE over translation classes, tree by tree. data holds
// one column per row of the series (x first); requires T >= 10 (k+1).
MVineModel fit_mvine(const std::vector<std::vector<double>>& data, int k,
                     std::span<const CopulaFamily> candidates,
                     std::pair<int, int> fit_window = {0, 0});

// Evaluates the model's pair-copula log density over a data set (marginals
// re-ranked on that data, as in fitting). Returns {loglik, aic}.
std::pair<double, double> mvine_loglik_aic(
    const MVineModel& model, const std::vector<std::vector<double>>& data);

struct OrderSelection {
  int k = 1;
  std::vector<MVineModel> models;  // index i holds the k = i+1 fit
};

// AIC-minimising Markov order over k = 1..k_max; ties break downward.
OrderSelection select_order(const std::vector<std::vector<double>>& data,
                            int k_max, std::span<const CopulaFamily> candidates);

// N i.i.d. draws of X_t (data units) given the last k observations of every
// row, by exact inverse-Rosenblatt along the vine. history spans are
// oldest-first and must have length k.
std::vector<double> simulate_conditional(const MVineModel& model,
                                         std::span<const double> history_x,
                                         std::span<const double> history_y,
                                         std::size_t n_draws,
                                         std::mt19937_64& rng);

// Conditional cdf of the copula coordinate of X_t given the history
// (exposed for diagnostics and tests).
double conditional_cdf(const MVineModel& model,
                       std::span<const double> history_x,
                       std::span<const double> history_y, double u);

// Tree-1 accessors for the null-path generator (d=2 only).
struct FirstTreeCopulas {
  const PairCopula* serial;  // c_{X_t, X_{t+1}}
  const PairCopula* cross;   // c_{X_t, Y_t}
};
FirstTreeCopulas first_tree_copulas(const MVineModel& model);

// Generates a length-T sample under the no-Granger-causality null: X is a
// first-order Markov chain driven by the serial copula and each Y_t is drawn
// from the cross copula given X_t. Returns data-unit series.
std::pair<std::vector<double>, std::vector<double>> simulate_null_path(
    const MVineModel& model, std::size_t T, std::mt19937_64& rng);

// Versioned self-describing text serialisation (round-trips exactly).
std::string serialize_model(const MVineModel& model);
MVineModel deserialize_model(const std::string& text);

}  // namespace vinegc
