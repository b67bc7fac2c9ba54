#include "vinegc/mvine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "vinegc/numerics.hpp"

namespace vinegc {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

std::string var_str(const VineVar& v) {
  std::string s = (v.row == 0) ? "X" : "Y";
  if (v.off == 0) return s + "(t)";
  return s + "(t+" + std::to_string(v.off) + ")";
}

}  // namespace

std::string EdgeClass::label() const {
  std::string s = var_str(a) + "," + var_str(b);
  if (!conditioning.empty()) {
    s += "|";
    for (std::size_t i = 0; i < conditioning.size(); ++i) {
      if (i) s += ",";
      s += var_str(conditioning[i]);
    }
  }
  return s;
}

int MVineStructure::n_fitted_classes() const {
  int n = 0;
  for (const auto& level : levels) {
    for (const auto& e : level) n += e.fitted ? 1 : 0;
  }
  return n;
}

std::vector<const EdgeClass*> MVineStructure::fitted_classes() const {
  std::vector<const EdgeClass*> out;
  for (const auto& level : levels) {
    for (const auto& e : level) {
      if (e.fitted) out.push_back(&e);
    }
  }
  return out;
}

namespace {

struct PeriodNode {
  int cls;    // class index at the previous level
  int shift;  // instance offset relative to the period anchor
};

std::vector<VineVar> all_vars(const EdgeClass& e, int t) {
  std::vector<VineVar> vars;
  vars.push_back({e.a.row, e.a.off + t});
  vars.push_back({e.b.row, e.b.off + t});
  for (const VineVar& c : e.conditioning) vars.push_back({c.row, c.off + t});
  return vars;
}

bool contains(const std::vector<VineVar>& set, const VineVar& v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

EdgeClass make_edge(const EdgeClass& left, int t_left, const EdgeClass& right,
                    int t_right, int level, int k) {
  const std::vector<VineVar> ul = all_vars(left, t_left);
  const std::vector<VineVar> ur = all_vars(right, t_right);

  std::vector<VineVar> conditioning;
  VineVar a{}, b{};
  int n_a = 0, n_b = 0;
  for (const VineVar& v : ul) {
    if (contains(ur, v)) {
      conditioning.push_back(v);
    } else {
      a = v;
      ++n_a;
    }
  }
  for (const VineVar& v : ur) {
    if (!contains(ul, v)) {
      b = v;
      ++n_b;
    }
  }
  if (n_a != 1 || n_b != 1) {
    throw std::logic_error("make_edge: proximity violated in vine recursion");
  }

  EdgeClass e;
  e.tree_level = level;
  e.kind = (level == 2) ? (a.row == 1 ? ClassKind::mixed_a : ClassKind::mixed_b)
                        : ClassKind::deep;
  e.deep_index = (level >= 3) ? level - 2 : 0;
  e.left_which = (a == VineVar{left.a.row, left.a.off + t_left}) ? 2 : 1;
  e.right_which = (b == VineVar{right.b.row, right.b.off + t_right}) ? 1 : 2;

  int t_inst = a.off;
  t_inst = std::min(t_inst, b.off);
  for (const VineVar& v : conditioning) t_inst = std::min(t_inst, v.off);

  e.a = {a.row, a.off - t_inst};
  e.b = {b.row, b.off - t_inst};
  for (VineVar v : conditioning) e.conditioning.push_back({v.row, v.off - t_inst});
  std::sort(e.conditioning.begin(), e.conditioning.end(),
            [](const VineVar& p, const VineVar& q) {
              return p.off != q.off ? p.off < q.off : p.row < q.row;
            });
  e.lag_span = std::abs(e.a.off - e.b.off);
  e.fitted = e.lag_span <= k;
  e.left_shift = t_left - t_inst;
  e.right_shift = t_right - t_inst;
  return e;
}

}  // namespace

MVineStructure build_structure(int d, int k) {
  if (k < 1) throw std::invalid_argument("build_structure: k must be >= 1");
  if (d != 1 && d != 2) {
    throw std::invalid_argument("build_structure: d must be 1 or 2");
  }
  MVineStructure s;
  s.d = d;
  s.k = k;
  const int max_level = (d == 2) ? 2 * k + 1 : k;

  std::vector<EdgeClass> level1;
  if (d == 2) {
    EdgeClass cross;
    cross.tree_level = 1;
    cross.kind = ClassKind::cross;
    cross.a = {0, 0};
    cross.b = {1, 0};
    cross.lag_span = 0;
    cross.fitted = true;
    level1.push_back(cross);
  }
  EdgeClass serial;
  serial.tree_level = 1;
  serial.kind = ClassKind::serial;
  serial.a = {0, 0};
  serial.b = {0, 1};
  serial.lag_span = 1;
  serial.fitted = true;
  level1.push_back(serial);
  s.levels.push_back(std::move(level1));

  // Node sequence of the tree-1 path, one translation period:
  // d=2: ..., serial(t-1), cross(t), ...; d=1: ..., serial(t), ...
  std::vector<PeriodNode> period;
  if (d == 2) {
    period = {{1, -1}, {0, 0}};
  } else {
    period = {{0, 0}};
  }

  for (int level = 2; level <= max_level; ++level) {
    const auto& prev = s.levels[level - 2];
    std::vector<EdgeClass> current;
    std::vector<PeriodNode> next_period;
    const int p = static_cast<int>(period.size());
    for (int i = 0; i < p; ++i) {
      const PeriodNode ln = period[i];
      const PeriodNode rn = (i + 1 < p)
                                ? period[i + 1]
                                : PeriodNode{period[0].cls, period[0].shift + 1};
      EdgeClass e =
          make_edge(prev[ln.cls], ln.shift, prev[rn.cls], rn.shift, level, k);
      e.left_parent = ln.cls;
      e.right_parent = rn.cls;
      // The new edge becomes a path node for the next level, anchored at the
      // instance index it was built with.
      const int t_inst = ln.shift - e.left_shift;
      next_period.push_back({static_cast<int>(current.size()), t_inst});
      current.push_back(std::move(e));
    }
    s.levels.push_back(std::move(current));
    period = std::move(next_period);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Conditional pseudo-observation streams
// ---------------------------------------------------------------------------

namespace {

struct ClassStreams {
  std::vector<double> alpha;  // C_{a | D} per instance
  std::vector<double> beta;   // C_{b | D} per instance
};

using LevelStreams = std::vector<ClassStreams>;

LevelStreams level1_streams(const MVineStructure& s,
                            const std::vector<std::vector<double>>& pseudo) {
  const int T = static_cast<int>(pseudo[0].size());
  LevelStreams out;
  for (const EdgeClass& e : s.levels[0]) {
    ClassStreams cs;
    cs.alpha.assign(T, nan_value);
    cs.beta.assign(T, nan_value);
    for (int t = 0; t < T; ++t) {
      const int ta = t + e.a.off, tb = t + e.b.off;
      if (ta < T) cs.alpha[t] = pseudo[e.a.row][ta];
      if (tb < T) cs.beta[t] = pseudo[e.b.row][tb];
    }
    out.push_back(std::move(cs));
  }
  return out;
}

LevelStreams advance_streams(const std::vector<EdgeClass>& classes,
                             const std::vector<FittedClass>& parents,
                             const LevelStreams& prev, int T) {
  LevelStreams out;
  for (const EdgeClass& e : classes) {
    ClassStreams cs;
    cs.alpha.assign(T, nan_value);
    cs.beta.assign(T, nan_value);
    const ClassStreams& lp = prev[e.left_parent];
    const ClassStreams& rp = prev[e.right_parent];
    const PairCopula& lc = parents[e.left_parent].copula;
    const PairCopula& rc = parents[e.right_parent].copula;
    for (int t = 0; t < T; ++t) {
      const int lt = t + e.left_shift;
      if (lt >= 0 && lt < T && std::isfinite(lp.alpha[lt]) &&
          std::isfinite(lp.beta[lt])) {
        cs.alpha[t] = hfunc(lc, {lp.alpha[lt], lp.beta[lt]}, e.left_which);
      }
      const int rt = t + e.right_shift;
      if (rt >= 0 && rt < T && std::isfinite(rp.alpha[rt]) &&
          std::isfinite(rp.beta[rt])) {
        cs.beta[t] = hfunc(rc, {rp.alpha[rt], rp.beta[rt]}, e.right_which);
      }
    }
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<std::vector<double>> to_pseudo(
    const std::vector<EmpiricalMarginal>& marginals,
    const std::vector<std::vector<double>>& data) {
  std::vector<std::vector<double>> pseudo(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    pseudo[r].reserve(data[r].size());
    for (double v : data[r]) pseudo[r].push_back(marginals[r].pit(v));
  }
  return pseudo;
}

void validate_data(const std::vector<std::vector<double>>& data) {
  if (data.empty() || data.size() > 2) {
    throw std::invalid_argument("mvine: data must hold 1 or 2 columns");
  }
  for (const auto& col : data) {
    if (col.size() != data[0].size()) {
      throw std::invalid_argument("mvine: columns must have equal length");
    }
  }
}

}  // namespace

MVineModel fit_mvine(const std::vector<std::vector<double>>& data, int k,
                     std::span<const CopulaFamily> candidates,
                     std::pair<int, int> fit_window) {
  validate_data(data);
  const int d = static_cast<int>(data.size());
  const int T = static_cast<int>(data[0].size());
  if (T < 10 * (k + 1)) {
    throw std::invalid_argument("fit_mvine: need at least 10 (k+1) observations");
  }
  const std::span<const CopulaFamily> fams =
      candidates.empty() ? all_families() : candidates;

  MVineModel model;
  model.structure = build_structure(d, k);
  for (const auto& col : data) model.marginals.emplace_back(col);
  model.fit_window = (fit_window == std::pair<int, int>{0, 0})
                         ? std::pair<int, int>{1, T}
                         : fit_window;

  const auto pseudo = to_pseudo(model.marginals, data);
  LevelStreams streams = level1_streams(model.structure, pseudo);

  const int n_levels = static_cast<int>(model.structure.levels.size());
  for (int m = 0; m < n_levels; ++m) {
    std::vector<FittedClass> fitted_level;
    for (std::size_t ci = 0; ci < model.structure.levels[m].size(); ++ci) {
      const EdgeClass& e = model.structure.levels[m][ci];
      FittedClass fc;
      fc.cls = e;
      if (e.fitted) {
        std::vector<UnitPair> pooled;
        const ClassStreams& cs = streams[ci];
        for (int t = 0; t < T; ++t) {
          if (std::isfinite(cs.alpha[t]) && std::isfinite(cs.beta[t])) {
            pooled.emplace_back(cs.alpha[t], cs.beta[t]);
          }
        }
        const FamilySelection sel = select_family(pooled, fams);
        fc.copula = sel.copula;
        fc.loglik = sel.loglik;
        fc.n_obs = pooled.size();
        fc.fallback_warning = sel.fallback_warning;
        model.loglik += sel.loglik;
        model.n_params += fc.copula.n_params();
      }
      fitted_level.push_back(std::move(fc));
    }
    model.levels.push_back(std::move(fitted_level));
    if (m + 1 < n_levels) {
      streams = advance_streams(model.structure.levels[m + 1],
                                model.levels[m], streams, T);
    }
  }
  return model;
}

std::pair<double, double> mvine_loglik_aic(
    const MVineModel& model, const std::vector<std::vector<double>>& data) {
  validate_data(data);
  if (static_cast<int>(data.size()) != model.d()) {
    throw std::invalid_argument("mvine_loglik_aic: dimension mismatch");
  }
  const int T = static_cast<int>(data[0].size());
  std::vector<EmpiricalMarginal> marginals;
  for (const auto& col : data) marginals.emplace_back(col);
  const auto pseudo = to_pseudo(marginals, data);

  LevelStreams streams = level1_streams(model.structure, pseudo);
  double loglik = 0.0;
  const int n_levels = static_cast<int>(model.structure.levels.size());
  for (int m = 0; m < n_levels; ++m) {
    for (std::size_t ci = 0; ci < model.structure.levels[m].size(); ++ci) {
      const FittedClass& fc = model.levels[m][ci];
      if (!fc.cls.fitted) continue;
      const ClassStreams& cs = streams[ci];
      for (int t = 0; t < T; ++t) {
        if (std::isfinite(cs.alpha[t]) && std::isfinite(cs.beta[t])) {
          loglik += log_pdf(fc.copula, {cs.alpha[t], cs.beta[t]});
        }
      }
    }
    if (m + 1 < n_levels) {
      streams = advance_streams(model.structure.levels[m + 1], model.levels[m],
                                streams, T);
    }
  }
  return {loglik, -2.0 * loglik + 2.0 * model.n_params};
}

OrderSelection select_order(const std::vector<std::vector<double>>& data,
                            int k_max,
                            std::span<const CopulaFamily> candidates) {
  if (k_max < 1) throw std::invalid_argument("select_order: k_max must be >= 1");
  OrderSelection out;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    out.models.push_back(fit_mvine(data, k, candidates));
    const double aic = out.models.back().aic();
    if (aic < best_aic) {
      best_aic = aic;
      out.k = k;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conditional simulation
// ---------------------------------------------------------------------------

namespace {

bool is_chain_class(const EdgeClass& e) {
  if (e.b.row != 0) return false;
  if (e.a.off >= e.b.off) return false;
  for (const VineVar& v : e.conditioning) {
    if (v.off >= e.b.off) return false;
  }
  return true;
}

struct ChainStep {
  const PairCopula* copula;
  double conditioning;
};

// The nested h-function chain expressing C(U_{X,t} | last k columns).
// history spans are oldest-first, length k.
std::vector<ChainStep> conditional_chain(const MVineModel& model,
                                         std::span<const double> history_x,
                                         std::span<const double> history_y) {
  const int k = model.k();
  const int d = model.d();
  if (static_cast<int>(history_x.size()) != k ||
      (d == 2 && static_cast<int>(history_y.size()) != k) ||
      (d == 1 && !history_y.empty())) {
    throw std::invalid_argument("simulate_conditional: history must hold the "
                                "last k observations of each row");
  }
  for (double v : history_x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("simulate_conditional: non-finite history");
    }
  }
  for (double v : history_y) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("simulate_conditional: non-finite history");
    }
  }

  std::vector<std::vector<double>> pseudo(d);
  for (int t = 0; t < k; ++t) {
    pseudo[0].push_back(model.marginals[0].pit(history_x[t]));
  }
  if (d == 2) {
    for (int t = 0; t < k; ++t) {
      pseudo[1].push_back(model.marginals[1].pit(history_y[t]));
    }
  }

  LevelStreams streams = level1_streams(model.structure, pseudo);
  std::vector<ChainStep> chain;
  const int n_levels = static_cast<int>(model.structure.levels.size());
  for (int m = 0; m < n_levels; ++m) {
    for (std::size_t ci = 0; ci < model.structure.levels[m].size(); ++ci) {
      const EdgeClass& e = model.structure.levels[m][ci];
      if (!e.fitted || !is_chain_class(e)) continue;
      const FittedClass& fc = model.levels[m][ci];
      if (fc.copula.family() == CopulaFamily::independence) continue;
      const int idx = k - e.b.off;
      if (idx < 0) continue;
      double cond;
      if (m == 0) {
        cond = pseudo[e.a.row][idx + e.a.off];
      } else {
        cond = streams[ci].alpha[idx];
      }
      if (!std::isfinite(cond)) {
        throw std::runtime_error("conditional_chain: incomplete history");
      }
      chain.push_back({&fc.copula, cond});
    }
    if (m + 1 < n_levels) {
      streams = advance_streams(model.structure.levels[m + 1], model.levels[m],
                                streams, k);
    }
  }
  return chain;
}

}  // namespace

double conditional_cdf(const MVineModel& model,
                       std::span<const double> history_x,
                       std::span<const double> history_y, double u) {
  const auto chain = conditional_chain(model, history_x, history_y);
  double w = num::clamp_unit(u);
  for (const ChainStep& step : chain) {
    w = hfunc(*step.copula, {step.conditioning, w}, 1);
  }
  return w;
}

std::vector<double> simulate_conditional(const MVineModel& model,
                                         std::span<const double> history_x,
                                         std::span<const double> history_y,
                                         std::size_t n_draws,
                                         std::mt19937_64& rng) {
  if (n_draws < 1) {
    throw std::invalid_argument("simulate_conditional: n_draws must be >= 1");
  }
  const auto chain = conditional_chain(model, history_x, history_y);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n_draws);
  for (std::size_t i = 0; i < n_draws; ++i) {
    double w = unif(rng);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      w = hinv(*it->copula, w, it->conditioning, 1);
    }
    out.push_back(model.marginals[0].quantile(w));
  }
  return out;
}

FirstTreeCopulas first_tree_copulas(const MVineModel& model) {
  if (model.d() != 2) {
    throw std::logic_error("first_tree_copulas: requires a bivariate model");
  }
  // Level-1 order is [cross, serial] for d = 2.
  return {&model.levels[0][1].copula, &model.levels[0][0].copula};
}

std::pair<std::vector<double>, std::vector<double>> simulate_null_path(
    const MVineModel& model, std::size_t T, std::mt19937_64& rng) {
  if (T < 1) throw std::invalid_argument("simulate_null_path: T must be >= 1");
  const FirstTreeCopulas ft = first_tree_copulas(model);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(T), y(T);
  double u = unif(rng);
  for (std::size_t t = 0; t < T; ++t) {
    const double v = hinv(*ft.cross, unif(rng), u, 1);
    x[t] = model.marginals[0].quantile(u);
    y[t] = model.marginals[1].quantile(v);
    if (t + 1 < T) u = hinv(*ft.serial, unif(rng), u, 1);
  }
  return {std::move(x), std::move(y)};
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kModelFormat = "vinegc.model.v1";

const char* kind_name(ClassKind k) {
  switch (k) {
    case ClassKind::cross: return "cross";
    case ClassKind::serial: return "serial";
    case ClassKind::mixed_a: return "mixed_a";
    case ClassKind::mixed_b: return "mixed_b";
    case ClassKind::deep: return "deep";
  }
  return "unknown";
}

}  // namespace

std::string serialize_model(const MVineModel& model) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["d"] = model.d();
  j["k"] = model.k();
  j["fit_window"] = {model.fit_window.first, model.fit_window.second};
  j["loglik"] = model.loglik;
  j["n_params"] = model.n_params;
  j["marginals"] = nlohmann::json::array();
  for (const auto& m : model.marginals) {
    j["marginals"].push_back(m.sorted_values());
  }
  j["classes"] = nlohmann::json::array();
  for (const auto& level : model.levels) {
    for (const FittedClass& fc : level) {
      nlohmann::json c;
      c["level"] = fc.cls.tree_level;
      c["kind"] = kind_name(fc.cls.kind);
      c["label"] = fc.cls.label();
      c["fitted"] = fc.cls.fitted;
      c["family"] = std::string(family_name(fc.copula.family()));
      c["rotation"] = static_cast<int>(fc.copula.rotation());
      c["theta"] = fc.copula.theta();
      c["loglik"] = fc.loglik;
      c["n_obs"] = fc.n_obs;
      c["fallback_warning"] = fc.fallback_warning;
      j["classes"].push_back(std::move(c));
    }
  }
  return j.dump(2);
}

MVineModel deserialize_model(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format").get<std::string>() != kModelFormat) {
    throw std::invalid_argument("deserialize_model: unknown format tag");
  }
  MVineModel model;
  const int d = j.at("d").get<int>();
  const int k = j.at("k").get<int>();
  model.structure = build_structure(d, k);
  model.fit_window = {j.at("fit_window")[0].get<int>(),
                      j.at("fit_window")[1].get<int>()};
  model.loglik = j.at("loglik").get<double>();
  model.n_params = j.at("n_params").get<int>();
  for (const auto& vals : j.at("marginals")) {
    model.marginals.emplace_back(vals.get<std::vector<double>>());
  }
  if (static_cast<int>(model.marginals.size()) != d) {
    throw std::invalid_argument("deserialize_model: marginal count mismatch");
  }

  std::size_t idx = 0;
  const auto& classes = j.at("classes");
  for (const auto& level : model.structure.levels) {
    std::vector<FittedClass> fitted_level;
    for (const EdgeClass& e : level) {
      if (idx >= classes.size()) {
        throw std::invalid_argument("deserialize_model: class list too short");
      }
      const auto& c = classes[idx++];
      if (c.at("label").get<std::string>() != e.label()) {
        throw std::invalid_argument("deserialize_model: class layout mismatch");
      }
      FittedClass fc;
      fc.cls = e;
      const auto fam = family_from_name(c.at("family").get<std::string>());
      if (!fam) throw std::invalid_argument("deserialize_model: bad family");
      fc.copula = PairCopula(*fam, c.at("theta").get<std::vector<double>>(),
                             static_cast<Rotation>(c.at("rotation").get<int>()));
      fc.loglik = c.at("loglik").get<double>();
      fc.n_obs = c.at("n_obs").get<std::size_t>();
      fc.fallback_warning = c.at("fallback_warning").get<bool>();
      fitted_level.push_back(std::move(fc));
    }
    model.levels.push_back(std::move(fitted_level));
  }
  return model;
}

}  // namespace vinegc
