#include "vinegc/simstudy.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "vinegc/linear_gc.hpp"
#include "vinegc/numerics.hpp"
#include "vinegc/parallel.hpp"

namespace vinegc {

namespace {

struct NameEntry {
  DGPName id;
  std::string_view name;
};

constexpr std::array<NameEntry, 17> dgp_names = {{
    {DGPName::s1, "S1"}, {DGPName::s2, "S2"}, {DGPName::s3, "S3"},
    {DGPName::s4, "S4"}, {DGPName::s5, "S5"},
    {DGPName::p1, "P1"}, {DGPName::p2, "P2"}, {DGPName::p3, "P3"},
    {DGPName::p4, "P4"}, {DGPName::p5, "P5"},
    {DGPName::s1k4, "S1k4"}, {DGPName::s2k4, "S2k4"}, {DGPName::s3k4, "S3k4"},
    {DGPName::p1k4, "P1k4"}, {DGPName::p2k4, "P2k4"}, {DGPName::p3k4, "P3k4"},
    {DGPName::p4k4, "P4k4"},
}};

}  // namespace

std::string_view dgp_name(DGPName m) {
  for (const auto& e : dgp_names) {
    if (e.id == m) return e.name;
  }
  return "?";
}

std::optional<DGPName> dgp_from_name(std::string_view name) {
  for (const auto& e : dgp_names) {
    if (e.name == name) return e.id;
  }
  return std::nullopt;
}

std::vector<DGPName> all_dgps() {
  std::vector<DGPName> out;
  for (const auto& e : dgp_names) out.push_back(e.id);
  return out;
}

int DGPSpec::markov_order() const {
  switch (name) {
    case DGPName::s1k4: case DGPName::s2k4: case DGPName::s3k4:
    case DGPName::p1k4: case DGPName::p2k4: case DGPName::p3k4:
    case DGPName::p4k4:
      return 4;
    default:
      return 1;
  }
}

namespace {

// One step of the recursion. xl/yl hold the four most recent lags,
// xl[0] = value at t-1, xl[3] = value at t-4.
struct Lags {
  std::array<double, 4> x{}, y{};
  void push(double xv, double yv) {
    for (int i = 3; i > 0; --i) {
      x[i] = x[i - 1];
      y[i] = y[i - 1];
    }
    x[0] = xv;
    y[0] = yv;
  }
};

// Alternating-sign sum 0.5 sum_p (-1)^{p+1} f(lag_p).
template <class F>
double alt_sum(const std::array<double, 4>& lags, F f) {
  double acc = 0.0;
  double sign = 1.0;
  for (int p = 0; p < 4; ++p) {
    acc += sign * f(lags[p]);
    sign = -sign;
  }
  return acc;
}

template <class F>
double plain_sum(const std::array<double, 4>& lags, F f) {
  double acc = 0.0;
  for (int p = 0; p < 4; ++p) acc += f(lags[p]);
  return acc;
}

std::pair<double, double> step(DGPName m, const Lags& l, double eta,
                               double eps) {
  const double x1 = l.x[0], y1 = l.y[0];
  auto id = [](double v) { return v; };
  auto sq = [](double v) { return v * v; };
  switch (m) {
    case DGPName::s1:
      return {0.5 * x1 + eta, 0.5 * y1 + eps};
    case DGPName::s2:
      return {std::pow(std::abs(x1), 0.8) + eta, 0.5 * y1 + eps};
    case DGPName::s3:
      return {0.5 * x1 + eta, 0.5 * y1 + 0.5 * x1 * x1 + eps};
    case DGPName::s4:
      return {0.5 * x1 * std::exp(-0.5 * x1 * x1) + eta, 0.5 * y1 + eps};
    case DGPName::s5:
      return {std::sin(x1) + eta, 0.5 * y1 + eps};
    case DGPName::p1:
      return {0.5 * x1 + 0.5 * y1 + eta, 0.5 * y1 + eps};
    case DGPName::p2:
      return {0.5 * x1 + 0.5 * y1 + 0.5 * std::sin(-2.0 * y1) + eta,
              0.5 * y1 + eps};
    case DGPName::p3:
      return {0.5 * x1 + 0.5 * y1 * y1 + eta, 0.5 * y1 + eps};
    case DGPName::p4:
      return {0.5 * x1 + 0.5 * y1 * y1 * y1 * y1 + eta,
              0.5 * std::sin(y1) + eps};
    case DGPName::p5:
      return {0.65 * x1 + 0.2 * y1 * y1 + eta, -0.3 * y1 + eps};
    case DGPName::s1k4:
      return {0.5 * alt_sum(l.x, id) + eta, 0.5 * alt_sum(l.y, id) + eps};
    case DGPName::s2k4:
      return {alt_sum(l.x, [](double v) { return std::pow(std::abs(v), 0.8); }) +
                  eta,
              0.5 * alt_sum(l.y, id) + eps};
    case DGPName::s3k4:
      return {0.5 * alt_sum(l.x, id) + eta,
              0.5 * alt_sum(l.y, id) + 0.5 * alt_sum(l.x, sq) + eps};
    case DGPName::p1k4:
      return {0.5 * alt_sum(l.x, id) + 0.5 * plain_sum(l.y, id) + eta,
              0.5 * alt_sum(l.y, id) + eps};
    case DGPName::p2k4:
      return {0.5 * alt_sum(l.x, id) + 0.5 * plain_sum(l.y, id) +
                  0.5 * plain_sum(l.y, [](double v) { return std::sin(-2.0 * v); }) +
                  eta,
              0.5 * alt_sum(l.y, id) + eps};
    case DGPName::p3k4:
      return {0.5 * alt_sum(l.x, id) + 0.5 * plain_sum(l.y, sq) + eta,
              0.5 * alt_sum(l.y, id) + eps};
    case DGPName::p4k4:
      return {0.5 * alt_sum(l.x, id) +
                  0.5 * plain_sum(l.y, [](double v) { return v * v * v * v; }) +
                  eta,
              0.5 * alt_sum(l.y, [](double v) { return std::sin(v); }) + eps};
  }
  throw std::invalid_argument("generate: unknown model");
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> generate(
    const DGPSpec& spec, std::mt19937_64& rng) {
  if (spec.T < 1) throw std::invalid_argument("generate: T must be >= 1");
  if (spec.burn_in < 100) {
    throw std::invalid_argument("generate: burn_in must be >= 100");
  }
  // Independent innovation streams for the two equations.
  std::mt19937_64 rng_x = num::substream(rng(), {0x11});
  std::mt19937_64 rng_y = num::substream(rng(), {0x22});
  std::normal_distribution<double> normal(0.0, 1.0);

  Lags lags;
  std::vector<double> x, y;
  x.reserve(spec.T);
  y.reserve(spec.T);
  const int total = spec.burn_in + spec.T;
  for (int t = 0; t < total; ++t) {
    const double eta = normal(rng_x);
    const double eps = normal(rng_y);
    const auto [xv, yv] = step(spec.name, lags, eta, eps);
    lags.push(xv, yv);
    if (t >= spec.burn_in) {
      x.push_back(xv);
      y.push_back(yv);
    }
  }
  return {std::move(x), std::move(y)};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::mvine: return "mvine";
    case Method::split_sample: return "split";
    case Method::linear: return "linear";
  }
  return "?";
}

std::optional<Method> method_from_name(std::string_view name) {
  if (name == "mvine") return Method::mvine;
  if (name == "split") return Method::split_sample;
  if (name == "linear") return Method::linear;
  return std::nullopt;
}

namespace {

double run_method(Method method, const std::vector<double>& x,
                  const std::vector<double>& y, int k, const GCConfig& base,
                  std::uint64_t seed) {
  switch (method) {
    case Method::linear:
      return granger_linear(x, y, k).p_value;
    case Method::mvine:
    case Method::split_sample: {
      GCConfig cfg = base;
      cfg.k = k;
      cfg.seed = seed;
      cfg.workers = 1;
      cfg.variant = (method == Method::mvine) ? TestVariant::full_sample
                                              : TestVariant::split_sample;
      return mvine_test(x, y, cfg).p_value;
    }
  }
  throw std::invalid_argument("run_study: unknown method");
}

}  // namespace

MonteCarloReport run_study(const StudyConfig& cfg) {
  if (cfg.S < 1) throw std::invalid_argument("run_study: S must be >= 1");
  if (cfg.models.empty() || cfg.T_values.empty() || cfg.methods.empty()) {
    throw std::invalid_argument("run_study: empty model/T/method grid");
  }

  MonteCarloReport report;
  report.seed = cfg.seed;
  report.alpha = cfg.gc.alpha;

  for (DGPName model : cfg.models) {
    for (int T : cfg.T_values) {
      DGPSpec spec{model, T, cfg.burn_in};
      const int k = spec.markov_order();
      const auto t_start = std::chrono::steady_clock::now();

      // p_values[method][replicate]; NaN marks a failed replicate.
      std::vector<std::vector<double>> pvals(
          cfg.methods.size(),
          std::vector<double>(cfg.S, std::numeric_limits<double>::quiet_NaN()));

      parallel_for(cfg.S, cfg.workers, [&](std::size_t rep) {
        const std::uint64_t cell_seed = num::mix_seed(
            cfg.seed, {static_cast<std::uint64_t>(model),
                       static_cast<std::uint64_t>(T), rep});
        std::mt19937_64 rng(cell_seed);
        const auto [x, y] = generate(spec, rng);
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
          try {
            pvals[mi][rep] = run_method(cfg.methods[mi], x, y, k, cfg.gc,
                                        num::mix_seed(cell_seed, {mi}));
          } catch (const std::exception&) {
            // recorded as missing; the cell is flagged below
          }
        }
      });

      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        t_start)
              .count();

      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        CellResult cell;
        cell.model = model;
        cell.T = T;
        cell.method = cfg.methods[mi];
        cell.S = cfg.S;
        cell.wall_seconds = wall;
        double sum = 0.0, sum2 = 0.0;
        int rejected = 0;
        for (double p : pvals[mi]) {
          if (!std::isfinite(p)) continue;
          ++cell.n_completed;
          sum += p;
          sum2 += p * p;
          if (p < cfg.gc.alpha) ++rejected;
          if (cfg.collect_raw) cell.raw_p.push_back(p);
        }
        if (cell.n_completed > 0) {
          cell.rejection_rate =
              static_cast<double>(rejected) / cell.n_completed;
          cell.mean_p = sum / cell.n_completed;
          const double var =
              (cell.n_completed > 1)
                  ? (sum2 - sum * sum / cell.n_completed) /
                        (cell.n_completed - 1)
                  : 0.0;
          cell.sd_p = std::sqrt(std::max(0.0, var));
        }
        cell.flagged = cell.n_completed < 0.95 * cfg.S;
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

std::string format_report(const MonteCarloReport& report) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "vinegc.study.v1 seed=%llu alpha=%g\n",
                static_cast<unsigned long long>(report.seed), report.alpha);
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-6s %6s %-7s %10s %8s %8s %6s %5s\n",
                "model", "T", "method", "reject", "mean_p", "sd_p", "done",
                "flag");
  out += buf;
  for (const CellResult& c : report.cells) {
    std::snprintf(buf, sizeof(buf),
                  "%-6s %6d %-7s %10.4f %8.4f %8.4f %6d %5s\n",
                  std::string(dgp_name(c.model)).c_str(), c.T,
                  std::string(method_name(c.method)).c_str(), c.rejection_rate,
                  c.mean_p, c.sd_p, c.n_completed, c.flagged ? "LOW" : "-");
    out += buf;
  }
  return out;
}

std::string format_report_machine(const MonteCarloReport& report) {
  std::string out = "model,T,method,rejection_rate,mean_p,sd_p,S,seed\n";
  char buf[256];
  for (const CellResult& c : report.cells) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%.6f,%.6f,%.6f,%d,%llu\n",
                  std::string(dgp_name(c.model)).c_str(), c.T,
                  std::string(method_name(c.method)).c_str(), c.rejection_rate,
                  c.mean_p, c.sd_p, c.S,
                  static_cast<unsigned long long>(report.seed));
    out += buf;
  }
  return out;
}

std::string format_raw_pvalues(const MonteCarloReport& report) {
  std::string out = "model,T,method,p_value\n";
  char buf[256];
  for (const CellResult& c : report.cells) {
    for (double p : c.raw_p) {
      std::snprintf(buf, sizeof(buf), "%s,%d,%s,%.6f\n",
                    std::string(dgp_name(c.model)).c_str(), c.T,
                    std::string(method_name(c.method)).c_str(), p);
      out += buf;
    }
  }
  return out;
}

}  // namespace vinegc
