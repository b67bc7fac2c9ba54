// Command-line driver: Granger-causality testing, model fitting and the
// Monte Carlo size/power study, wired for reproducible batch runs.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "vinegc/gc_test.hpp"
#include "vinegc/linear_gc.hpp"
#include "vinegc/mvine.hpp"
#include "vinegc/parallel.hpp"
#include "vinegc/simstudy.hpp"
#include "vinegc/tsprep.hpp"

namespace {

using namespace vinegc;

struct CommonOpts {
  std::string input;
  std::string cause, effect;
  bool diff = false;
  bool no_header = false;
  bool no_index = false;
  std::string k_spec = "auto";
  int N = 200;
  int B = 200;
  int T0 = 0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string variant = "full";
  std::string format = "text";
  std::string out;
  std::string direction = "both";
};

const char* stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

int resolve_k(const std::string& spec) {
  if (spec == "auto") return 0;
  const int k = std::stoi(spec);
  if (k < 1 || k > 4) {
    throw CLI::ValidationError("--k", "must be auto or 1..4");
  }
  return k;
}

unsigned resolve_workers(unsigned w) { return w == 0 ? default_workers() : w; }

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  f << text;
}

std::pair<std::vector<double>, std::vector<double>> load_pair(
    const CommonOpts& o) {
  SeriesTable table =
      load_csv(o.input, {o.cause, o.effect}, !o.no_header, !o.no_index);
  if (table.dropped_rows > 0) {
    std::cerr << "note: dropped " << table.dropped_rows
              << " unparseable rows\n";
  }
  std::vector<double> cause = table.columns[0];
  std::vector<double> effect = table.columns[1];
  if (o.diff) {
    cause = first_difference(cause);
    effect = first_difference(effect);
  }
  return {std::move(cause), std::move(effect)};
}

std::string config_echo(const std::string& cmd, const CommonOpts& o,
                        unsigned workers) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "command: vinegc %s --input %s --cause %s --effect %s%s "
                "--k %s --N %d --B %d --T0 %d --alpha %g --seed %llu "
                "--variant %s --workers %u --format %s\n",
                cmd.c_str(), o.input.c_str(), o.cause.c_str(),
                o.effect.c_str(), o.diff ? " --diff" : "", o.k_spec.c_str(),
                o.N, o.B, o.T0, o.alpha,
                static_cast<unsigned long long>(o.seed), o.variant.c_str(),
                workers, o.format.c_str());
  return buf;
}

std::string pp_line(const std::string& name, std::span<const double> s) {
  const PPResult pp = pp_test(s);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "pp_check: %s Z_tau=%.4f p=%.4g %s\n",
                name.c_str(), pp.z_tau, pp.p_value,
                pp.p_value < 0.05
                    ? "[stationary]"
                    : "[WARNING: unit root not rejected]");
  return buf;
}

int cmd_test(const CommonOpts& o) {
  const auto [cause, effect] = load_pair(o);
  const unsigned workers = resolve_workers(o.workers);

  std::string report = "vinegc.test.report.v1\n";
  report += config_echo("test", o, workers);
  char buf[512];
  std::snprintf(buf, sizeof(buf), "seed: %llu\nT: %zu\n",
                static_cast<unsigned long long>(o.seed), cause.size());
  report += buf;
  report += pp_line(o.cause, cause);
  report += pp_line(o.effect, effect);

  GCConfig cfg;
  cfg.k = resolve_k(o.k_spec);
  cfg.N = o.N;
  cfg.B = o.B;
  cfg.T0 = o.T0;
  cfg.alpha = o.alpha;
  cfg.seed = o.seed;
  cfg.workers = workers;

  // Resolve the Markov order once on the pair so every vine test agrees.
  int k = cfg.k;
  if (k == 0) {
    k = select_order({effect, cause}, cfg.k_max, all_families()).k;
    std::snprintf(buf, sizeof(buf), "k: %d (AIC over 1..%d)\n", k, cfg.k_max);
  } else {
    std::snprintf(buf, sizeof(buf), "k: %d (fixed)\n", k);
  }
  report += buf;
  cfg.k = k;

  struct Direction {
    std::string label;
    const std::vector<double>* cause_series;
    const std::vector<double>* effect_series;
  };
  std::vector<Direction> directions = {
      {o.cause + " -> " + o.effect, &cause, &effect}};
  if (o.direction == "both") {
    directions.push_back({o.effect + " -> " + o.cause, &effect, &cause});
  }

  std::snprintf(buf, sizeof(buf), "%-24s %12s %12s %12s\n", "direction",
                "p_mvine", "p_split", "p_linear");
  report += buf;

  std::vector<std::string> machine_lines;
  for (const Direction& dir : directions) {
    GCConfig full = cfg;
    full.variant = TestVariant::full_sample;
    const GCTestResult r_full =
        mvine_test(*dir.effect_series, *dir.cause_series, full);

    GCConfig split = cfg;
    split.variant = TestVariant::split_sample;
    const GCTestResult r_split =
        mvine_test(*dir.effect_series, *dir.cause_series, split);

    const LinearGCResult r_lin =
        granger_linear(*dir.effect_series, *dir.cause_series, 0);

    std::snprintf(buf, sizeof(buf), "%-24s %9.4f%-3s %9.4f%-3s %9.4f%-3s\n",
                  dir.label.c_str(), r_full.p_value, stars(r_full.p_value),
                  r_split.p_value, stars(r_split.p_value), r_lin.p_value,
                  stars(r_lin.p_value));
    report += buf;

    std::snprintf(buf, sizeof(buf),
                  "record direction=\"%s\" p_mvine=%.6f p_split=%.6f "
                  "p_linear=%.6f linear_lag=%d\n",
                  dir.label.c_str(), r_full.p_value, r_split.p_value,
                  r_lin.p_value, r_lin.p);
    machine_lines.push_back(buf);
  }
  report += "signif: * p<0.1, ** p<0.05, *** p<0.01\n";

  if (o.format == "machine") {
    std::string machine = "format=vinegc.test.v1\n";
    machine += "seed=" + std::to_string(o.seed) + "\n";
    machine += "k=" + std::to_string(k) + "\n";
    for (const auto& l : machine_lines) machine += l;
    write_output(machine, o.out);
  } else {
    write_output(report, o.out);
  }
  return 0;
}

// Bivariate VAR log-determinant AIC for the fit report.
double var_aic(const std::vector<double>& x, const std::vector<double>& y,
               int p) {
  const int T = static_cast<int>(x.size());
  const int n = T - p;
  std::vector<std::vector<double>> design;
  design.emplace_back(n, 1.0);
  for (int j = 1; j <= p; ++j) {
    std::vector<double> lx(n), ly(n);
    for (int t = 0; t < n; ++t) {
      lx[t] = x[t + p - j];
      ly[t] = y[t + p - j];
    }
    design.push_back(std::move(lx));
    design.push_back(std::move(ly));
  }
  const OlsResult rx = ols(design, std::span<const double>(x).subspan(p));
  const OlsResult ry = ols(design, std::span<const double>(y).subspan(p));
  double sxx = 0, syy = 0, sxy = 0;
  for (int t = 0; t < n; ++t) {
    sxx += rx.residuals[t] * rx.residuals[t];
    syy += ry.residuals[t] * ry.residuals[t];
    sxy += rx.residuals[t] * ry.residuals[t];
  }
  const double det = (sxx / n) * (syy / n) - (sxy / n) * (sxy / n);
  const int n_params = 2 * (2 * p + 1);
  return n * std::log(std::max(det, 1e-300)) + 2.0 * n_params;
}

int cmd_fit(const CommonOpts& o) {
  const auto [cause, effect] = load_pair(o);
  std::string report = "vinegc.fit.report.v1\n";
  report += config_echo("fit", o, 1);
  char buf[256];

  double best_aic = std::numeric_limits<double>::infinity();
  int best_k = 1;
  std::vector<MVineModel> models;
  for (int k = 1; k <= 4; ++k) {
    models.push_back(fit_mvine({effect, cause}, k, all_families()));
    const double aic = models.back().aic();
    std::snprintf(buf, sizeof(buf), "mvine k=%d loglik=%.4f aic=%.4f\n", k,
                  models.back().loglik, aic);
    report += buf;
    if (aic < best_aic) {
      best_aic = aic;
      best_k = k;
    }
  }
  std::snprintf(buf, sizeof(buf), "selected_k: %d\n", best_k);
  report += buf;

  double best_var = std::numeric_limits<double>::infinity();
  int best_p = 1;
  for (int p = 1; p <= 10; ++p) {
    if (static_cast<int>(cause.size()) <= 2 * p + 2) break;
    const double a = var_aic(effect, cause, p);
    if (a < best_var) {
      best_var = a;
      best_p = p;
    }
  }
  std::snprintf(buf, sizeof(buf),
                "var aic=%.4f (p=%d lags); note: VAR AIC is on the data "
                "scale and is not directly comparable to the copula "
                "log-likelihood above\n",
                best_var, best_p);
  report += buf;

  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << serialize_model(models[best_k - 1]);
    report += "model_file: " + o.out + "\n";
  }
  std::cout << report;
  return 0;
}

int cmd_prep(const CommonOpts& o, const std::vector<std::string>& columns) {
  SeriesTable table =
      load_csv(o.input, columns, !o.no_header, !o.no_index);
  std::string report = "vinegc.prep.report.v1\n";
  if (table.dropped_rows > 0) {
    report += "dropped_rows: " + std::to_string(table.dropped_rows) + "\n";
  }
  std::vector<std::vector<double>> prepared;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::vector<double> s = table.columns[c];
    if (o.diff) s = first_difference(s);
    report += pp_line(table.names[c], s);
    prepared.push_back(std::move(s));
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    for (std::size_t c = 0; c < table.names.size(); ++c) {
      f << (c ? "," : "") << table.names[c];
    }
    f << "\n";
    for (std::size_t t = 0; t < prepared[0].size(); ++t) {
      for (std::size_t c = 0; c < prepared.size(); ++c) {
        char num[64];
        std::snprintf(num, sizeof(num), "%.12g", prepared[c][t]);
        f << (c ? "," : "") << num;
      }
      f << "\n";
    }
    report += "out: " + o.out + "\n";
  }
  std::cout << report;
  return 0;
}

struct SimulateOpts {
  std::string models = "S1,P1";
  std::string T_list = "100";
  std::string methods = "mvine,linear";
  std::string preset;
  int S = 0;
  int B = 0;
  int N = 0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out = "study";
  bool raw = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool is_power_model(DGPName m) {
  switch (m) {
    case DGPName::p1: case DGPName::p2: case DGPName::p3:
    case DGPName::p4: case DGPName::p5:
    case DGPName::p1k4: case DGPName::p2k4: case DGPName::p3k4:
    case DGPName::p4k4:
      return true;
    default:
      return false;
  }
}

int cmd_simulate(const SimulateOpts& so) {
  std::vector<DGPName> models;
  for (const auto& name : split_list(so.models)) {
    const auto m = dgp_from_name(name);
    if (!m) {
      std::string valid;
      for (DGPName d : all_dgps()) {
        valid += std::string(dgp_name(d)) + " ";
      }
      throw CLI::ValidationError("--models",
                                 "unknown model " + name + "; valid: " + valid);
    }
    models.push_back(*m);
  }
  std::vector<int> Ts;
  for (const auto& t : split_list(so.T_list)) Ts.push_back(std::stoi(t));
  std::vector<Method> methods;
  for (const auto& name : split_list(so.methods)) {
    const auto m = method_from_name(name);
    if (!m) {
      throw CLI::ValidationError("--methods",
                                 "unknown method " + name +
                                     "; valid: mvine split linear");
    }
    methods.push_back(*m);
  }

  int S_size = 200, S_power = 100, B = 100, N = 100;
  if (so.preset == "paper") {
    std::cerr << "warning: paper-scale preset (S=500, B=200, N=200) runs for "
                 "hours at desk hardware\n";
    S_size = S_power = 500;
    B = 200;
    N = 200;
  } else if (!so.preset.empty() && so.preset != "desk") {
    throw CLI::ValidationError("--preset", "must be desk or paper");
  }
  if (so.S > 0) S_size = S_power = so.S;
  if (so.B > 0) B = so.B;
  if (so.N > 0) N = so.N;

  StudyConfig sc;
  sc.T_values = Ts;
  sc.methods = methods;
  sc.gc.B = B;
  sc.gc.N = N;
  sc.gc.alpha = so.alpha;
  sc.workers = resolve_workers(so.workers);
  sc.seed = so.seed;
  sc.collect_raw = so.raw;

  MonteCarloReport merged;
  merged.seed = so.seed;
  merged.alpha = so.alpha;
  for (int pass = 0; pass < 2; ++pass) {
    sc.models.clear();
    for (DGPName m : models) {
      if (is_power_model(m) == (pass == 1)) sc.models.push_back(m);
    }
    if (sc.models.empty()) continue;
    sc.S = (pass == 1) ? S_power : S_size;
    MonteCarloReport part = run_study(sc);
    for (auto& cell : part.cells) merged.cells.push_back(std::move(cell));
  }

  write_output(format_report(merged), so.out + ".txt");
  write_output(format_report_machine(merged), so.out + ".csv");
  if (so.raw) write_output(format_raw_pvalues(merged), so.out + "_raw.csv");
  std::cout << format_report(merged);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"M-vine copula Granger-causality testing"};
  app.require_subcommand(1);

  CommonOpts o;
  SimulateOpts so;
  std::string prep_columns;

  auto add_common = [&](CLI::App* cmd, bool needs_pair) {
    cmd->add_option("--input", o.input, "input CSV path")->required();
    if (needs_pair) {
      cmd->add_option("--cause", o.cause, "candidate cause column")->required();
      cmd->add_option("--effect", o.effect, "predicted (effect) column")
          ->required();
    }
    cmd->add_flag("--diff", o.diff, "first-difference the series");
    cmd->add_flag("--no-header", o.no_header, "CSV has no header row");
    cmd->add_flag("--no-index", o.no_index,
                  "first CSV column is data, not period labels");
  };

  CLI::App* test = app.add_subcommand("test", "Granger-causality tests");
  add_common(test, true);
  test->add_option("--k", o.k_spec, "Markov order: auto or 1..4");
  test->add_option("--N", o.N, "predictions per time point");
  test->add_option("--B", o.B, "bootstrap replicates");
  test->add_option("--T0", o.T0, "first scored index (0 = T/2)");
  test->add_option("--alpha", o.alpha, "significance level");
  test->add_option("--seed", o.seed, "random seed");
  test->add_option("--workers", o.workers, "worker threads (0 = auto)");
  test->add_option("--variant", o.variant, "full or split (report shows both)");
  test->add_option("--format", o.format, "text or machine");
  test->add_option("--direction", o.direction, "both or forward");
  test->add_option("--out", o.out, "write the report here instead of stdout");

  CLI::App* fit = app.add_subcommand("fit", "order selection and model fit");
  add_common(fit, true);
  fit->add_option("--out", o.out, "write the selected model (JSON) here");

  CLI::App* prep = app.add_subcommand("prep", "stationarity preprocessing");
  add_common(prep, false);
  prep->add_option("--columns", prep_columns,
                   "comma-separated column names (default: all)");
  prep->add_option("--out", o.out, "write the prepared CSV here");

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo size/power study");
  sim->add_option("--models", so.models, "comma-separated DGP names");
  sim->add_option("--T", so.T_list, "comma-separated sample sizes");
  sim->add_option("--methods", so.methods, "comma-separated: mvine,split,linear");
  sim->add_option("--preset", so.preset, "desk or paper");
  sim->add_option("--S", so.S, "replicates per cell (overrides preset)");
  sim->add_option("--B", so.B, "bootstrap replicates");
  sim->add_option("--N", so.N, "predictions per time point");
  sim->add_option("--alpha", so.alpha, "significance level");
  sim->add_option("--seed", so.seed, "random seed");
  sim->add_option("--workers", so.workers, "worker threads (0 = auto)");
  sim->add_option("--out", so.out, "output file prefix");
  sim->add_flag("--raw", so.raw, "also dump raw per-replicate p-values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (test->parsed()) return cmd_test(o);
    if (fit->parsed()) return cmd_fit(o);
    if (prep->parsed()) return cmd_prep(o, split_list(prep_columns));
    if (sim->parsed()) return cmd_simulate(so);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
