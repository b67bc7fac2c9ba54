#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "vinegc/gc_test.hpp"

namespace vinegc {

// Assessment models: S* generate no Granger causality from Y to X, P* do.
// The k4 variants are the fourth-order alternating-sign versions.
enum class DGPName {
  s1, s2, s3, s4, s5,
  p1, p2, p3, p4, p5,
  s1k4, s2k4, s3k4,
  p1k4, p2k4, p3k4, p4k4,
};

std::string_view dgp_name(DGPName m);
std::optional<DGPName> dgp_from_name(std::string_view name);
std::vector<DGPName> all_dgps();

struct DGPSpec {
  DGPName name = DGPName::s1;
  int T = 100;
  int burn_in = 200;

  int markov_order() const;  // 1 for the base models, 4 for the k4 variants
};

// Iterates the recursion from zero initial conditions, discards burn_in,
// returns T points. The x and y innovation streams derive independently
// from the generator state.
std::pair<std::vector<double>, std::vector<double>> generate(
    const DGPSpec& spec, std::mt19937_64& rng);

enum class Method { mvine, split_sample, linear };
std::string_view method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);

struct StudyConfig {
  std::vector<DGPName> models;
  std::vector<int> T_values;
  std::vector<Method> methods;
  int S = 100;  // replicates per cell
  GCConfig gc;  // N, B, alpha, candidates; k is taken from each model
  unsigned workers = 1;
  std::uint64_t seed = 1;
  int burn_in = 200;
  bool collect_raw = true;
};

struct CellResult {
  DGPName model;
  int T = 0;
  Method method;
  double rejection_rate = 0.0;
  double mean_p = 0.0;
  double sd_p = 0.0;
  int n_completed = 0;
  int S = 0;
  bool flagged = false;  // completion below 95%
  double wall_seconds = 0.0;
  std::vector<double> raw_p;  // per completed replicate, in replicate order
};

struct MonteCarloReport {
  std::vector<CellResult> cells;
  std::uint64_t seed = 0;
  double alpha = 0.05;
};

// Monte Carlo size/power study: for each (model, T) cell, S seeded datasets
// are generated and every requested method is applied to the same data.
// Replicates run in parallel; sub-streams derive from (seed, model, T,
// replicate), so the report does not depend on scheduling.
MonteCarloReport run_study(const StudyConfig& cfg);

// Aligned text table (no wall times, reproducible byte-for-byte).
std::string format_report(const MonteCarloReport& report);

// Machine-readable delimited records:
// model,T,method,rejection_rate,mean_p,sd_p,S,seed
std::string format_report_machine(const MonteCarloReport& report);

// One p-value per line for external plotting.
std::string format_raw_pvalues(const MonteCarloReport& report);

}  // namespace vinegc
