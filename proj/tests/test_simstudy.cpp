#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support/oracles.hpp"
#include "vinegc/linear_gc.hpp"
#include "vinegc/simstudy.hpp"

using namespace vinegc;

namespace {

double lag_corr(const std::vector<double>& a, const std::vector<double>& b,
                int lag) {
  // corr(a_t, b_{t-lag})
  const int n = static_cast<int>(a.size()) - lag;
  double ma = 0, mb = 0;
  for (int t = 0; t < n; ++t) {
    ma += a[t + lag];
    mb += b[t];
  }
  ma /= n;
  mb /= n;
  double saa = 0, sbb = 0, sab = 0;
  for (int t = 0; t < n; ++t) {
    saa += (a[t + lag] - ma) * (a[t + lag] - ma);
    sbb += (b[t] - mb) * (b[t] - mb);
    sab += (a[t + lag] - ma) * (b[t] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("generate is deterministic given the seed") {
  DGPSpec spec{DGPName::p2, 200};
  std::mt19937_64 a(42), b(42);
  const auto s1 = generate(spec, a);
  const auto s2 = generate(spec, b);
  CHECK(s1.first == s2.first);
  CHECK(s1.second == s2.second);
}

TEST_CASE("S1 moments match the AR(1) population values") {
  DGPSpec spec{DGPName::s1, 100000};
  std::mt19937_64 rng(7);
  const auto [x, y] = generate(spec, rng);
  CHECK(std::abs(lag_corr(x, x, 1) - 0.5) < 0.01);
  CHECK(std::abs(lag_corr(x, y, 1)) < 0.01);  // x_t vs y_{t-1}
}

TEST_CASE("P1 regression recovers the stated coefficients") {
  DGPSpec spec{DGPName::p1, 100000};
  std::mt19937_64 rng(11);
  const auto [x, y] = generate(spec, rng);
  const int T = static_cast<int>(x.size());
  const int n = T - 1;
  std::vector<double> intercept(n, 1.0), lx(n), ly(n), resp(n);
  for (int t = 0; t < n; ++t) {
    lx[t] = x[t];
    ly[t] = y[t];
    resp[t] = x[t + 1];
  }
  const OlsResult fit = ols({intercept, lx, ly}, resp);
  CHECK(std::abs(fit.coefficients[1] - 0.5) < 0.02);
  CHECK(std::abs(fit.coefficients[2] - 0.5) < 0.02);
}

TEST_CASE("fourth-order variants stay stationary and carry k=4") {
  for (DGPName m : {DGPName::s1k4, DGPName::s2k4, DGPName::s3k4,
                    DGPName::p1k4, DGPName::p2k4, DGPName::p3k4,
                    DGPName::p4k4}) {
    DGPSpec spec{m, 3000};
    CHECK(spec.markov_order() == 4);
    std::mt19937_64 rng(3);
    const auto [x, y] = generate(spec, rng);
    double max_abs = 0.0;
    for (double v : x) max_abs = std::max(max_abs, std::abs(v));
    for (double v : y) max_abs = std::max(max_abs, std::abs(v));
    INFO("model ", dgp_name(m));
    CHECK(std::isfinite(max_abs));
    CHECK(max_abs < 1e3);
  }
  DGPSpec base{DGPName::p3, 100};
  CHECK(base.markov_order() == 1);
}

TEST_CASE("generate validates its inputs") {
  DGPSpec spec{DGPName::s1, 100, 50};  // burn-in below the floor
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(generate(spec, rng), std::invalid_argument);
}

TEST_CASE("dgp names round-trip") {
  for (DGPName m : all_dgps()) {
    const auto back = dgp_from_name(dgp_name(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK(!dgp_from_name("S9").has_value());
}

TEST_CASE("run_study on the linear method") {
  StudyConfig sc;
  sc.models = {DGPName::s1};
  sc.T_values = {100};
  sc.methods = {Method::linear};
  sc.S = 200;
  sc.workers = 2;
  sc.seed = 17;
  const MonteCarloReport rep = run_study(sc);
  REQUIRE(rep.cells.size() == 1);
  const CellResult& cell = rep.cells[0];
  CHECK(cell.n_completed == 200);
  CHECK(!cell.flagged);
  CHECK(cell.rejection_rate > 0.0 - 1e-12);
  CHECK(cell.rejection_rate < 0.12);
  CHECK(cell.mean_p > 0.3);
  CHECK(cell.mean_p < 0.7);
  CHECK(static_cast<int>(cell.raw_p.size()) == 200);

  SUBCASE("the report is independent of the worker count") {
    StudyConfig sc1 = sc;
    sc1.workers = 1;
    const MonteCarloReport rep1 = run_study(sc1);
    CHECK(format_report_machine(rep1) == format_report_machine(rep));
    CHECK(rep1.cells[0].raw_p == cell.raw_p);
  }
}

TEST_CASE("run_study validates inputs") {
  StudyConfig sc;
  sc.models = {DGPName::s1};
  sc.T_values = {100};
  sc.methods = {Method::linear};
  sc.S = 0;
  CHECK_THROWS_AS(run_study(sc), std::invalid_argument);
}

TEST_CASE("report formats") {
  StudyConfig sc;
  sc.models = {DGPName::s1, DGPName::p1};
  sc.T_values = {60};
  sc.methods = {Method::linear};
  sc.S = 20;
  sc.seed = 3;
  const MonteCarloReport rep = run_study(sc);
  REQUIRE(rep.cells.size() == 2);

  const std::string text = format_report(rep);
  CHECK(text.find("vinegc.study.v1") == 0);
  CHECK(text.find("S1") != std::string::npos);
  CHECK(text.find("P1") != std::string::npos);

  const std::string machine = format_report_machine(rep);
  CHECK(machine.find("model,T,method,") == 0);
  CHECK(machine.find("S1,60,linear,") != std::string::npos);

  const std::string raw = format_raw_pvalues(rep);
  // header plus one line per replicate per cell
  CHECK(std::count(raw.begin(), raw.end(), '\n') == 1 + 2 * 20);
}
