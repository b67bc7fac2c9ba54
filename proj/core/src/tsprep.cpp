#include "vinegc/tsprep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vinegc/linear_gc.hpp"

namespace vinegc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace and quotes
    auto begin = field.find_first_not_of(" \t\r\"");
    auto end = field.find_last_not_of(" \t\r\"");
    fields.push_back(begin == std::string::npos
                         ? std::string()
                         : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

SeriesTable load_csv(const std::string& path,
                     const std::vector<std::string>& columns, bool header,
                     bool index_column) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_csv: cannot open " + path);

  std::string line;
  std::vector<std::string> file_names;
  bool have_names = false;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    auto fields = split_csv_line(line);
    if (header && !have_names) {
      file_names = fields;
      have_names = true;
      continue;
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw std::invalid_argument("load_csv: empty table");

  const std::size_t ncol = header ? file_names.size() : rows[0].size();
  if (!header) {
    for (std::size_t c = 0; c < ncol; ++c) {
      file_names.push_back(std::to_string(c + 1));
    }
  }

  // Resolve requested columns to file positions.
  const std::size_t first_data = index_column ? 1 : 0;
  std::vector<std::size_t> want;
  std::vector<std::string> want_names;
  if (columns.empty()) {
    for (std::size_t c = first_data; c < ncol; ++c) {
      want.push_back(c);
      want_names.push_back(file_names[c]);
    }
  } else {
    for (const std::string& name : columns) {
      const auto it = std::find(file_names.begin(), file_names.end(), name);
      if (it == file_names.end()) {
        throw std::invalid_argument("load_csv: column not found: " + name);
      }
      want.push_back(static_cast<std::size_t>(it - file_names.begin()));
      want_names.push_back(name);
    }
  }
  if (want.empty()) throw std::invalid_argument("load_csv: no data columns");

  SeriesTable table;
  table.names = want_names;
  table.columns.resize(want.size());
  for (const auto& row : rows) {
    std::vector<double> values(want.size());
    bool ok = true;
    for (std::size_t i = 0; i < want.size() && ok; ++i) {
      ok = want[i] < row.size() && parse_double(row[want[i]], values[i]);
    }
    if (!ok) {
      ++table.dropped_rows;
      continue;
    }
    table.index.push_back(index_column && !row.empty() ? row[0]
                                                       : std::string());
    for (std::size_t i = 0; i < want.size(); ++i) {
      table.columns[i].push_back(values[i]);
    }
  }
  if (table.columns[0].empty()) {
    throw std::invalid_argument("load_csv: no parseable rows");
  }
  return table;
}

std::vector<double> first_difference(std::span<const double> s) {
  if (s.size() < 2) {
    throw std::invalid_argument("first_difference: need at least 2 points");
  }
  std::vector<double> out(s.size() - 1);
  for (std::size_t t = 0; t + 1 < s.size(); ++t) out[t] = s[t + 1] - s[t];
  return out;
}

namespace {

// Fuller's tabulated distribution of the studentised unit-root statistic,
// intercept case: rows by effective sample size, columns by probability.
constexpr std::array<double, 6> table_n = {25, 50, 100, 250, 500, 1e9};
constexpr std::array<double, 8> table_p = {0.01, 0.025, 0.05, 0.10,
                                           0.90, 0.95, 0.975, 0.99};
constexpr std::array<std::array<double, 8>, 6> table_crit = {{
    {-3.75, -3.33, -3.00, -2.62, -0.37, 0.00, 0.34, 0.72},
    {-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66},
    {-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63},
    {-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62},
    {-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61},
    {-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60},
}};

double interp_pvalue(double stat, double n_eff) {
  // interpolate the critical row in n, then the probability in stat
  std::array<double, 8> row{};
  if (n_eff <= table_n.front()) {
    row = table_crit.front();
  } else if (n_eff >= table_n.back()) {
    row = table_crit.back();
  } else {
    std::size_t hi = 1;
    while (table_n[hi] < n_eff) ++hi;
    const double w =
        (n_eff - table_n[hi - 1]) / (table_n[hi] - table_n[hi - 1]);
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = (1.0 - w) * table_crit[hi - 1][c] + w * table_crit[hi][c];
    }
  }
  if (stat <= row.front()) return 0.01;
  if (stat >= row.back()) return 0.99;
  std::size_t hi = 1;
  while (row[hi] < stat) ++hi;
  const double w = (stat - row[hi - 1]) / (row[hi] - row[hi - 1]);
  return (1.0 - w) * table_p[hi - 1] + w * table_p[hi];
}

}  // namespace

PPResult pp_test(std::span<const double> s, int bandwidth) {
  if (s.size() < 20) throw std::invalid_argument("pp_test: need n >= 20");
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  if (!(*lo < *hi)) throw std::invalid_argument("pp_test: constant series");

  const int n = static_cast<int>(s.size()) - 1;  // effective sample
  std::vector<double> response(s.begin() + 1, s.end());
  std::vector<double> lagged(s.begin(), s.end() - 1);
  std::vector<std::vector<double>> design;
  design.emplace_back(n, 1.0);
  design.push_back(lagged);
  const OlsResult fit = ols(design, response);

  const double rho = fit.coefficients[1];
  double mean_lag = 0.0;
  for (double v : lagged) mean_lag += v;
  mean_lag /= n;
  double ssy = 0.0;
  for (double v : lagged) ssy += (v - mean_lag) * (v - mean_lag);
  const double s2 = fit.rss / (n - 2);       // OLS residual variance
  const double se_rho = std::sqrt(s2 / ssy);
  const double t_rho = (rho - 1.0) / se_rho;

  const int q = bandwidth > 0
                    ? bandwidth
                    : static_cast<int>(4.0 * std::pow(n / 100.0, 0.25));
  const double gamma0 = fit.rss / n;
  double lambda2 = gamma0;
  for (int j = 1; j <= q; ++j) {
    double gj = 0.0;
    for (int t = j; t < n; ++t) gj += fit.residuals[t] * fit.residuals[t - j];
    gj /= n;
    lambda2 += 2.0 * (1.0 - static_cast<double>(j) / (q + 1)) * gj;
  }
  lambda2 = std::max(lambda2, 1e-12 * gamma0);

  const double lambda = std::sqrt(lambda2);
  const double z_tau = std::sqrt(gamma0 / lambda2) * t_rho -
                       (lambda2 - gamma0) / (2.0 * lambda) *
                           (n * se_rho / std::sqrt(s2));

  PPResult out;
  out.z_tau = z_tau;
  out.bandwidth = q;
  out.p_value = interp_pvalue(z_tau, n);
  return out;
}

}  // namespace vinegc
