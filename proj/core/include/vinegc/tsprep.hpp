#pragma once

#include <span>
#include <string>
#include <vector>

namespace vinegc {

struct SeriesTable {
  std::vector<std::string> names;            // selected column labels
  std::vector<std::string> index;            // period labels (opaque strings)
  std::vector<std::vector<double>> columns;  // equal-length numeric columns
  int dropped_rows = 0;                      // rows lost to gaps/parse errors
};

// Comma-delimited ingestion; the first file column holds period labels by
// convention (disable with index_column = false). Column selection is by
// header name when header is true, otherwise by 1-based position written as
// a string. Rows whose selected fields fail to parse are dropped and counted.
SeriesTable load_csv(const std::string& path,
                     const std::vector<std::string>& columns, bool header,
                     bool index_column = true);

std::vector<double> first_difference(std::span<const double> s);

struct PPResult {
  double z_tau = 0.0;
  double p_value = 1.0;  // interpolated, clamped to [0.01, 0.99]
  int bandwidth = 0;
};

// Phillips-Perron unit-root test, intercept specification, Bartlett-kernel
// long-run variance. bandwidth <= 0 selects floor(4 (n/100)^{1/4}).
// The null hypothesis is a unit root.
PPResult pp_test(std::span<const double> s, int bandwidth = 0);

}  // namespace vinegc
