#pragma once

#include <string>
#include <vector>

#include "frictorq/types.hpp"

namespace frictorq {

/// Column-labeled time series sampled at the outer control rate. Values are
/// written as CSV with 17 significant digits, so identical runs produce
/// byte-identical files.
struct RunLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int col(const std::string& name) const;
  void add_row(std::vector<double> row);
  void write_csv(const std::string& path) const;
};

/// Tracking metrics over one run. CoM and momentum entries are only
/// meaningful when the log carries those columns.
struct RunMetrics {
  double rms_s = 0.0, max_s = 0.0;
  double rms_com = 0.0, max_com = 0.0;
  double rms_hlin = 0.0, max_hlin = 0.0;
  bool has_com = false;
  bool has_hlin = false;
};

RunMetrics run_metrics(const RunLog& log);

struct CompareReport {
  RunMetrics a, b;
  double ratio_rms_s = 1.0, ratio_max_s = 1.0;
  double ratio_rms_com = 1.0, ratio_max_com = 1.0;
  double ratio_rms_hlin = 1.0, ratio_max_hlin = 1.0;
};

/// Metrics for two runs on the same sampling grid plus b/a ratios.
/// Throws std::invalid_argument when the grids differ or a log is empty.
CompareReport compare_runs(const RunLog& a, const RunLog& b);

}  // namespace frictorq
