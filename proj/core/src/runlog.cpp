#include "frictorq/runlog.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace frictorq {

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SeriesStats {
  double rms = 0.0, max = 0.0;
};

SeriesStats column_stats(const RunLog& log, int c) {
  SeriesStats st;
  if (c < 0 || log.rows.empty()) return st;
  double sum2 = 0.0;
  for (const auto& row : log.rows) {
    const double v = std::abs(row[c]);
    sum2 += v * v;
    st.max = std::max(st.max, v);
  }
  st.rms = std::sqrt(sum2 / static_cast<double>(log.rows.size()));
  return st;
}

double ratio(double a, double b) {
  if (a == b) return 1.0;
  return b / a;
}

}  // namespace

int RunLog::col(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void RunLog::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("run log row width mismatch");
  rows.push_back(std::move(row));
}

void RunLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ',';
    out << columns[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_value(row[i]);
    }
    out << '\n';
  }
}

RunMetrics run_metrics(const RunLog& log) {
  RunMetrics m;
  const SeriesStats s = column_stats(log, log.col("err_s_norm"));
  m.rms_s = s.rms;
  m.max_s = s.max;

  const int cx = log.col("com_x");
  const int rx = log.col("com_ref_x");
  if (cx >= 0 && rx >= 0 && !log.rows.empty()) {
    m.has_com = true;
    double sum2 = 0.0;
    for (const auto& row : log.rows) {
      double e2 = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double d = row[cx + k] - row[rx + k];
        e2 += d * d;
      }
      sum2 += e2;
      m.max_com = std::max(m.max_com, std::sqrt(e2));
    }
    m.rms_com = std::sqrt(sum2 / static_cast<double>(log.rows.size()));
  }

  const int h = log.col("err_hlin_norm");
  if (h >= 0) {
    m.has_hlin = true;
    const SeriesStats hs = column_stats(log, h);
    m.rms_hlin = hs.rms;
    m.max_hlin = hs.max;
  }
  return m;
}

CompareReport compare_runs(const RunLog& a, const RunLog& b) {
  if (a.rows.empty() || b.rows.empty()) throw std::invalid_argument("compare_runs: empty log");
  const int ta = a.col("t");
  const int tb = b.col("t");
  if (ta < 0 || tb < 0 || a.rows.size() != b.rows.size()) {
    throw std::invalid_argument("compare_runs: sampling grids differ");
  }
  for (size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i][ta] != b.rows[i][tb]) {
      throw std::invalid_argument("compare_runs: sampling grids differ");
    }
  }
  CompareReport rep;
  rep.a = run_metrics(a);
  rep.b = run_metrics(b);
  rep.ratio_rms_s = ratio(rep.a.rms_s, rep.b.rms_s);
  rep.ratio_max_s = ratio(rep.a.max_s, rep.b.max_s);
  if (rep.a.has_com && rep.b.has_com) {
    rep.ratio_rms_com = ratio(rep.a.rms_com, rep.b.rms_com);
    rep.ratio_max_com = ratio(rep.a.max_com, rep.b.max_com);
  }
  if (rep.a.has_hlin && rep.b.has_hlin) {
    rep.ratio_rms_hlin = ratio(rep.a.rms_hlin, rep.b.rms_hlin);
    rep.ratio_max_hlin = ratio(rep.a.max_hlin, rep.b.max_hlin);
  }
  return rep;
}

}  // namespace frictorq
