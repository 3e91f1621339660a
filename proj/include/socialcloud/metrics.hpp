#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "engine.hpp"
#include "graph.hpp"
#include "types.hpp"
#include "workload.hpp"

namespace socialcloud {

/// F(x) sampled on a grid: fraction of completed tasks whose normalized
/// time is <= x. An empty sample keeps fractions empty and valid() false
/// rather than pretending zeros.
struct ecdf_series {
  std::vector<double> grid;
  std::vector<double> fractions;
  std::size_t sample_count = 0;
  bool valid() const { return sample_count > 0; }
};

/// Everything a cell reports besides the raw rows: the config echo that
/// names the cell, plus aggregate statistics.
struct config_echo {
  std::string graph_id;
  policy_kind policy = policy_kind::rr;
  double p = 0.0;
  bool outliers = true;
  std::string task_model;
  std::uint64_t seed = 0;
};

struct run_summary {
  config_echo echo;
  std::size_t completed = 0;
  std::size_t incomplete = 0;
  std::uint64_t resplits = 0;
  double frac_at_1 = 0.0;
  double frac_at_2 = 0.0;
  double mean_x = 0.0;
  double median_x = 0.0;
};

/// x = T_last / T_tot for a completed task.
inline double normalized_time(const task_outcome& o) {
  if (!o.completed)
    throw std::invalid_argument("normalized time is undefined for incomplete tasks");
  if (o.t_tot <= 0) throw std::invalid_argument("task size must be positive");
  return static_cast<double>(o.t_last) / static_cast<double>(o.t_tot);
}

inline std::vector<double> normalized_times(const std::vector<task_outcome>& outcomes) {
  std::vector<double> xs;
  xs.reserve(outcomes.size());
  for (const auto& o : outcomes)
    if (o.completed) xs.push_back(normalized_time(o));
  return xs;
}

inline ecdf_series ecdf(const std::vector<double>& xs, const std::vector<double>& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i]))
      throw std::invalid_argument("ecdf grid must be strictly ascending");
  ecdf_series s;
  s.grid = grid;
  s.sample_count = xs.size();
  if (xs.empty()) return s;
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  s.fractions.reserve(grid.size());
  for (double g : grid) {
    const auto n_le =
        std::upper_bound(sorted.begin(), sorted.end(), g) - sorted.begin();
    s.fractions.push_back(static_cast<double>(n_le) /
                          static_cast<double>(sorted.size()));
  }
  return s;
}

/// Fraction of completed tasks with x <= threshold; the ECDF at one point.
inline double fraction_at(const std::vector<double>& xs, double threshold) {
  if (xs.empty()) return 0.0;
  std::size_t n = 0;
  for (double x : xs)
    if (x <= threshold) ++n;
  return static_cast<double>(n) / static_cast<double>(xs.size());
}

inline run_summary summarize(const std::vector<task_outcome>& outcomes,
                             const config_echo& echo) {
  run_summary s;
  s.echo = echo;
  std::vector<double> xs = normalized_times(outcomes);
  s.completed = xs.size();
  s.incomplete = outcomes.size() - xs.size();
  for (const auto& o : outcomes) s.resplits += o.resplits;
  if (xs.empty()) return s;
  s.frac_at_1 = fraction_at(xs, 1.0);
  s.frac_at_2 = fraction_at(xs, 2.0);
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean_x = sum / static_cast<double>(xs.size());
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  s.median_x = xs.size() % 2 ? xs[mid] : (xs[mid - 1] + xs[mid]) / 2.0;
  return s;
}

namespace detail {

inline std::string fmt_double(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

/// The per-row config echo, identical in both CSV schemas.
inline std::string echo_prefix(const config_echo& e) {
  return e.graph_id + "," + socialcloud::to_string(e.policy) + "," +
         fmt_double("%.6g", e.p) + "," + (e.outliers ? "on" : "off") + "," +
         e.task_model + "," + std::to_string(e.seed);
}

} // namespace detail

inline constexpr const char* task_csv_header =
    "graph,policy,p,outlier,task_model,seed,task_id,outsourcer,degree,t_tot,t_last,x,resplits";
inline constexpr const char* ecdf_csv_header =
    "graph,policy,p,outlier,task_model,seed,grid_x,fraction";

/// Per-task rows, completed tasks only (the schema has no completed column;
/// incomplete tasks are counted in the ecdf file's summary trailer).
inline void emit_task_csv(std::ostream& out, const config_echo& echo, const graph& g,
                          const std::vector<task_outcome>& outcomes) {
  out << task_csv_header << '\n';
  const std::string prefix = detail::echo_prefix(echo);
  for (const auto& o : outcomes) {
    if (!o.completed) continue;
    out << prefix << ',' << o.task << ',' << o.outsourcer << ','
        << g.degree(o.outsourcer) << ','
        << detail::fmt_double("%.6f", micro_to_units(o.t_tot)) << ','
        << detail::fmt_double("%.6f", micro_to_units(o.t_last)) << ','
        << detail::fmt_double("%.6f", o.x) << ',' << o.resplits << '\n';
  }
}

/// ECDF rows plus a '#' summary trailer (comment lines keep the file a
/// single self-describing artifact while staying byte-deterministic).
inline void emit_ecdf_csv(std::ostream& out, const ecdf_series& series,
                          const run_summary& s) {
  out << ecdf_csv_header << '\n';
  const std::string prefix = detail::echo_prefix(s.echo);
  if (series.valid()) {
    for (std::size_t i = 0; i < series.grid.size(); ++i)
      out << prefix << ',' << detail::fmt_double("%.6f", series.grid[i]) << ','
          << detail::fmt_double("%.6f", series.fractions[i]) << '\n';
  }
  out << "# completed " << s.completed << " incomplete " << s.incomplete
      << " resplits " << s.resplits << '\n';
  if (s.completed > 0) {
    out << "# frac_at_1 " << detail::fmt_double("%.6f", s.frac_at_1) << " frac_at_2 "
        << detail::fmt_double("%.6f", s.frac_at_2) << " mean_x "
        << detail::fmt_double("%.6f", s.mean_x) << " median_x "
        << detail::fmt_double("%.6f", s.median_x) << '\n';
  } else {
    out << "# frac_at_1 na frac_at_2 na mean_x na median_x na\n";
  }
  out << "# denominator: completed tasks only; incomplete tasks counted above\n";
}

inline void emit_results(const std::string& task_path, const std::string& ecdf_path,
                         const config_echo& echo, const graph& g,
                         const std::vector<task_outcome>& outcomes,
                         const ecdf_series& series, const run_summary& summary) {
  std::ofstream tf(task_path);
  if (!tf) throw std::runtime_error("cannot open for writing: " + task_path);
  emit_task_csv(tf, echo, g, outcomes);
  if (!tf.flush()) throw std::runtime_error("write failed: " + task_path);
  std::ofstream ef(ecdf_path);
  if (!ef) throw std::runtime_error("cannot open for writing: " + ecdf_path);
  emit_ecdf_csv(ef, series, summary);
  if (!ef.flush()) throw std::runtime_error("write failed: " + ecdf_path);
}

/// Grid LO..HI in STEP increments, inclusive of HI up to float slack.
inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0) || hi < lo) throw std::invalid_argument("grid needs lo <= hi, step > 0");
  std::vector<double> g;
  for (std::size_t i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + step * 1e-9) break;
    g.push_back(v);
  }
  return g;
}

} // namespace socialcloud
