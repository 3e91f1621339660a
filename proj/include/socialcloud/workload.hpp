#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace socialcloud {

/// Task size distribution. `constant` always yields `mean`; `uniform` draws
/// an integer micro amount from [mean - spread, mean + spread] inclusive.
struct task_size_model {
  enum class kind { constant, uniform };
  kind dist = kind::constant;
  work_micro mean = 1000 * micro_per_unit;
  work_micro spread = 0;

  static task_size_model constant(double units) {
    task_size_model m;
    m.dist = kind::constant;
    m.mean = units_to_micro(units);
    m.spread = 0;
    m.validate();
    return m;
  }

  static task_size_model uniform(double lo_units, double hi_units) {
    task_size_model m;
    m.dist = kind::uniform;
    const work_micro lo = units_to_micro(lo_units);
    const work_micro hi = units_to_micro(hi_units);
    if (lo > hi) throw std::invalid_argument("uniform task size: lo > hi");
    m.mean = (lo + hi) / 2;
    m.spread = (hi - lo) / 2;
    if (m.mean - m.spread != lo || m.mean + m.spread != hi)
      throw std::invalid_argument("uniform task size: bounds must have integer midpoint");
    m.validate();
    return m;
  }

  void validate() const {
    if (spread < 0) throw std::invalid_argument("task size spread must be >= 0");
    if (mean - spread <= 0)
      throw std::invalid_argument("task sizes must stay positive");
  }

  /// "const:<units>" or "uniform:<lo>:<hi>", the CLI / CSV spelling.
  std::string to_string() const {
    if (dist == kind::constant) return "const:" + format_units(mean);
    return "uniform:" + format_units(mean - spread) + ":" + format_units(mean + spread);
  }

  static std::string format_units(work_micro m) {
    if (m % micro_per_unit == 0) return std::to_string(m / micro_per_unit);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", micro_to_units(m));
    std::string s(buf);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  }

  static task_size_model parse(const std::string& text);
};

inline task_size_model task_size_model::parse(const std::string& text) {
  const auto c1 = text.find(':');
  if (c1 == std::string::npos)
    throw std::invalid_argument("task model needs 'const:T' or 'uniform:LO:HI', got: " + text);
  const std::string head = text.substr(0, c1);
  try {
    if (head == "const") {
      return constant(std::stod(text.substr(c1 + 1)));
    }
    if (head == "uniform") {
      const auto c2 = text.find(':', c1 + 1);
      if (c2 == std::string::npos)
        throw std::invalid_argument("uniform task model needs two bounds: " + text);
      return uniform(std::stod(text.substr(c1 + 1, c2 - c1 - 1)),
                     std::stod(text.substr(c2 + 1)));
    }
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("task model bound out of range: " + text);
  }
  throw std::invalid_argument("unknown task model kind: " + head);
}

/// One outsourced task: created at virtual time zero in batch mode.
struct task_spec {
  task_id id = 0;
  node_id outsourcer = 0;
  work_micro total = 0;
};

/// A task's slice on one worker. `assigned` is the amount given at this
/// split; `generation` counts how many redistributions the parent has seen.
struct subtask {
  task_id task = 0;
  node_id worker = 0;
  work_micro assigned = 0;
  std::uint32_t generation = 0;
};

/// Bernoulli(p) pass over nodes in ascending id order. Nodes without
/// neighbors cannot outsource and are skipped without consuming randomness;
/// their count is reported so callers can surface it.
struct outsourcer_sample {
  std::vector<node_id> outsourcers;
  std::size_t skipped_isolated = 0;
};

inline outsourcer_sample sample_outsourcers(const graph& g, double p, split_mix64& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("outsourcing probability must be in [0, 1]");
  outsourcer_sample out;
  for (node_id v = 0; v < g.node_count(); ++v) {
    if (g.degree(v) == 0) {
      ++out.skipped_isolated;
      continue;
    }
    if (rng.next_double() < p) out.outsourcers.push_back(v);
  }
  return out;
}

inline work_micro draw_task_size(const task_size_model& m, split_mix64& rng) {
  if (m.dist == task_size_model::kind::constant) return m.mean;
  const std::uint64_t span = static_cast<std::uint64_t>(2 * m.spread) + 1;
  return (m.mean - m.spread) + static_cast<work_micro>(rng.next_below(span));
}

/// Split a task evenly over the outsourcer's neighbors: every neighbor gets
/// floor(total / d) and the last (highest id) also takes the remainder, so
/// the shares sum to the task exactly.
inline std::vector<subtask> split_task(const task_spec& t, const graph& g) {
  const auto nbrs = g.neighbors(t.outsourcer);
  if (nbrs.empty())
    throw std::invalid_argument("cannot split a task for a node with no neighbors");
  const work_micro share = t.total / static_cast<work_micro>(nbrs.size());
  const work_micro rem = t.total % static_cast<work_micro>(nbrs.size());
  std::vector<subtask> parts;
  parts.reserve(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    subtask s;
    s.task = t.id;
    s.worker = nbrs[i];
    s.assigned = share + (i + 1 == nbrs.size() ? rem : 0);
    s.generation = 0;
    parts.push_back(s);
  }
  return parts;
}

struct workload {
  std::vector<task_spec> tasks;           // ascending by outsourcer id; ids 0..k-1
  std::vector<std::vector<subtask>> splits; // indexed by task id
  std::size_t skipped_isolated = 0;
};

/// Batch-mode workload: sample who outsources, then draw sizes (ascending
/// outsourcer order, matching the documented RNG stream), then split.
inline workload build_workload(const graph& g, double p, const task_size_model& model,
                               split_mix64& rng) {
  workload w;
  auto sample = sample_outsourcers(g, p, rng);
  w.skipped_isolated = sample.skipped_isolated;
  w.tasks.reserve(sample.outsourcers.size());
  for (std::size_t i = 0; i < sample.outsourcers.size(); ++i) {
    task_spec t;
    t.id = static_cast<task_id>(i);
    t.outsourcer = sample.outsourcers[i];
    t.total = draw_task_size(model, rng);
    w.tasks.push_back(t);
  }
  w.splits.reserve(w.tasks.size());
  for (const auto& t : w.tasks) w.splits.push_back(split_task(t, g));
  return w;
}

} // namespace socialcloud
