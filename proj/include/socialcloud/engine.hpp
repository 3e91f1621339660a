#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"
#include "types.hpp"
#include "worker.hpp"
#include "workload.hpp"

namespace socialcloud {

/// Straggler detection reading. `all_finished` re-splits only when every
/// other live share of the task is done (the canonical reading);
/// `any_idle` is the looser alternative: after any sibling completion the
/// largest live share may be re-split onto idle neighbors.
enum class straggler_trigger { all_finished, any_idle };

/// Per-node worker failure: each node with degree >= 1 fails independently
/// with probability `q` at a time drawn uniformly on [0, span] micro-units.
struct failure_spec {
  double q = 0.0;
  double span_units = 0.0;
};

struct sim_config {
  policy_kind policy = policy_kind::rr;
  bool handle_outliers = true;
  double theta_units = 1.0; // re-split quantum; shares below it never split
  straggler_trigger trigger = straggler_trigger::all_finished;
  std::optional<failure_spec> failures;
  /// Deterministic failure schedule (node, time in units), applied in
  /// addition to (or instead of) the random spec. Meant for tests.
  std::vector<std::pair<node_id, double>> forced_failures;
  std::uint64_t seed = 0;
  overhead_mode overhead = overhead_mode::centralized;
  bool record_trace = false;

  void validate() const {
    if (theta_units < 0) throw std::invalid_argument("theta must be >= 0");
    if (failures && !(failures->q >= 0.0 && failures->q <= 1.0))
      throw std::invalid_argument("failure probability must be in [0, 1]");
    if (failures && failures->span_units < 0)
      throw std::invalid_argument("failure time span must be >= 0");
  }
};

struct task_outcome {
  task_id task = 0;
  node_id outsourcer = 0;
  work_micro t_tot = 0;  // task size == dedicated-machine time
  time_micro t_last = 0; // virtual finish time of the last share
  double x = 0.0;        // t_last / t_tot, meaningful when completed
  std::uint32_t resplits = 0;
  bool completed = false;
};

/// `sync_rounds` is 1 in batch mode: one recruitment round, accounted
/// analytically (2d centralized, d(d-1) decentralized per group of d).
struct overhead_report {
  overhead_mode mode = overhead_mode::centralized;
  std::uint64_t sync_rounds = 1;
  std::uint64_t total_messages = 0;
  std::string asymptotic_note =
      "centralized scales O(n) per sync round; decentralized O(n^2)";
};

struct sim_result {
  std::vector<task_outcome> outcomes; // ascending task id, one per input task
  std::vector<std::string> trace;     // "time kind worker task remaining" lines
  overhead_report overhead;
  std::uint64_t total_resplits = 0;
  std::size_t incomplete = 0;
};

/// Control-plane cost of synchronizing one group of d nodes.
inline std::uint64_t control_messages(overhead_mode mode, std::uint64_t d) {
  if (d < 1) throw std::invalid_argument("group size must be >= 1");
  return mode == overhead_mode::centralized ? 2 * d : d * (d - 1);
}

/// Whole-graph accounting: every node's neighbor group, one sync round.
/// Centralized totals 2*sum(d) = 4m; decentralized sum(d(d-1)).
inline overhead_report total_control_overhead(const graph& g, overhead_mode mode) {
  overhead_report r;
  r.mode = mode;
  for (node_id v = 0; v < g.node_count(); ++v) {
    const std::uint64_t d = g.degree(v);
    if (d >= 1) r.total_messages += control_messages(mode, d);
  }
  return r;
}

/// Same, restricted to an explicit outsourcer set (a run's actual groups).
inline overhead_report total_control_overhead(const graph& g, overhead_mode mode,
                                              const std::vector<node_id>& outsourcers) {
  overhead_report r;
  r.mode = mode;
  for (node_id v : outsourcers) {
    const std::uint64_t d = g.degree(v);
    if (d >= 1) r.total_messages += control_messages(mode, d);
  }
  return r;
}

namespace detail {

struct sim_event {
  time_micro t;
  std::uint8_t kind; // 0 completion, 1 failure; completions first on ties
  node_id worker;
  std::uint64_t version;
  friend bool operator>(const sim_event& a, const sim_event& b) {
    if (a.t != b.t) return a.t > b.t;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.worker != b.worker) return a.worker > b.worker;
    return a.version > b.version;
  }
};

inline std::string format_time(time_micro t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", micro_to_units(t));
  return buf;
}

/// Whole simulation state for one run. Header-internal; the public surface
/// is run_simulation below.
class simulation {
public:
  simulation(const graph& g, const std::vector<task_spec>& tasks,
             const std::vector<std::vector<subtask>>& splits, const sim_config& cfg,
             split_mix64* rng)
      : g_(g), specs_(tasks), cfg_(cfg) {
    cfg.validate();
    validate_splits(splits);
    theta_eff_ = std::max<work_micro>(units_to_micro(cfg.theta_units), 1);

    workers_.reserve(g.node_count());
    for (node_id v = 0; v < g.node_count(); ++v) workers_.emplace_back(v, cfg.policy);
    version_.assign(g.node_count(), 0);
    alive_.assign(g.node_count(), true);
    task_of_.assign(g.node_count(), no_task);

    tasks_.resize(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].total <= 0) throw std::invalid_argument("task size must be positive");
      if (task_of_[tasks[i].outsourcer] != no_task)
        throw std::invalid_argument("one task per outsourcer in batch mode");
      tasks_[i].outsourcer = tasks[i].outsourcer;
      tasks_[i].total = tasks[i].total;
      task_of_[tasks[i].outsourcer] = static_cast<task_id>(i);
    }

    for (std::size_t i = 0; i < splits.size(); ++i)
      for (const auto& s : splits[i]) enqueue_share(s.task, s.worker, s.assigned, 0);

    schedule_failures(rng);
  }

  sim_result run() {
    while (!events_.empty()) {
      const time_micro t = events_.top().t;
      step_instant(t);
    }
    return finish();
  }

private:
  static constexpr task_id no_task = UINT32_MAX;

  struct task_rt {
    node_id outsourcer = 0;
    work_micro total = 0;
    work_micro executed = 0; // exact, over completed and closed shares
    work_micro parked = 0;   // failure work with no idle neighbor yet
    std::uint32_t live = 0;
    std::vector<node_id> holders;
    std::uint32_t gen_completions = 0; // completions since last topology change
    std::uint32_t resplits = 0;
    bool completed = false;
    time_micro t_last = 0;
  };

  void validate_splits(const std::vector<std::vector<subtask>>& splits) const {
    if (splits.size() != specs_.size())
      throw std::invalid_argument("one split list per task required");
    for (std::size_t i = 0; i < splits.size(); ++i) {
      const auto& spec = specs_[i];
      const auto nbrs = g_.neighbors(spec.outsourcer);
      work_micro sum = 0;
      for (const auto& s : splits[i]) {
        if (s.task != spec.id) throw std::invalid_argument("split/task id mismatch");
        if (!std::binary_search(nbrs.begin(), nbrs.end(), s.worker))
          throw std::invalid_argument("split assigns work to a non-neighbor");
        if (s.assigned < 0) throw std::invalid_argument("negative share in split");
        sum += s.assigned;
      }
      if (sum != spec.total)
        throw std::invalid_argument("split does not conserve the task size");
    }
  }

  void schedule_failures(split_mix64* rng) {
    if (cfg_.failures && cfg_.failures->q > 0.0) {
      if (rng == nullptr)
        throw std::invalid_argument(
            "random failures draw from the cell's random stream; pass it in");
      const auto span = units_to_micro(cfg_.failures->span_units);
      for (node_id v = 0; v < g_.node_count(); ++v) {
        if (g_.degree(v) == 0) continue;
        if (rng->next_double() < cfg_.failures->q) {
          const auto ft = static_cast<time_micro>(
              rng->next_below(static_cast<std::uint64_t>(span) + 1));
          events_.push({ft, 1, v, 0});
        }
      }
    }
    for (const auto& [node, when] : cfg_.forced_failures) {
      if (node >= g_.node_count()) throw std::invalid_argument("forced failure node id");
      events_.push({units_to_micro(when), 1, node, 0});
    }
  }

  // --- share movement ------------------------------------------------

  void reschedule(node_id w) {
    ++version_[w];
    if (const auto nt = workers_[w].next_completion())
      events_.push({*nt, 0, w, version_[w]});
  }

  void enqueue_share(task_id tid, node_id w, work_micro amount, time_micro t) {
    const bool was_idle = !workers_[w].busy();
    workers_[w].enqueue(tid, tasks_[tid].outsourcer, amount, t);
    reschedule(w);
    tasks_[tid].live += 1;
    tasks_[tid].holders.push_back(w);
    if (was_idle) notify_neighbors(w);
  }

  void drop_holder(task_rt& rt, node_id w) {
    rt.live -= 1;
    auto& h = rt.holders;
    h.erase(std::find(h.begin(), h.end(), w));
  }

  /// Split `amount` over the first min(|idle|, amount) idle nodes so every
  /// share is at least one micro; the last target absorbs the residue.
  void distribute(task_id tid, work_micro amount, const std::vector<node_id>& idle,
                  time_micro t) {
    if (amount <= 0) return;
    auto& rt = tasks_[tid];
    rt.gen_completions = 0;
    const auto k = static_cast<work_micro>(
        std::min<std::uint64_t>(idle.size(), static_cast<std::uint64_t>(amount)));
    const work_micro share = amount / k;
    const work_micro rem = amount % k;
    for (work_micro i = 0; i < k; ++i)
      enqueue_share(tid, idle[static_cast<std::size_t>(i)],
                    share + (i + 1 == k ? rem : 0), t);
  }

  std::vector<node_id> idle_neighbors(node_id u) const {
    std::vector<node_id> out;
    for (node_id v : g_.neighbors(u))
      if (alive_[v] && !workers_[v].busy()) out.push_back(v);
    return out;
  }

  /// Re-check hook: any idle/alive status flip of `w` can change I(u) for
  /// every adjacent outsourcer, so their tasks re-enter the pending set.
  void notify_neighbors(node_id w) {
    for (node_id u : g_.neighbors(w)) {
      const task_id tid = task_of_[u];
      if (tid == no_task) continue;
      const auto& rt = tasks_[tid];
      if (rt.completed) continue;
      if (rt.parked > 0 || rt.gen_completions >= 1) pending_.insert(tid);
    }
  }

  // --- one time instant ----------------------------------------------

  void step_instant(time_micro t) {
    std::vector<std::pair<node_id, std::vector<worker_share>>> completions;
    std::vector<node_id> failures;
    while (!events_.empty() && events_.top().t == t) {
      const auto ev = events_.top();
      events_.pop();
      if (ev.kind == 0) {
        if (ev.version != version_[ev.worker]) continue; // superseded schedule
        auto due = workers_[ev.worker].collect_due(t);
        reschedule(ev.worker);
        completions.emplace_back(ev.worker, std::move(due));
      } else {
        failures.push_back(ev.worker);
      }
    }

    for (auto& [w, due] : completions) {
      for (const auto& share : due) on_completion(w, share, t);
      if (!workers_[w].busy()) notify_neighbors(w);
    }
    for (node_id w : failures) on_failure(w, t);
    settle_triggers(t);
  }

  void on_completion(node_id w, const worker_share& share, time_micro t) {
    auto& rt = tasks_[share.task];
    drop_holder(rt, w);
    rt.executed += share.assigned;
    rt.gen_completions += 1;
    if (cfg_.record_trace)
      trace_.push_back(format_time(t) + " complete " + std::to_string(w) + " " +
                       std::to_string(share.task) + " 0");
    if (rt.live == 0 && rt.parked == 0) {
      if (rt.executed != rt.total)
        throw std::logic_error("work conservation violated for task " +
                               std::to_string(share.task));
      rt.completed = true;
      rt.t_last = t;
    } else {
      pending_.insert(share.task);
    }
  }

  void on_failure(node_id w, time_micro t) {
    if (!alive_[w]) return; // duplicate forced failure
    alive_[w] = false;
    if (workers_[w].busy()) {
      auto drained = workers_[w].drain_all(t);
      reschedule(w); // invalidates the stale completion event
      for (const auto& d : drained) {
        auto& rt = tasks_[d.task];
        drop_holder(rt, w);
        rt.executed += d.assigned - d.remaining;
        if (cfg_.record_trace)
          trace_.push_back(format_time(t) + " fail " + std::to_string(w) + " " +
                           std::to_string(d.task) + " " +
                           format_time(d.remaining));
        // Failure redistribution bypasses theta: stalling the quantum guard
        // here would strand the work and break conservation.
        const auto idle = idle_neighbors(rt.outsourcer);
        if (idle.empty()) {
          rt.parked += d.remaining;
          rt.gen_completions = 0;
          pending_.insert(d.task);
        } else {
          distribute(d.task, d.remaining, idle, t);
        }
      }
    } else if (cfg_.record_trace) {
      trace_.push_back(format_time(t) + " fail " + std::to_string(w) + " - 0");
    }
    notify_neighbors(w);
  }

  // --- straggler / parked-work fixed point ----------------------------

  bool armed(const task_rt& rt) const {
    if (rt.completed || rt.parked > 0 || rt.gen_completions == 0) return false;
    if (cfg_.trigger == straggler_trigger::all_finished) return rt.live == 1;
    return rt.live >= 1;
  }

  node_id pick_straggler(task_id tid, const task_rt& rt, time_micro t) {
    if (cfg_.trigger == straggler_trigger::all_finished) return rt.holders.front();
    node_id best = rt.holders.front();
    work_micro best_rem = -1;
    for (node_id h : rt.holders) {
      const work_micro rem = workers_[h].remaining_of(tid, t);
      if (rem > best_rem || (rem == best_rem && h < best)) {
        best = h;
        best_rem = rem;
      }
    }
    return best;
  }

  /// Evaluate queued re-checks until quiescent. Each evaluation may move
  /// work (changing idle sets and queueing further checks); a task fires at
  /// most once per instant because firing resets its completion counter.
  void settle_triggers(time_micro t) {
    while (!pending_.empty()) {
      const task_id tid = *pending_.begin();
      pending_.erase(pending_.begin());
      auto& rt = tasks_[tid];
      if (rt.completed) continue;
      if (rt.parked > 0) {
        const auto idle = idle_neighbors(rt.outsourcer);
        if (idle.empty()) continue;
        const work_micro amount = rt.parked;
        rt.parked = 0;
        distribute(tid, amount, idle, t);
        continue;
      }
      if (!armed(rt) || !cfg_.handle_outliers) continue;
      const node_id z = pick_straggler(tid, rt, t);
      auto idle = idle_neighbors(rt.outsourcer);
      idle.erase(std::remove(idle.begin(), idle.end(), z), idle.end());
      if (idle.empty()) continue;
      const work_micro r = workers_[z].remaining_of(tid, t);
      if (r < theta_eff_ * static_cast<work_micro>(idle.size())) continue;
      const auto [assigned, removed] = workers_[z].remove_task(tid, t);
      reschedule(z);
      drop_holder(rt, z);
      rt.executed += assigned - removed;
      rt.resplits += 1;
      if (cfg_.record_trace)
        trace_.push_back(format_time(t) + " resplit " + std::to_string(z) + " " +
                         std::to_string(tid) + " " + format_time(removed));
      if (!workers_[z].busy()) notify_neighbors(z);
      distribute(tid, removed, idle, t);
    }
  }

  // --- wrap-up ---------------------------------------------------------

  sim_result finish() {
    sim_result res;
    res.outcomes.reserve(tasks_.size());
    std::vector<node_id> outs;
    outs.reserve(tasks_.size());
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const auto& rt = tasks_[i];
      task_outcome o;
      o.task = static_cast<task_id>(i);
      o.outsourcer = rt.outsourcer;
      o.t_tot = rt.total;
      o.resplits = rt.resplits;
      o.completed = rt.completed;
      if (rt.completed) {
        o.t_last = rt.t_last;
        o.x = static_cast<double>(rt.t_last) / static_cast<double>(rt.total);
      } else {
        if (rt.executed + rt.parked != rt.total)
          throw std::logic_error("work accounting leak in incomplete task " +
                                 std::to_string(i));
        res.incomplete += 1;
      }
      res.total_resplits += rt.resplits;
      res.outcomes.push_back(o);
      outs.push_back(rt.outsourcer);
    }
    res.overhead = total_control_overhead(g_, cfg_.overhead, outs);
    res.trace = std::move(trace_);
    return res;
  }

  const graph& g_;
  const std::vector<task_spec>& specs_;
  const sim_config& cfg_;
  work_micro theta_eff_ = micro_per_unit;

  std::vector<worker_state> workers_;
  std::vector<std::uint64_t> version_;
  std::vector<bool> alive_;
  std::vector<task_id> task_of_;
  std::vector<task_rt> tasks_;
  std::priority_queue<sim_event, std::vector<sim_event>, std::greater<sim_event>> events_;
  std::set<task_id> pending_;
  std::vector<std::string> trace_;
};

} // namespace detail

/// Run one batch simulation: all tasks and their splits exist at time 0.
/// Deterministic given (graph, tasks, splits, cfg, rng state). The random
/// stream is only consumed when cfg.failures is set (failure draws follow
/// the workload draws on the same per-cell stream).
inline sim_result run_simulation(const graph& g, const std::vector<task_spec>& tasks,
                                 const std::vector<std::vector<subtask>>& splits,
                                 const sim_config& cfg, split_mix64* rng = nullptr) {
  detail::simulation sim(g, tasks, splits, cfg, rng);
  return sim.run();
}

} // namespace socialcloud
