#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "types.hpp"

namespace socialcloud {

/// A share as the worker reports it back: which task, whose, how big.
struct worker_share {
  task_id task = 0;
  node_id outsourcer = 0;
  work_micro assigned = 0;
};

/// One node's execution state under a single scheduling policy.
///
/// RR runs fluid processor sharing: with k active shares each advances at
/// rate 1/k. Implemented with a service credit C = work done per active
/// share since the epoch `sync_`; a share enqueued with amount A finishes
/// when C reaches its fc = C_at_enqueue + A, i.e. at wall time
/// sync_ + k * (min fc - C). Syncing to a foreign time floors the credit
/// quotient and leaves the remainder in the clock, so credit bookkeeping
/// (hence work conservation) stays exact; wall times drift by less than
/// k micro per membership change and not at all within an unchanged set.
///
/// SF/LF run one share at rate 1, the rest wait, ordered by assigned size
/// at enqueue (ascending for SF, descending for LF), ties by
/// (outsourcer id, task id) ascending. An arrival preempts the running
/// share only if strictly better under the policy order.
class worker_state {
public:
  worker_state() : worker_state(0, policy_kind::rr) {}
  worker_state(node_id id, policy_kind policy)
      : id_(id), policy_(policy), queue_(serial_cmp{policy}) {}

  node_id id() const { return id_; }
  policy_kind policy() const { return policy_; }
  bool busy() const { return active_count() > 0; }
  std::size_t active_count() const {
    if (policy_ == policy_kind::rr) return rr_.size();
    return queue_.size() + (running_ ? 1 : 0);
  }

  void enqueue(task_id task, node_id outsourcer, work_micro amount, time_micro now) {
    if (amount < 0) throw std::invalid_argument("negative share");
    if (policy_ == policy_kind::rr) {
      rebase_rr(now);
      rr_.insert(rr_entry{credit_ + amount, outsourcer, task, amount});
      return;
    }
    sync_serial(now);
    serial_entry e{amount, outsourcer, task, amount};
    if (!running_) {
      start(e, now);
    } else if (e.key != running_->key && serial_before(policy_, e, *running_)) {
      // Preemption needs a strictly better size; tie-break order only
      // sequences the waiting queue.
      queue_.insert(*running_);
      start(e, now);
    } else {
      queue_.insert(e);
    }
  }

  /// Earliest wall time at which the current share set produces a
  /// completion; empty when idle. Stable under pure syncs.
  std::optional<time_micro> next_completion() const {
    if (policy_ == policy_kind::rr) {
      if (rr_.empty()) return std::nullopt;
      const work_micro min_fc = rr_.begin()->fc;
      return sync_ + static_cast<time_micro>(rr_.size()) * (min_fc - credit_);
    }
    if (!running_) return std::nullopt;
    return running_since_ + running_->remaining;
  }

  /// Pop every share that completes exactly at `t` (the time reported by
  /// next_completion). Under RR ties pop together in (outsourcer, task)
  /// order; serial workers complete one share and promote the next.
  std::vector<worker_share> collect_due(time_micro t) {
    std::vector<worker_share> done;
    if (policy_ == policy_kind::rr) {
      sync_rr(t);
      while (!rr_.empty() && rr_.begin()->fc == credit_) {
        const auto& e = *rr_.begin();
        done.push_back({e.task, e.outsourcer, e.assigned});
        rr_.erase(rr_.begin());
      }
      return done;
    }
    sync_serial(t);
    if (running_ && running_->remaining == 0) {
      done.push_back({running_->task, running_->outsourcer, running_->key});
      running_.reset();
      promote(t);
    }
    return done;
  }

  /// Remove a share before completion (re-outsourcing, node failure).
  /// Returns (assigned, remaining) for conservation accounting.
  std::pair<work_micro, work_micro> remove_task(task_id task, time_micro now) {
    if (policy_ == policy_kind::rr) {
      rebase_rr(now);
      for (auto it = rr_.begin(); it != rr_.end(); ++it) {
        if (it->task != task) continue;
        const auto out = std::make_pair(it->assigned, it->fc - credit_);
        rr_.erase(it);
        return out;
      }
      throw std::invalid_argument("remove_task: share not active on this worker");
    }
    sync_serial(now);
    if (running_ && running_->task == task) {
      const auto out = std::make_pair(running_->key, running_->remaining);
      running_.reset();
      promote(now);
      return out;
    }
    for (auto it = queue_.begin(); it != queue_.end(); ++it) {
      if (it->task != task) continue;
      const auto out = std::make_pair(it->key, it->remaining);
      queue_.erase(it);
      return out;
    }
    throw std::invalid_argument("remove_task: share not active on this worker");
  }

  work_micro remaining_of(task_id task, time_micro now) {
    if (policy_ == policy_kind::rr) {
      sync_rr(now);
      for (const auto& e : rr_)
        if (e.task == task) return e.fc - credit_;
    } else {
      sync_serial(now);
      if (running_ && running_->task == task) return running_->remaining;
      for (const auto& e : queue_)
        if (e.task == task) return e.remaining;
    }
    throw std::invalid_argument("remaining_of: share not active on this worker");
  }

  /// Drain every active share at once (node failure). Returns
  /// (task, outsourcer, assigned, remaining) per share, ascending task id.
  struct drained_share {
    task_id task;
    node_id outsourcer;
    work_micro assigned;
    work_micro remaining;
  };
  std::vector<drained_share> drain_all(time_micro now) {
    std::vector<drained_share> out;
    if (policy_ == policy_kind::rr) {
      rebase_rr(now);
      for (const auto& e : rr_)
        out.push_back({e.task, e.outsourcer, e.assigned, e.fc - credit_});
      rr_.clear();
    } else {
      sync_serial(now);
      if (running_) {
        out.push_back({running_->task, running_->outsourcer, running_->key,
                       running_->remaining});
        running_.reset();
      }
      for (const auto& e : queue_)
        out.push_back({e.task, e.outsourcer, e.key, e.remaining});
      queue_.clear();
    }
    std::sort(out.begin(), out.end(),
              [](const drained_share& a, const drained_share& b) { return a.task < b.task; });
    return out;
  }

private:
  struct rr_entry {
    work_micro fc; // finish credit: credit at enqueue + assigned
    node_id outsourcer;
    task_id task;
    work_micro assigned;
    bool operator<(const rr_entry& o) const {
      if (fc != o.fc) return fc < o.fc;
      if (outsourcer != o.outsourcer) return outsourcer < o.outsourcer;
      return task < o.task;
    }
  };

  struct serial_entry {
    work_micro key; // assigned size at enqueue, the policy order key
    node_id outsourcer;
    task_id task;
    work_micro remaining;
  };

  static bool serial_before(policy_kind policy, const serial_entry& a, const serial_entry& b) {
    if (a.key != b.key)
      return policy == policy_kind::sf ? a.key < b.key : a.key > b.key;
    if (a.outsourcer != b.outsourcer) return a.outsourcer < b.outsourcer;
    return a.task < b.task;
  }

  struct serial_cmp {
    policy_kind policy = policy_kind::sf;
    bool operator()(const serial_entry& a, const serial_entry& b) const {
      return serial_before(policy, a, b);
    }
  };

  void sync_rr(time_micro t) {
    if (rr_.empty()) {
      sync_ = t;
      credit_ = 0;
      return;
    }
    const auto k = static_cast<time_micro>(rr_.size());
    const time_micro q = (t - sync_) / k;
    credit_ += q;
    sync_ += q * k;
  }

  // Membership changes must re-anchor the epoch at the mutation instant:
  // the floored remainder was earned under the old k, and re-reading it
  // under a smaller k would let a completion land before `t`. Dropping it
  // costs each share under one micro of wall progress and no credit.
  void rebase_rr(time_micro t) {
    sync_rr(t);
    sync_ = t;
  }

  void sync_serial(time_micro t) {
    if (!running_) return;
    running_->remaining -= (t - running_since_);
    running_since_ = t;
    assert(running_->remaining >= 0);
  }

  void start(const serial_entry& e, time_micro now) {
    running_ = e;
    running_since_ = now;
  }

  void promote(time_micro now) {
    if (queue_.empty()) return;
    start(*queue_.begin(), now);
    queue_.erase(queue_.begin());
  }

  node_id id_;
  policy_kind policy_;

  // RR state
  std::set<rr_entry> rr_;
  time_micro sync_ = 0;
  work_micro credit_ = 0;

  // SF/LF state
  std::optional<serial_entry> running_;
  time_micro running_since_ = 0;
  std::set<serial_entry, serial_cmp> queue_;
};

/// Advance an RR worker to its next completion instant and pop everything
/// finishing there (equal remainings tie and pop together). Between events
/// each of the k active shares loses elapsed/k.
inline std::pair<time_micro, std::vector<worker_share>> advance_rr(worker_state& w,
                                                                   time_micro now) {
  if (w.policy() != policy_kind::rr)
    throw std::invalid_argument("advance_rr on a serial worker");
  if (!w.busy()) throw std::invalid_argument("advance_rr on an idle worker");
  (void)now; // the share set pins the next completion; now only names the query instant
  const time_micro t = *w.next_completion();
  return {t, w.collect_due(t)};
}

/// Advance an SF/LF worker to the completion of its running share.
inline std::pair<time_micro, std::vector<worker_share>> advance_serial(worker_state& w,
                                                                       time_micro now) {
  if (w.policy() == policy_kind::rr)
    throw std::invalid_argument("advance_serial on an RR worker");
  if (!w.busy()) throw std::invalid_argument("advance_serial on an idle worker");
  (void)now;
  const time_micro t = *w.next_completion();
  return {t, w.collect_due(t)};
}

} // namespace socialcloud
