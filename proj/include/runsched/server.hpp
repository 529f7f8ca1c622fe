#pragma once

// Budget-limited EDF server simulated on a dedicated processor.
//
// The server owns a set of client tasks and a bandwidth mu. Its deadline at
// time t is the earliest client deadline still "visible": deadlines of
// completed jobs drop out and the next job of such a client counts instead.
// At every realized deadline the budget is replenished to
// bandwidth * (next deadline - now); the server executes clients by EDF while
// budget remains, and the processor idles once the budget is exhausted (or no
// client is active; budget is only consumed while a client runs).

#include "runsched/model.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace runsched {

struct ServerSegment {
  int task = -1;  // -1: processor idle (budget exhausted or no active client)
  Rational t1, t2;
};

struct Replenishment {
  Rational at;
  Rational budget;
  Rational deadline;
};

struct ServerTrace {
  std::vector<ServerSegment> segments;  // contiguous over [0, end of run)
  std::vector<Replenishment> replenishments;
  std::vector<CompletedJob> completions;
  std::optional<DeadlineMiss> miss;  // simulation stops at the first miss
};

// Snapshot of a released, uncompleted client job offered to the pick policy.
struct ActiveJob {
  int client = 0;  // index into the server's client list
  int task = 0;
  Rational release;
  Rational deadline;
  Rational remaining;
};

// Returns the index (into `jobs`) of the job to execute, or -1 for none.
using PickPolicy = std::function<int(const std::vector<ActiveJob>&)>;

// EDF with deterministic tie-break: earliest deadline, then earliest release,
// then lowest task id.
inline int edf_pick_index(const std::vector<ActiveJob>& jobs) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(jobs.size()); ++i) {
    if (best < 0) {
      best = i;
      continue;
    }
    const auto& a = jobs[i];
    const auto& b = jobs[best];
    if (std::tie(a.deadline, a.release, a.task) < std::tie(b.deadline, b.release, b.task)) best = i;
  }
  return best;
}

class EdfServer {
 public:
  EdfServer(Rational bandwidth, std::vector<Task> clients)
      : bandwidth_(std::move(bandwidth)), tasks_(std::move(clients)) {
    if (bandwidth_ <= Rational(0) || bandwidth_ > Rational(1))
      throw std::invalid_argument("server bandwidth must be in (0, 1]");
    if (tasks_.empty()) throw std::invalid_argument("server needs at least one client");
    reset();
  }

  const Rational& bandwidth() const { return bandwidth_; }
  const std::vector<Task>& clients() const { return tasks_; }
  const Rational& budget() const { return budget_; }
  const Rational& current_deadline() const { return deadline_; }

  void set_pick_policy(PickPolicy p) { policy_ = std::move(p); }

  // New server with bandwidth alpha * mu over the same clients.
  EdfServer scale(const Rational& alpha) const {
    if (alpha <= Rational(0) || alpha * bandwidth_ > Rational(1))
      throw std::invalid_argument("scale factor out of range");
    EdfServer s(alpha * bandwidth_, tasks_);
    s.policy_ = policy_;
    return s;
  }

  // Earliest deadline after t among uncompleted released jobs and all future
  // jobs, given the current simulated client state.
  Rational server_deadline(const Rational& t) const {
    std::optional<Rational> best;
    for (const auto& c : clients_) {
      Rational cand;
      if (c.release > t)
        cand = c.deadline;  // future job: counts regardless of state
      else if (!c.remaining.is_zero())
        cand = c.deadline;
      else
        cand = c.deadline + c.task->period;  // completed: next job's deadline
      if (!best || cand < *best) best = cand;
    }
    return *best;
  }

  // Budget refill; only legal at the start of the run or at the instant the
  // current deadline is reached.
  void replenish(const Rational& t) {
    if (replenished_ && t != deadline_)
      throw std::logic_error("replenish at " + t.to_string() +
                             " which is not the current server deadline " + deadline_.to_string());
    if (!replenished_ && !(t == start_time_))
      throw std::logic_error("first replenish must happen at the start of the run");
    deadline_ = server_deadline(t);
    budget_ = bandwidth_ * (deadline_ - t);
    replenished_ = true;
  }

  // EDF choice among active jobs at t; -1 when no client is active.
  int pick(const Rational& t) const {
    std::vector<ActiveJob> jobs;
    for (int i = 0; i < static_cast<int>(clients_.size()); ++i) {
      const auto& c = clients_[i];
      if (c.release <= t && !c.remaining.is_zero())
        jobs.push_back({i, c.task->id, c.release, c.deadline, c.remaining});
    }
    if (jobs.empty()) return -1;
    const int j = policy_ ? policy_(jobs) : edf_pick_index(jobs);
    if (j < 0 || j >= static_cast<int>(jobs.size()))
      throw std::logic_error("pick policy returned an out-of-range choice");
    return jobs[j].client;
  }

  // Simulate [0, horizon); stops early at the first deadline miss.
  ServerTrace run(const Rational& horizon) {
    reset();
    ServerTrace trace;
    Rational t = start_time_;
    replenish(t);
    trace.replenishments.push_back({t, budget_, deadline_});
    while (t < horizon) {
      const int running = budget_.is_zero() ? -1 : pick(t);

      // next instant anything changes
      Rational next = std::min(horizon, deadline_);
      for (const auto& c : clients_) next = std::min(next, c.release > t ? c.release : c.deadline);
      if (running >= 0) {
        next = std::min(next, t + clients_[running].remaining);
        next = std::min(next, t + budget_);
      }

      append_segment(trace.segments, running >= 0 ? tasks_[running].id : -1, t, next);
      if (running >= 0) {
        auto& c = clients_[running];
        c.remaining -= next - t;
        budget_ -= next - t;
        if (c.remaining.is_zero())
          trace.completions.push_back({c.task->id, c.job, next});
      }
      t = next;
      if (t == horizon) break;

      for (auto& c : clients_) {
        if (c.release <= t && c.deadline == t) {
          if (!c.remaining.is_zero()) {
            trace.miss = DeadlineMiss{c.task->id, c.job, t};
            return trace;
          }
          advance_job(c);
        }
      }
      if (t == deadline_) {
        replenish(t);
        trace.replenishments.push_back({t, budget_, deadline_});
      }
    }
    return trace;
  }

 private:
  struct ClientState {
    const Task* task = nullptr;
    long job = 0;
    Rational release, deadline, remaining;
  };

  void reset() {
    clients_.clear();
    start_time_ = Rational(0);
    for (const auto& t : tasks_) {
      ClientState c;
      c.task = &t;
      c.job = 0;
      c.release = t.start;
      c.deadline = t.start + t.period;
      c.remaining = t.job_cost();
      clients_.push_back(c);
      start_time_ = std::min(start_time_, t.start);
    }
    budget_ = Rational(0);
    deadline_ = Rational(0);
    replenished_ = false;
  }

  static void advance_job(ClientState& c) {
    ++c.job;
    c.release = c.deadline;
    c.deadline = c.release + c.task->period;
    c.remaining = c.task->job_cost();
  }

  static void append_segment(std::vector<ServerSegment>& segs, int task, const Rational& t1,
                             const Rational& t2) {
    if (t1 == t2) return;
    if (!segs.empty() && segs.back().task == task && segs.back().t2 == t1)
      segs.back().t2 = t2;
    else
      segs.push_back({task, t1, t2});
  }

  Rational bandwidth_;
  std::vector<Task> tasks_;
  std::vector<ClientState> clients_;
  PickPolicy policy_;
  Rational budget_;
  Rational deadline_;
  Rational start_time_;
  bool replenished_ = false;
};

}  // namespace runsched
