#pragma once

// Checks on schedules: structural validity and feasibility of a trace,
// preemption/migration counting, an exhaustive feasibility oracle for tiny
// systems, and a checker for the pack/dual execution complement.

#include "runsched/reduction.hpp"
#include "runsched/trace.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace runsched {

struct ValidityReport {
  bool valid = true;     // one job per processor, one processor per job,
                         // work only inside job windows, never beyond the cost
  bool feasible = true;  // every job due within the horizon got its full work
  std::vector<std::string> problems;
  std::vector<DeadlineMiss> misses;
};

namespace detail {

struct Piece {
  int processor;
  Rational t1, t2;
};

// split an execution interval of one task at its job boundaries
inline void split_at_job_bounds(const Task& t, const Piece& p, std::vector<Piece>& out) {
  Rational cur = p.t1;
  while (cur < p.t2) {
    const BigInt k = ((cur - t.start) / t.period).floor();
    const Rational dk = t.start + Rational(k + 1) * t.period;
    const Rational pe = p.t2 < dk ? p.t2 : dk;
    out.push_back({p.processor, cur, pe});
    cur = pe;
  }
}

}  // namespace detail

inline ValidityReport check_trace(const TaskSystem& sys, const RunTrace& trace) {
  ValidityReport rep;
  const auto problem = [&](const std::string& s) {
    rep.problems.push_back(s);
    rep.valid = false;
  };
  if (!trace.violation.empty()) problem("scheduler reported: " + trace.violation);
  if (trace.miss) {
    rep.misses.push_back(*trace.miss);
    rep.feasible = false;
  }

  std::map<int, const Task*> by_id;
  for (const auto& t : sys.tasks) by_id[t.id] = &t;

  std::map<int, std::vector<detail::Piece>> by_proc;
  std::map<int, std::vector<detail::Piece>> by_task;
  for (const auto& iv : trace.intervals) {
    if (iv.level != 0) continue;
    if (iv.t2 <= iv.t1) {
      problem("empty or reversed interval");
      continue;
    }
    by_proc[iv.processor].push_back({iv.processor, iv.t1, iv.t2});
    if (iv.task < 0) continue;  // idle row
    const auto it = by_id.find(iv.task);
    if (it == by_id.end()) {
      problem("interval for unknown task " + std::to_string(iv.task));
      continue;
    }
    if (it->second->dummy) continue;  // filler work has no user-facing contract
    if (iv.t1 < it->second->start) {
      problem("task " + std::to_string(iv.task) + " runs before its start");
      continue;
    }
    detail::split_at_job_bounds(*it->second, {iv.processor, iv.t1, iv.t2}, by_task[iv.task]);
  }

  for (auto& [proc, pieces] : by_proc) {
    std::sort(pieces.begin(), pieces.end(),
              [](const auto& a, const auto& b) { return a.t1 < b.t1; });
    for (std::size_t i = 1; i < pieces.size(); ++i)
      if (pieces[i - 1].t2 > pieces[i].t1) {
        problem("processor " + std::to_string(proc) + " runs two intervals at once near t=" +
                pieces[i].t1.to_string());
        break;
      }
  }

  for (auto& [task, pieces] : by_task) {
    std::sort(pieces.begin(), pieces.end(),
              [](const auto& a, const auto& b) { return a.t1 < b.t1; });
    for (std::size_t i = 1; i < pieces.size(); ++i)
      if (pieces[i - 1].t2 > pieces[i].t1) {
        problem("task " + std::to_string(task) + " runs on two processors at once near t=" +
                pieces[i].t1.to_string());
        break;
      }
  }

  // per-job conservation against the horizon
  for (const auto& t : sys.tasks) {
    if (t.dummy) continue;
    std::map<BigInt, Rational> executed;
    const auto it = by_task.find(t.id);
    if (it != by_task.end())
      for (const auto& p : it->second) {
        const BigInt k = ((p.t1 - t.start) / t.period).floor();
        executed[k] += p.t2 - p.t1;
      }
    const Rational cost = t.job_cost();
    for (const auto& [k, amount] : executed)
      if (amount > cost)
        problem("task " + std::to_string(t.id) + " job " + std::to_string(k.convert_to<long>()) +
                " executed more than its cost");
    if (trace.horizon <= t.start) continue;
    const BigInt due = ((trace.horizon - t.start) / t.period).floor();
    for (BigInt k = 0; k < due; ++k) {
      const auto e = executed.find(k);
      const Rational got = e == executed.end() ? Rational(0) : e->second;
      if (got != cost) {
        const long idx = k.convert_to<long>();
        const bool already =
            trace.miss && trace.miss->task == t.id && trace.miss->job_index == idx;
        if (!already)
          rep.misses.push_back({t.id, idx, t.start + Rational(k + 1) * t.period});
        rep.feasible = false;
      }
    }
  }
  std::sort(rep.misses.begin(), rep.misses.end(), [](const auto& a, const auto& b) {
    return std::tie(a.at, a.task) < std::tie(b.at, b.task);
  });
  return rep;
}

// Streaming preemption/migration counter over scaled integer times. A
// preemption point is a job resuming after a real gap in its execution; a
// migration is a job resuming on a different processor (gap or not). Job
// completions and filler work never count.
class PreemptionCounter {
 public:
  void add_task(int id, const BigInt& start, const BigInt& period, bool dummy) {
    tasks_[id] = {start, period, dummy};
  }

  // pieces of one task must arrive in ascending time order
  void feed(int processor, int task, const BigInt& t1, const BigInt& t2) {
    if (task < 0) return;
    const auto it = tasks_.find(task);
    if (it == tasks_.end() || it->second.dummy) return;
    const auto& ti = it->second;
    auto& s = state_[task];
    BigInt cur = t1;
    while (cur < t2) {
      const BigInt k = (cur - ti.start) / ti.period;
      const BigInt dk = ti.start + (k + 1) * ti.period;
      const BigInt pe = t2 < dk ? t2 : dk;
      if (s.job == k) {
        if (cur > s.end) ++points_;
        if (processor != s.proc) ++migrations_;
      }
      s.job = k;
      s.end = pe;
      s.proc = processor;
      cur = pe;
    }
  }

  long long preemption_points() const { return points_; }
  long long migrations() const { return migrations_; }

 private:
  struct TaskInfo {
    BigInt start, period;
    bool dummy;
  };
  struct JobState {
    BigInt job = -1;
    BigInt end = 0;
    int proc = -1;
  };
  std::map<int, TaskInfo> tasks_;
  std::map<int, JobState> state_;
  long long points_ = 0;
  long long migrations_ = 0;
};

struct PreemptionStats {
  long long preemption_points = 0;
  long long migrations = 0;
  long long jobs = 0;  // jobs due within the horizon, filler excluded
  Rational avg_per_job;
};

inline PreemptionStats count_preemptions(const TaskSystem& sys, const RunTrace& trace) {
  BigInt scale = 1;
  const auto widen = [&scale](const Rational& r) {
    scale = boost::multiprecision::lcm(scale, r.den());
  };
  for (const auto& t : sys.tasks) {
    widen(t.start);
    widen(t.period);
  }
  for (const auto& iv : trace.intervals) {
    widen(iv.t1);
    widen(iv.t2);
  }
  const auto scaled = [&scale](const Rational& r) { return r.num() * (scale / r.den()); };

  PreemptionCounter counter;
  std::map<int, bool> known;
  for (const auto& t : sys.tasks) {
    counter.add_task(t.id, scaled(t.start), scaled(t.period), t.dummy);
    known[t.id] = true;
  }
  struct Row {
    BigInt t1, t2;
    int proc, task;
  };
  std::vector<Row> rows;
  for (const auto& iv : trace.intervals)
    if (iv.level == 0 && iv.task >= 0 && known.count(iv.task))
      rows.push_back({scaled(iv.t1), scaled(iv.t2), iv.processor, iv.task});
  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return std::tie(a.t1, a.t2) < std::tie(b.t1, b.t2); });
  for (const auto& r : rows) counter.feed(r.proc, r.task, r.t1, r.t2);

  PreemptionStats st;
  st.preemption_points = counter.preemption_points();
  st.migrations = counter.migrations();
  for (const auto& t : sys.tasks) {
    if (t.dummy || trace.horizon <= t.start) continue;
    st.jobs += ((trace.horizon - t.start) / t.period).floor().convert_to<long long>();
  }
  st.avg_per_job = st.jobs == 0 ? Rational(0) : Rational(st.preemption_points) / Rational(st.jobs);
  return st;
}

// Exhaustive feasibility of a small synchronous task system on m processors:
// explores every schedule on a fixed quantum grid over one hyperperiod, with
// memoization and a laxity cut. Exponential; keep n and the hyperperiod tiny.
inline bool brute_force_feasible(const TaskSystem& sys, const Rational& quantum = Rational(1)) {
  if (quantum <= Rational(0)) throw std::invalid_argument("quantum must be positive");
  const auto units = [&quantum](const Rational& r, const char* what) {
    const Rational q = r / quantum;
    if (q.den() != 1)
      throw std::invalid_argument(std::string(what) + " is not a multiple of the quantum");
    return q.num().convert_to<long>();
  };
  const int n = static_cast<int>(sys.tasks.size());
  if (n == 0) return true;
  if (n > 10) throw std::invalid_argument("oracle limited to 10 tasks");
  std::vector<long> period(n), cost(n);
  for (int i = 0; i < n; ++i) {
    const auto& t = sys.tasks[i];
    if (t.start != Rational(0))
      throw std::invalid_argument("oracle requires all tasks to start at 0");
    period[i] = units(t.period, "period");
    cost[i] = units(t.job_cost(), "cost");
  }
  const long steps = units(hyperperiod(sys), "hyperperiod");
  const int m = sys.processors;

  std::map<std::pair<long, std::vector<long>>, bool> memo;
  const std::function<bool(long, std::vector<long>&)> explore = [&](long t,
                                                                    std::vector<long>& rem) {
    if (t == steps) return true;
    for (int i = 0; i < n; ++i) {
      const long to_deadline = period[i] - t % period[i];
      if (rem[i] > to_deadline) return false;  // not even continuous service helps
    }
    const auto key = std::make_pair(t, rem);
    const auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;

    std::vector<int> active;
    for (int i = 0; i < n; ++i)
      if (rem[i] > 0) active.push_back(i);
    const int k = std::min<int>(m, static_cast<int>(active.size()));
    bool ok = false;
    const int masks = 1 << active.size();
    for (int mask = 0; mask < masks && !ok; ++mask) {
      if (std::popcount(static_cast<unsigned>(mask)) != k) continue;
      std::vector<long> next = rem;
      for (std::size_t b = 0; b < active.size(); ++b)
        if (mask & (1 << b)) --next[active[b]];
      bool dead = false;
      for (int i = 0; i < n; ++i)
        if ((t + 1) % period[i] == 0) {
          if (next[i] != 0) {
            dead = true;
            break;
          }
          next[i] = cost[i];
        }
      if (!dead) ok = explore(t + 1, next);
    }
    memo[key] = ok;
    return ok;
  };
  std::vector<long> rem = cost;
  return explore(0, rem);
}

namespace detail {

struct Span {
  Rational t1, t2;
};

inline std::vector<Span> merge_spans(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.t1 < b.t1; });
  std::vector<Span> out;
  for (const auto& s : spans) {
    if (!out.empty() && s.t1 <= out.back().t2) {
      if (out.back().t2 < s.t2) out.back().t2 = s.t2;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

inline std::vector<Span> complement_spans(const std::vector<Span>& spans, const Rational& hor) {
  std::vector<Span> out;
  Rational cur(0);
  for (const auto& s : spans) {
    if (cur < s.t1) out.push_back({cur, s.t1});
    cur = s.t2;
  }
  if (cur < hor) out.push_back({cur, hor});
  return out;
}

}  // namespace detail

// Every non-root pack must execute exactly when its dual does not. Works on
// in-memory traces (needs node ids and recorded virtual levels).
inline std::vector<std::string> duality_violations(const ReductionForest& f,
                                                   const RunTrace& trace) {
  std::vector<std::string> out;
  for (const auto& node : f.nodes) {
    if (node.kind != NodeKind::pack || node.parent < 0) continue;
    const int dual = node.parent;
    std::set<int> mine(node.children.begin(), node.children.end());
    mine.insert(node.id);  // idle markers carry the pack's own id
    std::vector<detail::Span> pack_sched, dual_exec;
    for (const auto& iv : trace.intervals) {
      if (iv.node == dual && iv.level == f.node(dual).level)
        dual_exec.push_back({iv.t1, iv.t2});
      else if (mine.count(iv.node))
        pack_sched.push_back({iv.t1, iv.t2});
    }
    const auto expect = detail::complement_spans(detail::merge_spans(pack_sched), trace.horizon);
    const auto got = detail::merge_spans(dual_exec);
    if (expect.size() != got.size()) {
      out.push_back("node " + std::to_string(node.id) + " and its dual do not complement (" +
                    std::to_string(expect.size()) + " vs " + std::to_string(got.size()) +
                    " spans)");
      continue;
    }
    for (std::size_t i = 0; i < expect.size(); ++i)
      if (expect[i].t1 != got[i].t1 || expect[i].t2 != got[i].t2) {
        out.push_back("node " + std::to_string(node.id) + " and its dual disagree near t=" +
                      expect[i].t1.to_string());
        break;
      }
  }
  return out;
}

}  // namespace runsched
