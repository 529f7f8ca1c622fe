#pragma once

// Fixed-utilization task model.
//
// A task releases a job at every multiple of its period (from `start`); the
// job's deadline is the next release and its requirement is exactly
// utilization * period. A task system is a set of such tasks plus a processor
// count; schedulers here require total utilization to equal the processor
// count exactly, so systems are padded with dummy tasks first when they fall
// short.

#include "runsched/rational.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace runsched {

struct Task {
  int id = 0;
  Rational period;       // spacing between consecutive deadlines, > 0
  Rational utilization;  // processor share in (0, 1]
  Rational start;        // release time of job 0
  bool dummy = false;    // padding task added to reach full utilization

  Rational job_cost() const { return utilization * period; }
};

struct Job {
  int task = 0;
  long index = 0;
  Rational release;
  Rational deadline;
  Rational work;
};

struct DeadlineMiss {
  int task = -1;
  long job_index = 0;
  Rational at;
};

struct CompletedJob {
  int task = 0;
  long index = 0;
  Rational at;
};

inline Job job_of(const Task& t, long index) {
  Job j;
  j.task = t.id;
  j.index = index;
  j.release = t.start + Rational(index) * t.period;
  j.deadline = j.release + t.period;
  j.work = t.job_cost();
  return j;
}

// Smallest job deadline strictly after `time`.
inline Rational next_deadline(const Task& t, const Rational& time) {
  if (time < t.start) return t.start + t.period;
  const BigInt k = ((time - t.start) / t.period).floor();
  return t.start + Rational(k + 1) * t.period;
}

// The job whose window [release, deadline) contains `time`.
inline Job job_at(const Task& t, const Rational& time) {
  if (time < t.start) throw std::invalid_argument("job_at before first release");
  const BigInt k = ((time - t.start) / t.period).floor();
  return job_of(t, k.convert_to<long>());
}

struct TaskSystem {
  int processors = 0;
  std::vector<Task> tasks;
};

inline Rational total_utilization(const TaskSystem& s) {
  Rational sum;
  for (const auto& t : s.tasks) sum += t.utilization;
  return sum;
}

// Least common multiple of all task periods.
inline Rational hyperperiod(const std::vector<Task>& tasks) {
  if (tasks.empty()) return Rational(1);
  // lcm(a/b, c/d) = lcm(a, c) / gcd(b, d)
  BigInt n = tasks.front().period.num();
  BigInt d = tasks.front().period.den();
  for (const auto& t : tasks) {
    n = boost::multiprecision::lcm(n, t.period.num());
    d = boost::multiprecision::gcd(d, t.period.den());
  }
  return Rational(n, d);
}

inline Rational hyperperiod(const TaskSystem& s) { return hyperperiod(s.tasks); }

inline void validate(const TaskSystem& s) {
  if (s.processors < 1) throw std::invalid_argument("processor count must be >= 1");
  std::set<int> ids;
  for (const auto& t : s.tasks) {
    if (!ids.insert(t.id).second)
      throw std::invalid_argument("duplicate task id " + std::to_string(t.id));
    if (t.period <= Rational(0))
      throw std::invalid_argument("task " + std::to_string(t.id) + ": period must be positive");
    if (t.utilization <= Rational(0) || t.utilization > Rational(1))
      throw std::invalid_argument("task " + std::to_string(t.id) +
                                  ": utilization must be in (0, 1]");
    if (t.start < Rational(0))
      throw std::invalid_argument("task " + std::to_string(t.id) + ": start must be >= 0");
  }
  if (total_utilization(s) > Rational(s.processors))
    throw std::invalid_argument("total utilization exceeds processor count");
}

// Appends dummy tasks so that total utilization equals the processor count
// exactly. A residual of e.g. 5/4 becomes one unit dummy plus one of 1/4; the
// dummy period is the hyperperiod of the real tasks, capped to keep windows
// reasonable. Returns the number of dummies added.
inline int pad_to_full_utilization(TaskSystem& s, const Rational& period_cap = Rational(5000)) {
  validate(s);
  Rational residual = Rational(s.processors) - total_utilization(s);
  if (residual.is_zero()) return 0;
  const Rational period = std::min(hyperperiod(s.tasks), period_cap);
  int next_id = 0;
  for (const auto& t : s.tasks) next_id = std::max(next_id, t.id);
  int added = 0;
  while (!residual.is_zero()) {
    Task d;
    d.id = ++next_id;
    d.period = period;
    d.utilization = std::min(residual, Rational(1));
    d.dummy = true;
    s.tasks.push_back(d);
    residual -= d.utilization;
    ++added;
  }
  return added;
}

// --- task set files -------------------------------------------------------
//
//   # comment
//   processors 2
//   task 1 3 2          (task <id> <period> <wcet>, integers)
//
// wcet is per-period execution demand, so utilization = wcet / period.

inline TaskSystem parse_task_system(std::istream& in) {
  TaskSystem s;
  bool have_procs = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;  // blank
    const std::string where = " (line " + std::to_string(lineno) + ")";
    if (word == "processors") {
      long long m;
      if (!(ls >> m) || m < 1) throw std::invalid_argument("bad processor count" + where);
      s.processors = static_cast<int>(m);
      have_procs = true;
    } else if (word == "task") {
      long long id, period, wcet;
      if (!(ls >> id >> period >> wcet))
        throw std::invalid_argument("expected: task <id> <period> <wcet>" + where);
      if (period < 1) throw std::invalid_argument("period must be a positive integer" + where);
      if (wcet < 1) throw std::invalid_argument("wcet must be a positive integer" + where);
      if (wcet > period) throw std::invalid_argument("wcet exceeds period" + where);
      Task t;
      t.id = static_cast<int>(id);
      t.period = Rational(period);
      t.utilization = Rational(wcet, period);
      s.tasks.push_back(t);
    } else {
      throw std::invalid_argument("unknown directive '" + word + "'" + where);
    }
    std::string extra;
    if (ls >> extra) throw std::invalid_argument("trailing tokens" + where);
  }
  if (!have_procs) throw std::invalid_argument("missing 'processors' line");
  validate(s);
  return s;
}

inline void serialize_task_system(const TaskSystem& s, std::ostream& out) {
  out << "processors " << s.processors << "\n";
  for (const auto& t : s.tasks) {
    if (t.dummy) continue;
    const Rational wcet = t.job_cost();
    if (!t.period.is_integer() || !wcet.is_integer() || !t.start.is_zero())
      throw std::invalid_argument("task " + std::to_string(t.id) +
                                  " is not representable in the integer file format");
    out << "task " << t.id << " " << t.period.to_string() << " " << wcet.to_string() << "\n";
  }
}

}  // namespace runsched
