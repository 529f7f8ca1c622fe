#pragma once

// Batched simulations over random fully-utilized task sets: per set, the
// reduction depth and the preemption/migration counts over a capped horizon,
// written out as CSV. Statistics stream through the scheduler's level-0 sink,
// so no trace is stored. Results depend only on the master seed and the
// (n, index) coordinates of a set, never on the thread count.

#include "runsched/generator.hpp"
#include "runsched/reduction.hpp"
#include "runsched/scheduler.hpp"
#include "runsched/validation.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

namespace runsched {

struct ExperimentConfig {
  int processors = 16;
  std::vector<int> task_counts;  // empty → default_task_grid()
  int sets_per_count = 100;
  std::uint64_t seed = 1;
  int threads = 1;  // 0 → hardware concurrency
  PackHeuristic heuristic = PackHeuristic::first_fit_decreasing;
  Rational horizon_cap = Rational(5000);
};

struct SetResult {
  int n = 0;
  int index = 0;
  int levels = 0;  // reduction depth: virtual levels above the tasks
  long long jobs = 0;
  long long preemptions = 0;
  double avg_preempt = 0.0;
  long long migrations = 0;
  int misses = 0;
};

// 17 tasks (one over the processor count), then 18..64 in steps of two
inline std::vector<int> default_task_grid(int processors = 16) {
  std::vector<int> grid{processors + 1};
  for (int n = processors + 2; n <= 4 * processors; n += 2) grid.push_back(n);
  return grid;
}

inline std::uint64_t set_seed(std::uint64_t master, int n, int index) {
  return detail::mix_seed(master + 1000003ull * static_cast<std::uint64_t>(n) +
                          7919ull * static_cast<std::uint64_t>(index));
}

inline SetResult simulate_random_set(const ExperimentConfig& cfg, int n, int index) {
  GeneratorConfig gc;
  gc.tasks = n;
  gc.processors = cfg.processors;
  gc.seed = set_seed(cfg.seed, n, index);
  TaskSystem sys = generate_task_system(gc);
  pad_to_full_utilization(sys);

  const ReductionForest forest = build_forest(sys, cfg.heuristic);
  const Rational hyper = hyperperiod(sys);
  const Rational horizon = hyper < cfg.horizon_cap ? hyper : cfg.horizon_cap;

  PreemptionCounter counter;
  RunScheduler::Options opt;
  opt.record_trace = false;
  opt.level0_sink = [&counter](int proc, int task, bool idle, const BigInt& t1, const BigInt& t2) {
    if (!idle) counter.feed(proc, task, t1, t2);
  };
  RunScheduler sched(forest, opt);
  for (const auto& t : sys.tasks)
    counter.add_task(t.id, 0, t.period.num() * (sched.time_scale() / t.period.den()), t.dummy);
  const RunTrace trace = sched.run(horizon);
  if (!trace.violation.empty())
    throw std::runtime_error("scheduler invariant broken on set n=" + std::to_string(n) +
                             " index=" + std::to_string(index) + ": " + trace.violation);

  SetResult r;
  r.n = n;
  r.index = index;
  r.levels = forest.depth();
  for (const auto& t : sys.tasks) {
    if (t.dummy) continue;  // filler work is not part of the measured workload
    r.jobs += (horizon / t.period).floor().convert_to<long long>();
  }
  r.preemptions = counter.preemption_points();
  r.migrations = counter.migrations();
  r.avg_preempt = r.jobs == 0 ? 0.0 : static_cast<double>(r.preemptions) / static_cast<double>(r.jobs);
  r.misses = trace.miss ? 1 : 0;
  return r;
}

inline std::vector<SetResult> run_experiment(const ExperimentConfig& cfg) {
  const std::vector<int> grid = cfg.task_counts.empty() ? default_task_grid(cfg.processors)
                                                        : cfg.task_counts;
  std::vector<std::pair<int, int>> work;
  for (int n : grid)
    for (int i = 0; i < cfg.sets_per_count; ++i) work.emplace_back(n, i);

  std::vector<SetResult> results(work.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= work.size()) break;
      try {
        results[i] = simulate_random_set(cfg, work[i].first, work[i].second);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  int threads = cfg.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                 : cfg.threads;
  threads = std::max(1, std::min<int>(threads, static_cast<int>(work.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2.0;
}

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// quartiles as medians of the lower/upper halves (middle excluded when odd)
inline FiveNumber five_number(std::vector<double> v) {
  FiveNumber f;
  if (v.empty()) return f;
  std::sort(v.begin(), v.end());
  f.min = v.front();
  f.max = v.back();
  f.median = median_of(v);
  const std::size_t h = v.size() / 2;
  if (h == 0) {
    f.q1 = f.q3 = f.median;
  } else {
    f.q1 = median_of({v.begin(), v.begin() + h});
    f.q3 = median_of({v.end() - h, v.end()});
  }
  return f;
}

inline void write_csv(const std::vector<SetResult>& results, std::ostream& out) {
  out << "n,set,levels,jobs,preemptions,avg_preempt,migrations,misses\n";
  char avg[64];
  for (const auto& r : results) {
    std::snprintf(avg, sizeof avg, "%.6f", r.avg_preempt);
    out << r.n << ',' << r.index << ',' << r.levels << ',' << r.jobs << ',' << r.preemptions
        << ',' << avg << ',' << r.migrations << ',' << r.misses << '\n';
  }
}

}  // namespace runsched
