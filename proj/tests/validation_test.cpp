#include "runsched/validation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "runsched/scheduler.hpp"

using namespace runsched;

static Task make_task(int id, Rational period, Rational utilization, Rational start = Rational(0)) {
  Task t;
  t.id = id;
  t.period = period;
  t.utilization = utilization;
  t.start = start;
  return t;
}

static TaskSystem two_proc_three_task_system() {
  TaskSystem s;
  s.processors = 2;
  for (int i = 1; i <= 3; ++i) s.tasks.push_back(make_task(i, Rational(3), Rational(2, 3)));
  return s;
}

static void add_interval(RunTrace& tr, int processor, int task, Rational t1, Rational t2,
                         bool idle = false) {
  TraceInterval iv;
  iv.level = 0;
  iv.processor = processor;
  iv.task = task;
  iv.idle = idle;
  iv.t1 = t1;
  iv.t2 = t2;
  tr.intervals.push_back(iv);
}

static RunTrace empty_trace(int processors, Rational horizon) {
  RunTrace tr;
  tr.processors = processors;
  tr.levels = 0;
  tr.horizon = horizon;
  return tr;
}

// A correct hand-built schedule for the three-task system: task 3 hops between
// the processors, everyone gets 2 units by time 3.
static RunTrace three_task_witness() {
  RunTrace tr = empty_trace(2, Rational(3));
  add_interval(tr, 0, 1, Rational(0), Rational(2));
  add_interval(tr, 0, 3, Rational(2), Rational(3));
  add_interval(tr, 1, 2, Rational(0), Rational(1));
  add_interval(tr, 1, 3, Rational(1), Rational(2));
  add_interval(tr, 1, 2, Rational(2), Rational(3));
  return tr;
}

TEST(Validation, AcceptsAHandBuiltFeasibleSchedule) {
  const ValidityReport r = check_trace(two_proc_three_task_system(), three_task_witness());
  EXPECT_TRUE(r.valid) << (r.problems.empty() ? "" : r.problems.front());
  EXPECT_TRUE(r.feasible);
  EXPECT_TRUE(r.misses.empty());
}

// The same schedule without the migration leaves task 3 one unit short: the
// trace is a valid partitioned schedule but not a feasible one.
TEST(Validation, DetectsTheShortfallOfAPartitionedSchedule) {
  RunTrace tr = empty_trace(2, Rational(3));
  add_interval(tr, 0, 1, Rational(0), Rational(2));
  add_interval(tr, 0, 3, Rational(2), Rational(3));
  add_interval(tr, 1, 2, Rational(0), Rational(2));
  const ValidityReport r = check_trace(two_proc_three_task_system(), tr);
  EXPECT_TRUE(r.valid);
  EXPECT_FALSE(r.feasible);
  ASSERT_EQ(r.misses.size(), 1u);
  EXPECT_EQ(r.misses[0].task, 3);
  EXPECT_EQ(r.misses[0].job_index, 0);
  EXPECT_EQ(r.misses[0].at, Rational(3));
}

TEST(Validation, EmptySystemAndTraceAreTriviallyFine) {
  TaskSystem s;
  s.processors = 1;
  const ValidityReport r = check_trace(s, empty_trace(1, Rational(0)));
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.feasible);
}

TEST(Validation, FlagsProcessorSharingAndParallelExecution) {
  const TaskSystem s = two_proc_three_task_system();

  RunTrace overlap = three_task_witness();
  add_interval(overlap, 0, 2, Rational(1, 2), Rational(3, 2));  // p0 already busy
  EXPECT_FALSE(check_trace(s, overlap).valid);

  RunTrace parallel = empty_trace(2, Rational(3));
  add_interval(parallel, 0, 1, Rational(0), Rational(1));
  add_interval(parallel, 1, 1, Rational(0), Rational(1));  // same task, same time
  EXPECT_FALSE(check_trace(s, parallel).valid);
}

TEST(Validation, FlagsExecutionOutsideTheJobWindowAndOverruns) {
  const TaskSystem s = two_proc_three_task_system();

  RunTrace overrun = empty_trace(2, Rational(3));
  add_interval(overrun, 0, 1, Rational(0), Rational(5, 2));  // cost is only 2
  EXPECT_FALSE(check_trace(s, overrun).valid);

  TaskSystem shifted;
  shifted.processors = 1;
  shifted.tasks.push_back(make_task(1, Rational(2), Rational(1, 2), Rational(1)));
  RunTrace early = empty_trace(1, Rational(3));
  add_interval(early, 0, 1, Rational(0), Rational(1));  // before the first release
  EXPECT_FALSE(check_trace(shifted, early).valid);

  RunTrace unknown = empty_trace(2, Rational(3));
  add_interval(unknown, 0, 9, Rational(0), Rational(1));  // no task 9
  EXPECT_FALSE(check_trace(s, unknown).valid);
}

TEST(Validation, PropagatesRecordedViolationsAndMisses) {
  const TaskSystem s = two_proc_three_task_system();

  RunTrace broken = three_task_witness();
  broken.violation = "server budget of node 2 not exhausted at its deadline";
  EXPECT_FALSE(check_trace(s, broken).valid);

  RunTrace missed = three_task_witness();
  missed.miss = DeadlineMiss{2, 0, Rational(3)};
  const ValidityReport r = check_trace(s, missed);
  EXPECT_FALSE(r.feasible);
  EXPECT_FALSE(r.misses.empty());
}

TEST(Validation, PreemptionCountsOnTheHandSchedule) {
  const PreemptionStats stats =
      count_preemptions(two_proc_three_task_system(), three_task_witness());
  // task 3 resumes once after a gap (its migration is gapless at time 2);
  // task 2 resumes at 2 after the gap [1, 2) and switches processor... it does
  // not: it stays on processor 1, so it contributes the other preemption point.
  EXPECT_EQ(stats.jobs, 3);
  EXPECT_EQ(stats.preemption_points, 1);
  EXPECT_EQ(stats.migrations, 1);
  EXPECT_EQ(stats.avg_per_job, Rational(1, 3));
}

TEST(Validation, SplittingAnIntervalDoesNotChangeTheCounts) {
  const TaskSystem s = two_proc_three_task_system();
  RunTrace split = empty_trace(2, Rational(3));
  add_interval(split, 0, 1, Rational(0), Rational(1));
  add_interval(split, 0, 1, Rational(1), Rational(2));  // same piece, cut in two
  add_interval(split, 0, 3, Rational(2), Rational(3));
  add_interval(split, 1, 2, Rational(0), Rational(1));
  add_interval(split, 1, 3, Rational(1), Rational(2));
  add_interval(split, 1, 2, Rational(2), Rational(3));
  const PreemptionStats stats = count_preemptions(s, split);
  EXPECT_EQ(stats.preemption_points, 1);
  EXPECT_EQ(stats.migrations, 1);
}

TEST(Validation, GaplessProcessorSwitchIsAMigrationButNotAPreemption) {
  TaskSystem s;
  s.processors = 2;
  s.tasks.push_back(make_task(1, Rational(4), Rational(1, 2)));
  s.tasks.push_back(make_task(2, Rational(4), Rational(1, 2)));
  RunTrace tr = empty_trace(2, Rational(4));
  add_interval(tr, 0, 1, Rational(0), Rational(1));
  add_interval(tr, 1, 1, Rational(1), Rational(2));  // moves without pausing
  add_interval(tr, 1, 2, Rational(0), Rational(1));
  add_interval(tr, 0, 2, Rational(1), Rational(2));
  const PreemptionStats stats = count_preemptions(s, tr);
  EXPECT_EQ(stats.preemption_points, 0);
  EXPECT_EQ(stats.migrations, 2);
}

TEST(Validation, CompletedJobsDoNotCountTheirFinalStop) {
  TaskSystem s;
  s.processors = 1;
  s.tasks.push_back(make_task(1, Rational(4), Rational(1, 2)));
  s.tasks.push_back(make_task(2, Rational(4), Rational(1, 2)));
  RunTrace tr = empty_trace(1, Rational(4));
  add_interval(tr, 0, 1, Rational(0), Rational(2));  // completes, then stops
  add_interval(tr, 0, 2, Rational(2), Rational(4));
  const PreemptionStats stats = count_preemptions(s, tr);
  EXPECT_EQ(stats.preemption_points, 0);
  EXPECT_EQ(stats.migrations, 0);
  EXPECT_EQ(stats.jobs, 2);
}

TEST(Validation, DualityCheckCatchesTamperedVirtualLevels) {
  const TaskSystem s = two_proc_three_task_system();
  const ReductionForest f = build_forest(s);
  RunScheduler sched(f);
  RunTrace trace = sched.run(Rational(3));
  ASSERT_TRUE(duality_violations(f, trace).empty());

  // Erase one virtual interval: a pack now runs while its dual also claims to.
  auto it = std::find_if(trace.intervals.begin(), trace.intervals.end(),
                         [](const TraceInterval& iv) { return iv.level == 1; });
  ASSERT_NE(it, trace.intervals.end());
  trace.intervals.erase(it);
  EXPECT_FALSE(duality_violations(f, trace).empty());
}

TEST(Validation, BruteForceAgreesOnTheThreeTaskSystem) {
  EXPECT_TRUE(brute_force_feasible(two_proc_three_task_system(), Rational(1)));

  // Same shape with unit utilizations: demand 9 over a supply of 6.
  TaskSystem over;
  over.processors = 2;
  for (int i = 1; i <= 3; ++i) over.tasks.push_back(make_task(i, Rational(3), Rational(1)));
  EXPECT_FALSE(brute_force_feasible(over, Rational(1)));
}

TEST(Validation, BruteForceHandlesSubUnitQuanta) {
  TaskSystem s;
  s.processors = 1;
  s.tasks.push_back(make_task(1, Rational(1), Rational(1, 2)));
  s.tasks.push_back(make_task(2, Rational(2), Rational(1, 2)));
  EXPECT_THROW(brute_force_feasible(s, Rational(1)), std::invalid_argument);  // cost 1/2
  EXPECT_TRUE(brute_force_feasible(s, Rational(1, 2)));
}

TEST(Validation, BruteForceRejectsMisuse) {
  const TaskSystem s = two_proc_three_task_system();
  EXPECT_THROW(brute_force_feasible(s, Rational(0)), std::invalid_argument);
  EXPECT_THROW(brute_force_feasible(s, Rational(-1)), std::invalid_argument);
  EXPECT_THROW(brute_force_feasible(s, Rational(2)), std::invalid_argument);  // off-grid

  TaskSystem big;
  big.processors = 6;
  for (int i = 1; i <= 11; ++i) big.tasks.push_back(make_task(i, Rational(2), Rational(1, 2)));
  EXPECT_THROW(brute_force_feasible(big, Rational(1)), std::invalid_argument);  // too many tasks

  TaskSystem shifted;
  shifted.processors = 1;
  shifted.tasks.push_back(make_task(1, Rational(2), Rational(1, 2), Rational(1)));
  EXPECT_THROW(brute_force_feasible(shifted, Rational(1)), std::invalid_argument);
}

// Cross-check the simulator against exhaustive search on tiny fully-utilized
// systems: the reduction schedule must always be accepted, and the oracle must
// always find the system feasible.
TEST(Validation, SimulatorAgreesWithTheExhaustiveOracle) {
  std::mt19937_64 rng(29);
  const int kPeriods[] = {1, 2, 3, 4, 6};
  int accepted = 0;
  long attempts = 0;
  while (accepted < 200 && ++attempts < 200000) {
    TaskSystem s;
    s.processors = 1 + static_cast<int>(rng() % 2);
    const int n = s.processors + 1 + static_cast<int>(rng() % (5 - s.processors));
    Rational sum;
    for (int i = 1; i <= n; ++i) {
      const int period = kPeriods[rng() % 5];
      std::uniform_int_distribution<int> cd(1, period);
      const Task t = make_task(i, Rational(period), Rational(cd(rng), period));
      s.tasks.push_back(t);
      sum += t.utilization;
    }
    if (sum != Rational(s.processors)) continue;
    ++accepted;

    EXPECT_TRUE(brute_force_feasible(s, Rational(1))) << "case " << accepted;

    const ReductionForest f = build_forest(s);
    RunScheduler sched(f);
    const RunTrace trace = sched.run(hyperperiod(s));
    EXPECT_FALSE(trace.miss.has_value()) << "case " << accepted;
    const ValidityReport r = check_trace(s, trace);
    EXPECT_TRUE(r.valid) << "case " << accepted;
    EXPECT_TRUE(r.feasible) << "case " << accepted;

    // A tampered copy of the trace must not pass: drop the largest busy piece.
    RunTrace tampered = trace;
    auto worst = tampered.intervals.end();
    for (auto it = tampered.intervals.begin(); it != tampered.intervals.end(); ++it) {
      if (it->level != 0 || it->idle) continue;
      if (worst == tampered.intervals.end() || (it->t2 - it->t1) > (worst->t2 - worst->t1))
        worst = it;
    }
    ASSERT_NE(worst, tampered.intervals.end());
    tampered.intervals.erase(worst);
    const ValidityReport bad = check_trace(s, tampered);
    EXPECT_FALSE(bad.feasible) << "case " << accepted;
  }
  EXPECT_EQ(accepted, 200);
}
