#include "runsched/experiment.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace runsched;

static ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.processors = 4;
  cfg.task_counts = {5, 6};
  cfg.sets_per_count = 3;
  cfg.seed = 11;
  cfg.horizon_cap = Rational(100);
  return cfg;
}

TEST(Experiment, DefaultGridStartsJustAboveTheProcessorCount) {
  const std::vector<int> grid = default_task_grid(16);
  ASSERT_EQ(grid.size(), 25u);
  EXPECT_EQ(grid.front(), 17);
  EXPECT_EQ(grid[1], 18);
  EXPECT_EQ(grid[2], 20);
  EXPECT_EQ(grid.back(), 64);

  const std::vector<int> four = default_task_grid(4);
  EXPECT_EQ(four, (std::vector<int>{5, 6, 8, 10, 12, 14, 16}));
}

TEST(Experiment, SetSeedsSeparateTheCoordinates) {
  EXPECT_EQ(set_seed(1, 17, 0), set_seed(1, 17, 0));
  EXPECT_NE(set_seed(1, 17, 0), set_seed(1, 17, 1));
  EXPECT_NE(set_seed(1, 17, 0), set_seed(1, 18, 0));
  EXPECT_NE(set_seed(1, 17, 0), set_seed(2, 17, 0));
}

TEST(Experiment, SingleSetSimulationIsDeterministicAndMissFree) {
  const ExperimentConfig cfg = small_config();
  const SetResult a = simulate_random_set(cfg, 5, 0);
  const SetResult b = simulate_random_set(cfg, 5, 0);
  EXPECT_EQ(a.levels, b.levels);
  EXPECT_EQ(a.jobs, b.jobs);
  EXPECT_EQ(a.preemptions, b.preemptions);
  EXPECT_EQ(a.migrations, b.migrations);
  EXPECT_EQ(a.misses, 0);
  EXPECT_GT(a.jobs, 0);
  EXPECT_DOUBLE_EQ(a.avg_preempt,
                   static_cast<double>(a.preemptions) / static_cast<double>(a.jobs));
}

TEST(Experiment, ThreadCountDoesNotChangeTheResults) {
  ExperimentConfig cfg = small_config();
  cfg.threads = 1;
  const std::vector<SetResult> serial = run_experiment(cfg);
  cfg.threads = 2;
  const std::vector<SetResult> parallel = run_experiment(cfg);

  ASSERT_EQ(serial.size(), 6u);
  std::ostringstream a, b;
  write_csv(serial, a);
  write_csv(parallel, b);
  EXPECT_EQ(a.str(), b.str());
}

// The streaming counter inside the batch runner must agree with counting on a
// fully recorded trace of the same set.
TEST(Experiment, StreamedCountsMatchTheRecordedTrace) {
  const ExperimentConfig cfg = small_config();
  const int n = 6, index = 2;
  const SetResult streamed = simulate_random_set(cfg, n, index);

  GeneratorConfig gc;
  gc.tasks = n;
  gc.processors = cfg.processors;
  gc.seed = set_seed(cfg.seed, n, index);
  TaskSystem sys = generate_task_system(gc);
  pad_to_full_utilization(sys);
  const ReductionForest forest = build_forest(sys, cfg.heuristic);
  const Rational hyper = hyperperiod(sys);
  const Rational horizon = hyper < cfg.horizon_cap ? hyper : cfg.horizon_cap;
  RunScheduler sched(forest);
  const RunTrace trace = sched.run(horizon);
  const PreemptionStats stats = count_preemptions(sys, trace);

  EXPECT_EQ(streamed.levels, forest.depth());
  EXPECT_EQ(streamed.jobs, stats.jobs);
  EXPECT_EQ(streamed.preemptions, stats.preemption_points);
  EXPECT_EQ(streamed.migrations, stats.migrations);
  EXPECT_EQ(streamed.misses, trace.miss ? 1 : 0);
}

TEST(Experiment, CsvIsStableDownToTheRounding) {
  SetResult r;
  r.n = 17;
  r.index = 3;
  r.levels = 2;
  r.jobs = 100;
  r.preemptions = 37;
  r.avg_preempt = 0.1234567;
  r.migrations = 5;
  r.misses = 0;
  std::ostringstream out;
  write_csv({r}, out);
  EXPECT_EQ(out.str(),
            "n,set,levels,jobs,preemptions,avg_preempt,migrations,misses\n"
            "17,3,2,100,37,0.123457,5,0\n");

  std::ostringstream empty;
  write_csv({}, empty);
  EXPECT_EQ(empty.str(), "n,set,levels,jobs,preemptions,avg_preempt,migrations,misses\n");
}

TEST(Experiment, SummariesFollowTheHalfSampleRule) {
  const FiveNumber even = five_number({4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(even.min, 1.0);
  EXPECT_DOUBLE_EQ(even.q1, 1.5);
  EXPECT_DOUBLE_EQ(even.median, 2.5);
  EXPECT_DOUBLE_EQ(even.q3, 3.5);
  EXPECT_DOUBLE_EQ(even.max, 4.0);

  const FiveNumber odd = five_number({3, 1, 2});
  EXPECT_DOUBLE_EQ(odd.q1, 1.0);
  EXPECT_DOUBLE_EQ(odd.median, 2.0);
  EXPECT_DOUBLE_EQ(odd.q3, 3.0);

  const FiveNumber single = five_number({7});
  EXPECT_DOUBLE_EQ(single.q1, 7.0);
  EXPECT_DOUBLE_EQ(single.median, 7.0);
  EXPECT_DOUBLE_EQ(single.q3, 7.0);

  const FiveNumber none = five_number({});
  EXPECT_DOUBLE_EQ(none.min, 0.0);
  EXPECT_DOUBLE_EQ(none.max, 0.0);
  EXPECT_DOUBLE_EQ(median_of({}), 0.0);
  EXPECT_DOUBLE_EQ(median_of({1, 2, 3, 4}), 2.5);
}
