#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr, merged
};

std::string cli_binary() {
  if (const char* env = std::getenv("RUNSCHED_CLI")) return env;
  return "./runsched";  // manual runs from the build directory
}

CommandResult run_cli(const std::string& args) {
  const std::string cmd = cli_binary() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr) << cmd;
  CommandResult r;
  char buf[4096];
  while (pipe && fgets(buf, sizeof buf, pipe)) r.output += buf;
  if (pipe) {
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  return r;
}

std::string temp_path(const std::string& name) { return testing::TempDir() + "cli_" + name; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  ASSERT_TRUE(out) << path;
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  EXPECT_TRUE(in) << path;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char kThreeTasks[] = "processors 2\ntask 1 3 2\ntask 2 3 2\ntask 3 3 2\n";
const char kTenTasks[] =
    "processors 6\n"
    "task 1 10 6\ntask 2 10 6\ntask 3 10 6\ntask 4 10 6\ntask 5 10 6\n"
    "task 6 10 8\ntask 7 10 6\ntask 8 10 6\ntask 9 10 5\ntask 10 10 5\n";

}  // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run_cli("").exit_code, 2);
  EXPECT_EQ(run_cli("bogus").exit_code, 2);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
  EXPECT_EQ(run_cli("schedule").exit_code, 2);  // missing file argument
}

TEST(Cli, ScheduleReportsAndRoundTripsThroughVerify) {
  const std::string tasks = temp_path("three.txt");
  const std::string trace = temp_path("three_trace.txt");
  write_file(tasks, kThreeTasks);

  const CommandResult sched =
      run_cli("schedule " + tasks + " --horizon 3 --out " + trace);
  EXPECT_EQ(sched.exit_code, 0);
  EXPECT_NE(sched.output.find("tasks 3 (+0 filler), processors 2, reduction levels 1"),
            std::string::npos)
      << sched.output;
  EXPECT_NE(sched.output.find("horizon 3, jobs due 3"), std::string::npos);
  EXPECT_NE(sched.output.find("preemption points 1, migrations 1"), std::string::npos);
  EXPECT_NE(sched.output.find("schedule valid and feasible"), std::string::npos);

  const CommandResult verify = run_cli("verify " + tasks + " " + trace);
  EXPECT_EQ(verify.exit_code, 0);
  EXPECT_EQ(verify.output, "valid, feasible\n");
}

TEST(Cli, VerifyRejectsATamperedTrace) {
  const std::string tasks = temp_path("tamper_tasks.txt");
  const std::string trace = temp_path("tamper_trace.txt");
  const std::string bad = temp_path("tamper_bad.txt");
  write_file(tasks, kThreeTasks);
  ASSERT_EQ(run_cli("schedule " + tasks + " --horizon 3 --out " + trace).exit_code, 0);

  // drop task 2's second execution piece
  std::istringstream in(read_file(trace));
  std::ostringstream kept;
  std::string line;
  bool dropped = false;
  while (std::getline(in, line)) {
    if (!dropped && line.rfind("interval 0 1 2 ", 0) == 0) {
      dropped = true;
      continue;
    }
    kept << line << "\n";
  }
  ASSERT_TRUE(dropped);
  write_file(bad, kept.str());

  const CommandResult verify = run_cli("verify " + tasks + " " + bad);
  EXPECT_EQ(verify.exit_code, 1);
  EXPECT_NE(verify.output.find("miss: task 2 job 0 at 3"), std::string::npos) << verify.output;
  EXPECT_NE(verify.output.find("valid, infeasible"), std::string::npos);
}

TEST(Cli, ReduceTableShowsEveryLevel) {
  const std::string tasks = temp_path("ten.txt");
  write_file(tasks, kTenTasks);
  const CommandResult r = run_cli("reduce --table " + tasks);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.output,
            "reduction levels 2, roots 3\n"
            "tasks: 1/2 1/2 3/5 3/5 4/5 3/5 3/5 3/5 3/5 3/5\n"
            "pack(0): 1 3/5 3/5 4/5 3/5 3/5 3/5 3/5 3/5\n"
            "duals(1): 2/5 2/5 1/5 2/5 2/5 2/5 2/5 2/5\n"
            "pack(1): 1 2/5 4/5 4/5\n"
            "duals(2): 3/5 1/5 1/5\n"
            "pack(2): 1\n");
}

TEST(Cli, ReduceDumpTreePrintsTheForest) {
  const std::string tasks = temp_path("dump.txt");
  write_file(tasks, kThreeTasks);
  const CommandResult r = run_cli("reduce --dump-tree " + tasks);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.output,
            "reduction levels 1, roots 1\n"
            "node 0 pack level=1 u=1\n"
            "  node 1 dual level=1 u=1/3\n"
            "    node 2 pack level=0 u=2/3\n"
            "      node 3 task level=0 u=2/3 task=1\n"
            "  node 4 dual level=1 u=1/3\n"
            "    node 5 pack level=0 u=2/3\n"
            "      node 6 task level=0 u=2/3 task=2\n"
            "  node 7 dual level=1 u=1/3\n"
            "    node 8 pack level=0 u=2/3\n"
            "      node 9 task level=0 u=2/3 task=3\n");
}

TEST(Cli, GenerateIsDeterministicForASeed) {
  const CommandResult a = run_cli("generate --tasks 5 --procs 4 --seed 9");
  const CommandResult b = run_cli("generate --tasks 5 --procs 4 --seed 9");
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.output,
            "processors 4\n"
            "task 1 53 13\n"
            "task 2 77 77\n"
            "task 3 48 40\n"
            "task 4 21 21\n"
            "task 5 11 10\n");

  const std::string out = temp_path("gen.txt");
  const CommandResult c = run_cli("generate --tasks 5 --procs 4 --seed 9 --out " + out);
  EXPECT_EQ(c.exit_code, 0);
  EXPECT_EQ(read_file(out), a.output);
}

TEST(Cli, ScheduleRendersAnSvg) {
  const std::string tasks = temp_path("svg_tasks.txt");
  const std::string svg = temp_path("plot.svg");
  write_file(tasks, kThreeTasks);
  ASSERT_EQ(run_cli("schedule " + tasks + " --horizon 3 --svg-out " + svg).exit_code, 0);
  const std::string content = read_file(svg);
  EXPECT_EQ(content.rfind("<svg xmlns=", 0), 0u);
  EXPECT_NE(content.find("</svg>"), std::string::npos);
  EXPECT_NE(content.find("p0"), std::string::npos);  // processor lane labels
}

TEST(Cli, ExperimentWritesCsvAndSummary) {
  const std::string csv = temp_path("exp.csv");
  const CommandResult r =
      run_cli("experiment levels --procs 2 --sets 1 --seed 3 --out " + csv);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("n  frac_1_level  frac_2_levels  max_levels"), std::string::npos);
  EXPECT_NE(r.output.find("total sets 4, deadline misses 0"), std::string::npos) << r.output;
  EXPECT_EQ(read_file(csv),
            "n,set,levels,jobs,preemptions,avg_preempt,migrations,misses\n"
            "3,0,1,572,569,0.994755,315,0\n"
            "4,0,1,384,333,0.867188,288,0\n"
            "6,0,1,1426,2453,1.720196,940,0\n"
            "8,0,1,1233,1231,0.998378,153,0\n");
}

TEST(Cli, InputErrorsExitWithTwo) {
  const std::string tasks = temp_path("err_tasks.txt");
  write_file(tasks, kThreeTasks);

  const CommandResult missing = run_cli("schedule " + temp_path("nope.txt"));
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_NE(missing.output.find("error: cannot open"), std::string::npos);

  EXPECT_EQ(run_cli("schedule " + tasks + " --horizon abc").exit_code, 2);
  EXPECT_EQ(run_cli("schedule " + tasks + " --horizon 0").exit_code, 2);
  EXPECT_EQ(run_cli("schedule " + tasks + " --packing other").exit_code, 2);

  const std::string overload = temp_path("overload.txt");
  write_file(overload, "processors 1\ntask 1 3 2\ntask 2 3 2\n");
  EXPECT_EQ(run_cli("schedule " + overload).exit_code, 2);  // utilization above capacity
}
