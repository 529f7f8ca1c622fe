// Command-line front end: schedule a task-set file, verify a trace against a
// task set, dump a reduction, run batch experiments, or generate random sets.
//
// Exit codes: 0 success (verify: valid and feasible), 1 deadline miss or
// invalid/infeasible result, 2 usage or input errors.

#include "CLI11.hpp"
#include "runsched/experiment.hpp"
#include "runsched/generator.hpp"
#include "runsched/model.hpp"
#include "runsched/reduction.hpp"
#include "runsched/scheduler.hpp"
#include "runsched/svg.hpp"
#include "runsched/trace.hpp"
#include "runsched/validation.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

using namespace runsched;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RUNSCHED_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

TaskSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return parse_task_system(in);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << content;
}

PackHeuristic heuristic_of(const std::string& name) {
  return name == "wfd" ? PackHeuristic::worst_fit_decreasing
                       : PackHeuristic::first_fit_decreasing;
}

Rational parse_time(const std::string& s, const char* what) {
  try {
    return Rational::parse(s);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("bad ") + what + ": " + s);
  }
}

int cmd_schedule(const std::string& file, const std::string& horizon_str,
                 const std::string& out, const std::string& svg_out,
                 const std::string& packing) {
  TaskSystem sys = load_system(file);
  const int dummies = pad_to_full_utilization(sys);
  const ReductionForest forest = build_forest(sys, heuristic_of(packing));

  const Rational hyper = hyperperiod(sys);
  Rational horizon = hyper < Rational(5000) ? hyper : Rational(5000);
  if (!horizon_str.empty()) horizon = parse_time(horizon_str, "horizon");

  RunScheduler::Options opt;
  opt.record_replenishments = true;
  RunScheduler sched(forest, opt);
  const RunTrace trace = sched.run(horizon);
  const ValidityReport rep = check_trace(sys, trace);
  const PreemptionStats stats = count_preemptions(sys, trace);

  std::cout << "tasks " << sys.tasks.size() - dummies << " (+" << dummies << " filler), processors "
            << sys.processors << ", reduction levels " << forest.depth() << "\n";
  std::cout << "horizon " << trace.horizon.to_string() << ", jobs due " << stats.jobs << "\n";
  std::cout << "preemption points " << stats.preemption_points << ", migrations "
            << stats.migrations << ", avg per job " << stats.avg_per_job.to_double() << "\n";
  if (trace.miss)
    std::cout << "DEADLINE MISS: task " << trace.miss->task << " job " << trace.miss->job_index
              << " at " << trace.miss->at.to_string() << "\n";
  if (!trace.violation.empty()) std::cout << "VIOLATION: " << trace.violation << "\n";
  for (const auto& p : rep.problems) std::cout << "problem: " << p << "\n";
  std::cout << (rep.valid && rep.feasible ? "schedule valid and feasible" : "schedule REJECTED")
            << "\n";

  if (!out.empty()) {
    std::ostringstream s;
    serialize_trace(trace, s);
    write_file(out, s.str());
  }
  if (!svg_out.empty()) write_file(svg_out, render_svg(trace, file));
  return rep.valid && rep.feasible ? 0 : 1;
}

int cmd_verify(const std::string& tasks_file, const std::string& trace_file) {
  const TaskSystem sys = load_system(tasks_file);
  std::ifstream in(trace_file);
  if (!in) throw std::invalid_argument("cannot open " + trace_file);
  const RunTrace trace = parse_trace(in);
  const ValidityReport rep = check_trace(sys, trace);
  for (const auto& p : rep.problems) std::cout << "violation: " << p << "\n";
  for (const auto& m : rep.misses)
    std::cout << "miss: task " << m.task << " job " << m.job_index << " at " << m.at.to_string()
              << "\n";
  std::cout << (rep.valid ? "valid" : "invalid") << ", "
            << (rep.feasible ? "feasible" : "infeasible") << "\n";
  return rep.valid && rep.feasible ? 0 : 1;
}

int cmd_reduce(const std::string& file, bool dump_tree, bool table, const std::string& packing) {
  TaskSystem sys = load_system(file);
  pad_to_full_utilization(sys);
  const ReductionForest forest = build_forest(sys, heuristic_of(packing));
  std::cout << "reduction levels " << forest.depth() << ", roots " << forest.roots.size() << "\n";
  if (table)
    for (const auto& row : reduction_table(forest)) {
      std::cout << row.label << ":";
      for (const auto& u : row.values) std::cout << " " << u.to_string();
      std::cout << "\n";
    }
  if (dump_tree) std::cout << dump_forest(forest);
  return 0;
}

int cmd_generate(int tasks, int procs, std::uint64_t seed, int pmin, int pmax,
                 const std::string& out) {
  GeneratorConfig gc;
  gc.tasks = tasks;
  gc.processors = procs;
  gc.seed = seed;
  gc.period_min = pmin;
  gc.period_max = pmax;
  const TaskSystem sys = generate_task_system(gc);
  std::ostringstream s;
  serialize_task_system(sys, s);
  if (out.empty())
    std::cout << s.str();
  else
    write_file(out, s.str());
  return 0;
}

int cmd_experiment(const std::string& kind, int procs, int sets, std::uint64_t seed, int threads,
                   bool full, const std::string& out, const std::string& packing) {
  ExperimentConfig cfg;
  cfg.processors = procs;
  cfg.sets_per_count = full ? 1000 : sets;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.heuristic = heuristic_of(packing);
  const std::vector<SetResult> results = run_experiment(cfg);

  std::ostringstream csv;
  write_csv(results, csv);
  if (out.empty())
    std::cout << csv.str();
  else
    write_file(out, csv.str());

  std::map<int, std::vector<const SetResult*>> by_n;
  for (const auto& r : results) by_n[r.n].push_back(&r);
  if (kind == "levels") {
    std::cout << "n  frac_1_level  frac_2_levels  max_levels\n";
    for (const auto& [n, rows] : by_n) {
      int one = 0, two = 0, mx = 0;
      for (const auto* r : rows) {
        one += r->levels == 1;
        two += r->levels == 2;
        mx = std::max(mx, r->levels);
      }
      const double total = static_cast<double>(rows.size());
      std::printf("%-3d %.3f %.3f %d\n", n, one / total, two / total, mx);
    }
  } else {
    std::cout << "n  min  q1  median  q3  max (avg preemptions per job)\n";
    for (const auto& [n, rows] : by_n) {
      std::vector<double> avgs;
      for (const auto* r : rows) avgs.push_back(r->avg_preempt);
      const FiveNumber f = five_number(avgs);
      std::printf("%-3d %.3f %.3f %.3f %.3f %.3f\n", n, f.min, f.q1, f.median, f.q3, f.max);
    }
  }
  long long misses = 0;
  for (const auto& r : results) misses += r.misses;
  std::cout << "total sets " << results.size() << ", deadline misses " << misses << "\n";
  return misses == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reduction-based multiprocessor real-time scheduling simulator"};
  app.require_subcommand(1);

  std::string file, trace_file, horizon, out, svg_out;
  std::string packing = "ffd";
  bool dump_tree = false, table = false, full = false;
  int tasks = 0, procs = 16, pmin = 5, pmax = 100, sets = 100, threads = 1;
  std::uint64_t seed = default_seed();

  auto* sched = app.add_subcommand("schedule", "simulate a task-set file and check the result");
  sched->add_option("file", file, "task-set file")->required();
  sched->add_option("--horizon", horizon, "simulation horizon (rational, default: hyperperiod capped at 5000)");
  sched->add_option("--out", out, "write the trace to this file");
  sched->add_option("--svg-out", svg_out, "render the schedule to this SVG file");
  sched->add_option("--packing", packing, "packing heuristic: ffd or wfd")
      ->check(CLI::IsMember({"ffd", "wfd"}));

  auto* verify = app.add_subcommand("verify", "check a trace file against a task-set file");
  verify->add_option("tasks", file, "task-set file")->required();
  verify->add_option("trace", trace_file, "trace file")->required();

  auto* reduce = app.add_subcommand("reduce", "show the server reduction of a task set");
  reduce->add_option("file", file, "task-set file")->required();
  reduce->add_flag("--dump-tree", dump_tree, "print every node of the reduction forest");
  reduce->add_flag("--table", table, "print per-level utilization rows");
  reduce->add_option("--packing", packing, "packing heuristic: ffd or wfd")
      ->check(CLI::IsMember({"ffd", "wfd"}));

  auto* gen = app.add_subcommand("generate", "emit a random fully-utilized task set");
  gen->add_option("--tasks", tasks, "number of tasks")->required();
  gen->add_option("--procs", procs, "number of processors");
  gen->add_option("--seed", seed, "random seed (default: RUNSCHED_SEED or 1)");
  gen->add_option("--period-min", pmin, "smallest period");
  gen->add_option("--period-max", pmax, "largest period");
  gen->add_option("--out", out, "output file (default: stdout)");

  auto* exp = app.add_subcommand("experiment", "batch statistics over random task sets");
  std::string kind;
  exp->add_option("kind", kind, "levels or preemptions")
      ->required()
      ->check(CLI::IsMember({"levels", "preemptions"}));
  exp->add_option("--procs", procs, "number of processors");
  exp->add_option("--sets", sets, "task sets per task count");
  exp->add_option("--seed", seed, "master seed (default: RUNSCHED_SEED or 1)");
  exp->add_option("--threads", threads, "worker threads (0 = all cores)");
  exp->add_flag("--full", full, "full-scale batch: 1000 sets per task count");
  exp->add_option("--out", out, "write the per-set CSV to this file");
  exp->add_option("--packing", packing, "packing heuristic: ffd or wfd")
      ->check(CLI::IsMember({"ffd", "wfd"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sched->parsed()) return cmd_schedule(file, horizon, out, svg_out, packing);
    if (verify->parsed()) return cmd_verify(file, trace_file);
    if (reduce->parsed()) return cmd_reduce(file, dump_tree, table, packing);
    if (gen->parsed()) return cmd_generate(tasks, procs, seed, pmin, pmax, out);
    if (exp->parsed()) return cmd_experiment(kind, procs, sets, seed, threads, full, out, packing);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
