#pragma once

// Multi-level schedule traces and their text form.
//
// Level 0 holds the physical schedule: which task runs on which processor.
// Level l >= 1 holds the virtual schedule of reduction level l: which dual
// servers run on the virtual processors of that level. Idle intervals are
// recorded explicitly (a processor held by a dummy task or by a server with
// no active client) so budget accounting stays visible in the trace.

#include "runsched/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace runsched {

struct TraceInterval {
  int level = 0;
  int processor = 0;  // physical (level 0) or virtual row index
  int node = -1;      // forest node id; -1 when unknown (parsed traces)
  int task = -1;      // task id for level-0 intervals, -1 on virtual levels
  bool idle = false;  // processor is idle: dummy task or no active client
  Rational t1, t2;
};

struct NodeReplenishment {
  int node = -1;
  Rational at;
  Rational budget;
  Rational deadline;
};

struct RunTrace {
  int processors = 0;
  int levels = 0;  // reduction depth; virtual levels are 1..levels
  Rational horizon;
  std::vector<TraceInterval> intervals;
  std::vector<NodeReplenishment> replenishments;  // only when recording is on
  std::optional<DeadlineMiss> miss;               // simulation stops at a miss
  std::string violation;                          // internal invariant breach, "" if none
};

// --- text form --------------------------------------------------------------
//
//   # comment
//   processors 2
//   levels 1
//   horizon 3/1
//   interval <level> <proc> <id> <t1> <t2>
//
// Times are exact "p/q" rationals. The id column holds the task id on level 0
// (-1 for an idle processor) and the reduction-node id on virtual levels.

inline void serialize_trace(const RunTrace& t, std::ostream& out) {
  out << "processors " << t.processors << "\n";
  out << "levels " << t.levels << "\n";
  out << "horizon " << t.horizon.num() << "/" << t.horizon.den() << "\n";
  for (const auto& iv : t.intervals) {
    // dummy/filler work serializes as idle: files are checked against task
    // systems that do not list the padding tasks
    const int id = iv.level == 0 ? (iv.idle ? -1 : iv.task) : iv.node;
    out << "interval " << iv.level << " " << iv.processor << " " << id << " " << iv.t1.num() << "/"
        << iv.t1.den() << " " << iv.t2.num() << "/" << iv.t2.den() << "\n";
  }
  if (t.miss)
    out << "miss " << t.miss->task << " " << t.miss->job_index << " " << t.miss->at.num() << "/"
        << t.miss->at.den() << "\n";
}

inline RunTrace parse_trace(std::istream& in) {
  RunTrace t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    const std::string where = " (line " + std::to_string(lineno) + ")";
    try {
      if (word == "processors") {
        if (!(ls >> t.processors) || t.processors < 1)
          throw std::invalid_argument("bad processor count");
      } else if (word == "levels") {
        if (!(ls >> t.levels) || t.levels < 0) throw std::invalid_argument("bad level count");
      } else if (word == "horizon") {
        std::string h;
        ls >> h;
        t.horizon = Rational::parse(h);
      } else if (word == "interval") {
        TraceInterval iv;
        int id;
        std::string a, b;
        if (!(ls >> iv.level >> iv.processor >> id >> a >> b))
          throw std::invalid_argument("expected: interval <level> <proc> <id> <t1> <t2>");
        iv.t1 = Rational::parse(a);
        iv.t2 = Rational::parse(b);
        if (iv.t2 <= iv.t1) throw std::invalid_argument("empty or reversed interval");
        if (iv.level == 0) {
          iv.task = id;
          iv.idle = id < 0;
        } else {
          iv.node = id;
        }
        t.intervals.push_back(iv);
      } else if (word == "miss") {
        DeadlineMiss m;
        std::string a;
        if (!(ls >> m.task >> m.job_index >> a)) throw std::invalid_argument("bad miss record");
        m.at = Rational::parse(a);
        t.miss = m;
      } else {
        throw std::invalid_argument("unknown directive '" + word + "'");
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string(e.what()) + where);
    }
  }
  return t;
}

}  // namespace runsched
