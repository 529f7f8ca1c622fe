#pragma once

// On-line scheduler over a reduction forest.
//
// Every root is a virtual uniprocessor running EDF over its clients; a dual
// node executes exactly when its parent pack picked it, and a pack executes
// exactly when its dual does not (roots always execute). The tasks picked by
// executing level-0 packs run on the physical processors. All state advances
// event-to-event: window ends, job boundaries, completions and budget
// exhaustions of executing nodes.
//
// Arithmetic is exact. Every quantity the simulation touches lives on the
// grid 1/G where G = lcm(utilization denominators) * lcm(period and start
// denominators): window bounds are realized client deadlines (task grid) and
// budgets are utilization * window length. Times are stored as integers
// scaled by G, so the hot loop is integer-only; G is arbitrary precision
// because hyperperiods of random period sets overflow any fixed width.

#include "runsched/reduction.hpp"
#include "runsched/trace.hpp"

#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <utility>

namespace runsched {

struct DispatchDecision {
  std::vector<char> runs;          // by node id: executing now
  std::vector<int> picks;          // by node id: chosen client node, -1 = none
  std::vector<int> selected;       // task ids executing at level 0, ascending
  std::vector<int> processor_task; // level 0: processor -> task id, -1 = idle
};

class RunScheduler {
 public:
  struct Options {
    bool record_trace = true;
    bool record_virtual_levels = true;
    bool record_replenishments = false;
    // Streaming observer of level-0 rows in scaled integer time (multiply
    // Rational times by time_scale() to compare). Used by the experiment
    // harness to gather statistics without storing traces.
    std::function<void(int processor, int task, bool idle, const BigInt& t1, const BigInt& t2)>
        level0_sink;
  };

  explicit RunScheduler(const ReductionForest& forest);
  RunScheduler(const ReductionForest& forest, Options opt) : f_(&forest), opt_(std::move(opt)) {
    prepare();
    reset();
  }

  const ReductionForest& forest() const { return *f_; }
  const BigInt& time_scale() const { return scale_; }
  Rational now() const { return Rational(now_, scale_); }
  bool halted() const { return halted_; }
  const DispatchDecision& decision() const { return decision_; }

  Rational next_event() const { return Rational(next_event_scaled(), scale_); }

  // Remaining budget: pack -> its own budget, dual -> the complement budget,
  // task leaf -> remaining work of the current job.
  Rational node_budget(int id) const {
    const auto& n = f_->node(id);
    if (n.kind == NodeKind::task_leaf) return Rational(task_rt_[id].rem, scale_);
    if (n.kind == NodeKind::pack) return Rational(pack_rt_[id].pack_rem, scale_);
    return Rational(pack_rt_[n.children[0]].dual_rem, scale_);
  }

  // Current window [start, deadline) of a pack (a dual shares its pack's
  // window); for a task leaf, the current job's window.
  std::pair<Rational, Rational> node_window(int id) const {
    const auto& n = f_->node(id);
    if (n.kind == NodeKind::task_leaf)
      return {Rational(task_rt_[id].release, scale_), Rational(task_rt_[id].deadline, scale_)};
    const int pack = n.kind == NodeKind::pack ? id : n.children[0];
    return {Rational(pack_rt_[pack].ws, scale_), Rational(pack_rt_[pack].we, scale_)};
  }

  void reset() {
    now_ = 0;
    halted_ = false;
    trace_ = RunTrace{};
    trace_.processors = f_->processors;
    trace_.levels = depth_;
    for (int id : leaves_) {
      auto& t = task_rt_[id];
      t.job = 0;
      t.release = t.start;
      t.deadline = t.start + t.period;
      t.rem = t.cost;
    }
    proc_entry_.assign(f_->processors, -1);
    vrow_entry_.assign(depth_ + 1, {});
    row_last_interval_.assign(depth_ + 1, {});
    row_last_interval_[0].assign(f_->processors, -1);
    for (int id : packs_by_level_) roll_window(id);
    dispatch();
  }

  // Simulate [0, horizon). The horizon must lie on the system's time grid
  // (any integer does). Returns the recorded trace; on a deadline miss or an
  // internal invariant violation the simulation stops at that instant.
  RunTrace run(const Rational& horizon) {
    if (horizon <= Rational(0)) throw std::invalid_argument("horizon must be positive");
    const BigInt h = to_scaled(horizon, "horizon");
    reset();
    while (!halted_ && now_ < h) {
      BigInt te = next_event_scaled();
      if (te > h) te = h;
      settle(te);
      roll_tasks();
      if (halted_) break;
      roll_windows();
      if (halted_) break;
      if (now_ >= h) break;
      dispatch();
    }
    trace_.horizon = halted_ ? now() : horizon;
    return trace_;
  }

 private:
  struct TaskRt {
    BigInt start, period, cost;      // static, scaled
    long job = 0;
    BigInt release, deadline, rem;
  };
  struct PackRt {
    BigInt ws, we;
    BigInt pack_rem;
    BigInt dual_rem;  // budget of the dual wrapping this pack (0 for roots)
    int dual = -1;    // node id of that dual, -1 for roots
  };

  void prepare() {
    if (f_->roots.empty()) throw std::invalid_argument("empty reduction forest");
    // common grid: product of the utilization lcm and the period/start lcm,
    // so that every budget u * (window length) is integral when scaled
    BigInt lcm_u = 1, lcm_t = 1;
    for (const auto& t : f_->tasks) {
      lcm_u = boost::multiprecision::lcm(lcm_u, t.utilization.den());
      lcm_t = boost::multiprecision::lcm(lcm_t, t.period.den());
      lcm_t = boost::multiprecision::lcm(lcm_t, t.start.den());
    }
    scale_ = lcm_u * lcm_t;

    const int n = static_cast<int>(f_->nodes.size());
    task_rt_.assign(n, TaskRt{});
    pack_rt_.assign(n, PackRt{});
    depth_ = f_->depth();
    packs_at_level_.assign(depth_ + 1, {});
    is_root_.assign(n, false);
    for (int r : f_->roots) is_root_[r] = true;

    for (const auto& node : f_->nodes) {
      if (node.kind == NodeKind::task_leaf) {
        leaves_.push_back(node.id);
        const Task* t = nullptr;
        for (const auto& cand : f_->tasks)
          if (cand.id == node.task) t = &cand;
        if (!t) throw std::logic_error("leaf refers to unknown task");
        auto& rt = task_rt_[node.id];
        rt.start = to_scaled(t->start, "task start");
        rt.period = to_scaled(t->period, "task period");
        rt.cost = mul_exact(rt.period, t->utilization);
        task_of_leaf_[node.id] = t;
      } else if (node.kind == NodeKind::pack) {
        packs_at_level_[node.level].push_back(node.id);
        pack_rt_[node.id].dual = node.parent;  // parent of a non-root pack is its dual
      }
    }
    // roll order: children before parents, i.e. levels ascending
    for (const auto& lvl : packs_at_level_)
      for (int id : lvl) packs_by_level_.push_back(id);
  }

  BigInt to_scaled(const Rational& r, const char* what) const {
    if (scale_ % r.den() != 0)
      throw std::invalid_argument(std::string(what) + " " + r.to_string() +
                                  " is not on the system's time grid");
    return r.num() * (scale_ / r.den());
  }

  // value * factor for rational factor, asserting exactness
  static BigInt mul_exact(const BigInt& value, const Rational& factor) {
    BigInt q, r;
    boost::multiprecision::divide_qr(value * factor.num(), factor.den(), q, r);
    if (r != 0) throw std::logic_error("scaled arithmetic left the time grid");
    return q;
  }

  // Earliest client deadline of `id` (task or pack) strictly after `after`.
  // Deadlines of already-completed jobs still count: server windows must break
  // at every client job boundary, even when the job finished early.  A window
  // spanning a release would let the enclosing levels schedule the server's
  // whole budget before that release, starving the newly released job of the
  // share it is owed afterwards.
  BigInt next_deadline_of(int id, const BigInt& after) const {
    const auto& n = f_->node(id);
    if (n.kind == NodeKind::task_leaf) {
      const auto& t = task_rt_[id];
      BigInt cand = t.deadline;
      if (cand <= after) cand += ((after - cand) / t.period + 1) * t.period;
      return cand;
    }
    BigInt best = -1;
    for (int c : n.children) {
      BigInt cand;
      if (f_->node(c).kind == NodeKind::task_leaf) {
        cand = next_deadline_of(c, after);
      } else {  // dual client over the pack below it
        const int pack = f_->node(c).children[0];
        const auto& p = pack_rt_[pack];
        cand = p.we > after ? p.we : next_deadline_of(pack, after);
      }
      if (best < 0 || cand < best) best = cand;
    }
    return best;
  }

  void roll_window(int id) {
    auto& p = pack_rt_[id];
    p.ws = now_;
    p.we = next_deadline_of(id, now_);
    const BigInt len = p.we - p.ws;
    p.pack_rem = mul_exact(len, f_->node(id).utilization);
    p.dual_rem = len - p.pack_rem;
    if (opt_.record_replenishments) {
      trace_.replenishments.push_back(
          {id, now(), Rational(p.pack_rem, scale_), Rational(p.we, scale_)});
      if (p.dual >= 0)
        trace_.replenishments.push_back(
            {p.dual, now(), Rational(p.dual_rem, scale_), Rational(p.we, scale_)});
    }
  }

  void violation(const std::string& msg) {
    trace_.violation = msg + " at t=" + now().to_string();
    halted_ = true;
  }

  void settle(const BigInt& te) {
    const BigInt dt = te - now_;
    if (dt <= 0 && !(te == now_)) throw std::logic_error("time went backwards");
    if (dt > 0) {
      record_rows(te);
      for (int p = 0; p < static_cast<int>(proc_entry_.size()); ++p) {
        const int e = proc_entry_[p];
        if (e >= 0 && f_->node(e).kind == NodeKind::task_leaf) task_rt_[e].rem -= dt;
      }
      for (int id : packs_by_level_) {
        auto& p = pack_rt_[id];
        if (decision_.runs[id] && decision_.picks[id] >= 0) p.pack_rem -= dt;
        if (p.dual >= 0 && decision_.runs[p.dual]) p.dual_rem -= dt;
      }
    }
    now_ = te;
  }

  void record_rows(const BigInt& te) {
    for (int p = 0; p < static_cast<int>(proc_entry_.size()); ++p) {
      const int e = proc_entry_[p];
      int task = -1;
      bool idle = true;
      if (e >= 0 && f_->node(e).kind == NodeKind::task_leaf) {
        task = f_->node(e).task;
        idle = task_of_leaf_.at(e)->dummy;
      }
      if (opt_.level0_sink) opt_.level0_sink(p, task, idle, now_, te);
      if (opt_.record_trace) push_interval(0, p, e, task, idle, te);
    }
    if (!opt_.record_trace || !opt_.record_virtual_levels) return;
    for (int lvl = 1; lvl <= depth_; ++lvl) {
      const auto& rows = vrow_entry_[lvl];
      for (int rw = 0; rw < static_cast<int>(rows.size()); ++rw) {
        const int e = rows[rw];
        if (e < 0) continue;
        push_interval(lvl, rw, e, -1, f_->node(e).kind == NodeKind::pack, te);
      }
    }
  }

  void push_interval(int level, int row, int node, int task, bool idle, const BigInt& te) {
    auto& last = row_last_interval_[level][row];
    if (last >= 0) {
      auto& iv = trace_.intervals[last];
      if (iv.node == node && iv.task == task && iv.idle == idle &&
          iv.t2 == Rational(now_, scale_)) {
        iv.t2 = Rational(te, scale_);
        return;
      }
    }
    TraceInterval iv;
    iv.level = level;
    iv.processor = row;
    iv.node = node;
    iv.task = task;
    iv.idle = idle;
    iv.t1 = Rational(now_, scale_);
    iv.t2 = Rational(te, scale_);
    trace_.intervals.push_back(iv);
    last = static_cast<int>(trace_.intervals.size()) - 1;
  }

  void roll_tasks() {
    for (int id : leaves_) {
      auto& t = task_rt_[id];
      if (t.deadline != now_) continue;
      if (t.rem != 0) {
        trace_.miss = DeadlineMiss{f_->node(id).task, t.job, now()};
        halted_ = true;
        return;
      }
      ++t.job;
      t.release = t.deadline;
      t.deadline += t.period;
      t.rem = t.cost;
    }
  }

  void roll_windows() {
    for (int id : packs_by_level_) {
      auto& p = pack_rt_[id];
      if (p.we != now_) continue;
      if (p.pack_rem != 0)
        return violation("server budget of node " + std::to_string(id) +
                         " not exhausted at its deadline (left " +
                         Rational(p.pack_rem, scale_).to_string() + ")");
      if (p.dual >= 0 && p.dual_rem != 0)
        return violation("dual budget of node " + std::to_string(p.dual) +
                         " not exhausted at its deadline (left " +
                         Rational(p.dual_rem, scale_).to_string() + ")");
      roll_window(id);
    }
  }

  void dispatch() {
    const int n = static_cast<int>(f_->nodes.size());
    decision_.runs.assign(n, 0);
    decision_.picks.assign(n, -1);
    for (int lvl = depth_; lvl >= 0; --lvl) {
      for (int id : packs_at_level_[lvl]) {
        const auto& p = pack_rt_[id];
        const bool runs = is_root_[id] ? true : !decision_.runs[p.dual];
        decision_.runs[id] = runs;
        if (!runs) continue;
        // EDF among active clients: (deadline, release, node id) ascending
        int best = -1;
        BigInt bd, br;
        for (int c : f_->node(id).children) {
          BigInt d, r;
          if (f_->node(c).kind == NodeKind::task_leaf) {
            const auto& t = task_rt_[c];
            if (t.release > now_ || t.rem == 0) continue;
            d = t.deadline;
            r = t.release;
          } else {
            const auto& cp = pack_rt_[f_->node(c).children[0]];
            if (cp.dual_rem == 0) continue;
            d = cp.we;
            r = cp.ws;
          }
          if (best < 0 || std::tie(d, r, c) < std::tie(bd, br, best)) {
            best = c;
            bd = d;
            br = r;
          }
        }
        decision_.picks[id] = best;
        if (best >= 0) {
          decision_.runs[best] = 1;
          if (p.pack_rem == 0)
            return violation("node " + std::to_string(id) +
                             " dispatched with an exhausted budget");
        }
      }
    }

    // level-0 entries: picked tasks, or the pack itself when it has none
    std::vector<int> entries;
    decision_.selected.clear();
    for (int id : packs_at_level_[0]) {
      if (!decision_.runs[id]) continue;
      const int pick = decision_.picks[id];
      entries.push_back(pick >= 0 ? pick : id);
      if (pick >= 0) decision_.selected.push_back(f_->node(pick).task);
    }
    std::sort(decision_.selected.begin(), decision_.selected.end());
    if (static_cast<int>(entries.size()) > f_->processors)
      return violation("more tasks selected than processors (" +
                       std::to_string(entries.size()) + ")");
    assign_rows(proc_entry_, entries, /*fixed_rows=*/true, 0);
    decision_.processor_task.assign(proc_entry_.size(), -1);
    for (int p = 0; p < static_cast<int>(proc_entry_.size()); ++p)
      if (proc_entry_[p] >= 0 && f_->node(proc_entry_[p]).kind == NodeKind::task_leaf)
        decision_.processor_task[p] = f_->node(proc_entry_[p]).task;

    if (opt_.record_trace && opt_.record_virtual_levels) {
      for (int lvl = 1; lvl <= depth_; ++lvl) {
        std::vector<int> ve;
        for (const auto& node : f_->nodes) {
          if (node.level != lvl) continue;
          if (node.kind == NodeKind::dual && decision_.runs[node.id])
            ve.push_back(node.id);
          else if (node.kind == NodeKind::pack && decision_.runs[node.id] &&
                   decision_.picks[node.id] < 0)
            ve.push_back(node.id);
        }
        assign_rows(vrow_entry_[lvl], ve, /*fixed_rows=*/false, lvl);
      }
    }
  }

  // Affinity assignment: entries still present keep their row; newcomers fill
  // free rows in ascending order (real tasks by task id first, then markers).
  void assign_rows(std::vector<int>& rows, const std::vector<int>& entries, bool fixed_rows,
                   int level) {
    std::vector<char> wanted(f_->nodes.size(), 0);
    for (int e : entries) wanted[e] = 1;
    std::vector<char> placed(f_->nodes.size(), 0);
    for (int& slot : rows) {
      if (slot >= 0 && wanted[slot])
        placed[slot] = 1;
      else
        slot = -1;
    }
    std::vector<int> newcomers;
    for (int e : entries)
      if (!placed[e]) newcomers.push_back(e);
    std::sort(newcomers.begin(), newcomers.end(), [&](int a, int b) {
      const auto key = [&](int e) {
        const auto& nd = f_->node(e);
        const bool marker = nd.kind != NodeKind::task_leaf;
        return std::make_tuple(marker, marker ? nd.id : nd.task, nd.id);
      };
      return key(a) < key(b);
    });
    std::size_t slot = 0;
    for (int e : newcomers) {
      while (slot < rows.size() && rows[slot] >= 0) ++slot;
      if (slot == rows.size()) {
        if (fixed_rows) throw std::logic_error("processor assignment overflow");
        rows.push_back(-1);
        row_last_interval_[level].push_back(-1);
      }
      rows[slot] = e;
    }
  }

  BigInt next_event_scaled() const {
    BigInt best = -1;
    const auto consider = [&](const BigInt& t) {
      if (best < 0 || t < best) best = t;
    };
    for (int id : leaves_) {
      const auto& t = task_rt_[id];
      consider(t.release > now_ ? t.release : t.deadline);
      if (decision_.runs[id]) consider(now_ + t.rem);
    }
    for (int id : packs_by_level_) {
      const auto& p = pack_rt_[id];
      consider(p.we);
      if (decision_.runs[id] && decision_.picks[id] >= 0) consider(now_ + p.pack_rem);
      if (p.dual >= 0 && decision_.runs[p.dual]) consider(now_ + p.dual_rem);
    }
    return best;
  }

  const ReductionForest* f_;
  Options opt_;
  BigInt scale_ = 1;
  int depth_ = 0;
  std::vector<int> leaves_;
  std::vector<std::vector<int>> packs_at_level_;
  std::vector<int> packs_by_level_;  // ascending level
  std::vector<char> is_root_;
  std::map<int, const Task*> task_of_leaf_;

  BigInt now_;
  bool halted_ = false;
  std::vector<TaskRt> task_rt_;
  std::vector<PackRt> pack_rt_;
  DispatchDecision decision_;
  std::vector<int> proc_entry_;
  std::vector<std::vector<int>> vrow_entry_;
  std::vector<std::vector<int>> row_last_interval_;
  RunTrace trace_;
};

inline RunScheduler::RunScheduler(const ReductionForest& forest)
    : RunScheduler(forest, Options{}) {}

}  // namespace runsched
