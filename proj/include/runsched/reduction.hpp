#pragma once

// Off-line reduction of a fully-utilized task system to unit servers.
//
// One reduction step packs the current servers into bins of utilization <= 1
// (greedy, utilization-descending) and replaces every non-unit bin by its
// dual, whose utilization is the complement 1 - mu. Unit bins become roots.
// Each root is a virtual uniprocessor system; the scheduler runs EDF on every
// root and inverts the dual decisions level by level to recover a schedule of
// the original tasks.
//
// Node levels follow the reduction index: task leaves are level 0, a pack node
// sits at the level of its clients, a dual node one level above the pack it
// complements. Node ids are assigned in pre-order (roots first), so traces and
// goldens are reproducible.

#include "runsched/model.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace runsched {

enum class NodeKind { task_leaf, pack, dual };

enum class PackHeuristic { first_fit_decreasing, worst_fit_decreasing };

struct ReductionNode {
  int id = -1;
  NodeKind kind = NodeKind::task_leaf;
  Rational utilization;
  int level = 0;
  int parent = -1;            // -1 for roots
  int task = -1;              // task id, leaves only
  std::vector<int> children;  // pack: client nodes; dual: the single pack below
};

struct ReductionForest {
  std::vector<ReductionNode> nodes;  // index == node id, pre-order per root
  std::vector<int> roots;            // unit pack nodes, in creation order
  std::vector<Task> tasks;           // the (padded) system the leaves refer to
  int processors = 0;

  const ReductionNode& node(int id) const { return nodes.at(id); }

  // highest root level; the number of dual layers crossed
  int depth() const {
    int d = 0;
    for (int r : roots) d = std::max(d, nodes[r].level);
    return d;
  }
};

inline Rational dual_utilization(const Rational& mu) {
  if (mu <= Rational(0) || mu >= Rational(1))
    throw std::invalid_argument("dual is defined only for utilization in (0, 1)");
  return Rational(1) - mu;
}

// Greedy packing of utilizations into bins summing to <= 1. Items are placed
// in descending utilization order (stable on ties); first-fit takes the lowest
// bin with room, worst-fit the bin with the most residual capacity (lowest
// index on ties). Returns bins as index lists into `u`, in creation order.
inline std::vector<std::vector<int>> pack_bins(const std::vector<Rational>& u, PackHeuristic h) {
  std::vector<int> order(u.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return u[a] > u[b]; });

  std::vector<std::vector<int>> bins;
  std::vector<Rational> load;
  for (int i : order) {
    if (u[i] <= Rational(0) || u[i] > Rational(1))
      throw std::invalid_argument("pack: utilization out of (0, 1]");
    int chosen = -1;
    for (int b = 0; b < static_cast<int>(bins.size()); ++b) {
      if (load[b] + u[i] > Rational(1)) continue;
      if (h == PackHeuristic::first_fit_decreasing) {
        chosen = b;
        break;
      }
      if (chosen < 0 || load[b] < load[chosen]) chosen = b;  // most residual capacity
    }
    if (chosen < 0) {
      bins.emplace_back();
      load.emplace_back();
      chosen = static_cast<int>(bins.size()) - 1;
    }
    bins[chosen].push_back(i);
    load[chosen] += u[i];
  }
  return bins;
}

namespace detail {

struct TempNode {
  NodeKind kind;
  Rational utilization;
  int level = 0;
  int task = -1;
  std::vector<int> children;  // indices into the temp pool
};

inline void check_packed_invariants(const std::vector<Rational>& bin_loads) {
  // pairwise bin sums must exceed 1, otherwise the greedy step would have
  // merged them; a violation indicates a packing bug
  for (std::size_t a = 0; a < bin_loads.size(); ++a)
    for (std::size_t b = a + 1; b < bin_loads.size(); ++b)
      if (bin_loads[a] + bin_loads[b] <= Rational(1))
        throw std::logic_error("packing produced mergeable bins");
}

}  // namespace detail

// Builds the full reduction forest of a system whose total utilization equals
// the processor count exactly (pad first). Applies pack + dual until every
// remaining server is a unit server.
inline ReductionForest build_forest(const TaskSystem& system,
                                    PackHeuristic h = PackHeuristic::first_fit_decreasing) {
  validate(system);
  if (total_utilization(system) != Rational(system.processors))
    throw std::invalid_argument(
        "reduction requires total utilization equal to the processor count (pad first)");

  std::vector<detail::TempNode> pool;
  std::vector<int> items;  // current level's servers, as pool indices
  for (const auto& t : system.tasks) {
    detail::TempNode leaf;
    leaf.kind = NodeKind::task_leaf;
    leaf.utilization = t.utilization;
    leaf.level = 0;
    leaf.task = t.id;
    pool.push_back(std::move(leaf));
    items.push_back(static_cast<int>(pool.size()) - 1);
  }

  std::vector<int> root_tmp;
  int level = 0;
  while (!items.empty()) {
    if (level > 64) throw std::logic_error("reduction did not terminate");
    std::vector<Rational> u;
    u.reserve(items.size());
    for (int i : items) u.push_back(pool[i].utilization);
    const auto bins = pack_bins(u, h);

    std::vector<Rational> loads;
    std::vector<int> next;
    for (const auto& bin : bins) {
      detail::TempNode packed;
      packed.kind = NodeKind::pack;
      packed.level = level;
      for (int j : bin) {
        packed.children.push_back(items[j]);
        packed.utilization += pool[items[j]].utilization;
      }
      loads.push_back(packed.utilization);
      pool.push_back(std::move(packed));
      const int pack_id = static_cast<int>(pool.size()) - 1;
      if (pool[pack_id].utilization == Rational(1)) {
        root_tmp.push_back(pack_id);
        continue;
      }
      detail::TempNode dual;
      dual.kind = NodeKind::dual;
      dual.level = level + 1;
      dual.utilization = dual_utilization(pool[pack_id].utilization);
      dual.children.push_back(pack_id);
      pool.push_back(std::move(dual));
      next.push_back(static_cast<int>(pool.size()) - 1);
    }
    detail::check_packed_invariants(loads);
    items = std::move(next);
    ++level;
  }

  // renumber pre-order, roots first in creation order
  ReductionForest forest;
  forest.processors = system.processors;
  forest.tasks = system.tasks;
  for (int r : root_tmp) {
    forest.roots.push_back(static_cast<int>(forest.nodes.size()));
    // iterative pre-order DFS
    std::vector<std::pair<int, int>> stack = {{r, -1}};  // (pool id, final parent)
    while (!stack.empty()) {
      auto [p, parent] = stack.back();
      stack.pop_back();
      ReductionNode n;
      n.id = static_cast<int>(forest.nodes.size());
      n.kind = pool[p].kind;
      n.utilization = pool[p].utilization;
      n.level = pool[p].level;
      n.task = pool[p].task;
      n.parent = parent;
      if (parent >= 0) forest.nodes[parent].children.push_back(n.id);
      const int self = n.id;
      forest.nodes.push_back(std::move(n));
      // push children in reverse so they pop in order
      for (auto it = pool[p].children.rbegin(); it != pool[p].children.rend(); ++it)
        stack.emplace_back(*it, self);
    }
  }
  return forest;
}

// Task ids of all leaves in the subtree of `id`, in tree order.
inline std::vector<int> leaves_under(const ReductionForest& f, int id) {
  std::vector<int> out;
  std::vector<int> stack = {id};
  while (!stack.empty()) {
    const auto& n = f.node(stack.back());
    stack.pop_back();
    if (n.kind == NodeKind::task_leaf) out.push_back(n.task);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

inline const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::task_leaf: return "task";
    case NodeKind::pack: return "pack";
    case NodeKind::dual: return "dual";
  }
  return "?";
}

// Indented text rendering of the forest, one node per line:
//   node <id> <kind> level=<l> u=<p/q> [task=<id>]
inline std::string dump_forest(const ReductionForest& f) {
  std::string out;
  for (int r : f.roots) {
    std::vector<std::pair<int, int>> stack = {{r, 0}};
    while (!stack.empty()) {
      auto [id, indent] = stack.back();
      stack.pop_back();
      const auto& n = f.node(id);
      out.append(indent * 2, ' ');
      out += "node " + std::to_string(n.id) + " " + node_kind_name(n.kind) +
             " level=" + std::to_string(n.level) + " u=" + n.utilization.to_string();
      if (n.kind == NodeKind::task_leaf) out += " task=" + std::to_string(n.task);
      out += "\n";
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it)
        stack.emplace_back(*it, indent + 1);
    }
  }
  return out;
}

// Row view of the reduction, level by level: the servers entering level i
// (tasks for i=0, dual servers above) and the bins the packing formed there.
struct ReductionTableRow {
  std::string label;
  std::vector<Rational> values;
};

inline std::vector<ReductionTableRow> reduction_table(const ReductionForest& f) {
  std::vector<ReductionTableRow> rows;
  for (int level = 0; level <= f.depth(); ++level) {
    ReductionTableRow items{level == 0 ? "tasks" : "duals(" + std::to_string(level) + ")", {}};
    ReductionTableRow packs{"pack(" + std::to_string(level) + ")", {}};
    for (const auto& n : f.nodes) {
      if (n.level != level) continue;
      if (level == 0 ? n.kind == NodeKind::task_leaf : n.kind == NodeKind::dual)
        items.values.push_back(n.utilization);
      else if (n.kind == NodeKind::pack)
        packs.values.push_back(n.utilization);
    }
    rows.push_back(std::move(items));
    rows.push_back(std::move(packs));
  }
  return rows;
}

}  // namespace runsched
