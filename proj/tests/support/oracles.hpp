#pragma once

// Test-only oracles. These re-derive expected results by brute force and by
// replaying event logs; they deliberately avoid the library's own algorithms.

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aero/dag.hpp"
#include "aero/harness.hpp"
#include "aero/packet.hpp"

namespace aero::testing {

// Every node lying on some simple directed path between two anchors
// (anchors themselves included via the empty path), found by DFS path
// enumeration. Exponential, fine for graphs of ten-ish nodes.
inline std::set<TaskId> brute_force_block_nodes(const Dag& dag,
                                                const std::set<TaskId>& anchors) {
  std::set<TaskId> nodes;
  std::map<TaskId, std::vector<TaskId>> succs;
  for (const auto& [from, to] : dag.edges()) succs[from].push_back(to);

  std::vector<TaskId> path;
  std::set<TaskId> on_path;
  std::function<void(TaskId)> dfs = [&](TaskId v) {
    path.push_back(v);
    on_path.insert(v);
    if (anchors.contains(v) && path.size() > 1) {
      for (TaskId n : path) nodes.insert(n);
      // keep walking: a longer path may pass through further anchors
    }
    for (TaskId next : succs[v]) {
      if (!on_path.contains(next)) dfs(next);
    }
    path.pop_back();
    on_path.erase(v);
  };
  for (TaskId a : anchors) {
    nodes.insert(a);
    dfs(a);
  }
  return nodes;
}

inline std::set<Edge> brute_force_entry_edges(const Dag& dag,
                                              const std::set<TaskId>& nodes) {
  std::set<Edge> out;
  for (const Edge& e : dag.edges()) {
    if (nodes.contains(e.second) && !nodes.contains(e.first)) out.insert(e);
  }
  return out;
}

// Random acyclic graph: edges only point from lower to higher rank, so no
// cycle check is involved in generation.
inline Dag random_dag(SplitMix64& rng, std::size_t max_nodes,
                      double edge_prob = 0.35) {
  const std::size_t n = 1 + rng.below(max_nodes);
  Dag dag;
  for (std::size_t i = 0; i < n; ++i) {
    Task t;
    t.id = TaskId{static_cast<std::uint8_t>(i)};
    t.profile.exec_time_us = 100.0 + static_cast<double>(rng.below(900));
    t.profile.energy_uj = 1.0 + static_cast<double>(rng.below(20));
    t.profile.priority = static_cast<std::uint32_t>(i);
    dag.add_task(t);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.unit() < edge_prob) {
        dag.add_edge(TaskId{static_cast<std::uint8_t>(i)},
                     TaskId{static_cast<std::uint8_t>(j)});
      }
    }
  }
  return dag;
}

struct RandomGroup {
  UpdateBundle bundle;
  std::map<TaskId, TaskProfile> insert_profiles;
};

// Random group over `dag`: up to max_members distinct targets, mixed ops,
// occasional dependency bits (which may be nonsense on purpose).
inline RandomGroup random_group(SplitMix64& rng, const Dag& dag,
                                std::size_t max_members,
                                bool allow_invalid_deps = true) {
  RandomGroup out;
  std::vector<TaskId> existing;
  for (const auto& [id, t] : dag.tasks()) existing.push_back(id);

  const std::size_t members = 1 + rng.below(max_members);
  std::set<TaskId> used;
  std::uint8_t fresh_slot = 20;  // clear of small random graphs
  for (std::size_t i = 0; i < members; ++i) {
    BundleMember m;
    const auto roll = rng.below(10);
    if (roll < 6) m.op = UpdateOp::Modify;
    else if (roll < 8) m.op = UpdateOp::Remove;
    else m.op = UpdateOp::Insert;

    if (m.op == UpdateOp::Insert) {
      m.target = TaskId{fresh_slot++};
      TaskProfile p;
      p.exec_time_us = 100.0 + static_cast<double>(rng.below(500));
      p.energy_uj = 1.0 + static_cast<double>(rng.below(10));
      p.priority = 9;
      out.insert_profiles[m.target] = p;
    } else {
      TaskId pick = existing[rng.below(existing.size())];
      if (used.contains(pick)) continue;
      m.target = pick;
    }
    if (used.contains(m.target)) continue;
    used.insert(m.target);

    if (rng.unit() < 0.4) {
      TaskBitmap deps;
      const std::size_t ndeps = 1 + rng.below(2);
      for (std::size_t d = 0; d < ndeps; ++d) {
        if (allow_invalid_deps && rng.unit() < 0.15) {
          deps.set(TaskId{static_cast<std::uint8_t>(25 + rng.below(5))});
        } else {
          deps.set(existing[rng.below(existing.size())]);
        }
      }
      m.deps = deps;
    }
    m.payload.resize(1 + rng.below(64));
    for (auto& b : m.payload) b = static_cast<std::uint8_t>(rng.next() & 0xFF);
    out.bundle.members.push_back(std::move(m));
  }
  if (out.bundle.members.empty()) {
    BundleMember m;
    m.op = UpdateOp::Modify;
    m.target = existing[0];
    m.payload = {0x01};
    out.bundle.members.push_back(m);
  }
  TaskBitmap group;
  for (const auto& m : out.bundle.members) group.set(m.target);
  out.bundle.group_bits = group;
  out.bundle.total_size = 0;
  for (const auto& m : out.bundle.members) {
    out.bundle.total_size += m.payload.size();
  }
  return out;
}

}  // namespace aero::testing
