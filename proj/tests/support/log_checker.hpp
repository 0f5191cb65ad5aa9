#pragma once

// Replays a simulation event log and re-checks the scheduler's promises from
// the log alone: predecessor order at dispatch, queue pop order, and energy
// bounds. Violations come back as human-readable strings.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "aero/dag.hpp"
#include "aero/schedule.hpp"

namespace aero::testing {

struct LogCheck {
  std::vector<std::string> violations;
  std::size_t dispatches{0};
  bool ok() const { return violations.empty(); }
};

inline LogCheck check_event_log(const std::vector<Event>& events,
                                const Dag& initial, double capacity_uj) {
  LogCheck res;

  std::set<Edge> edges = initial.edges();
  std::map<TaskId, std::string> kinds;
  for (const auto& [id, t] : initial.tasks()) kinds[id] = task_kind_name(t.kind);
  std::map<TaskId, std::uint32_t> completed_iter;  // latest completion
  std::set<TaskId> completed_once;
  std::set<QueueEntry> ready;
  std::map<TaskId, QueueEntry> ready_index;
  const double eps = 1e-6;

  auto drop_ready = [&](TaskId id) {
    auto it = ready_index.find(id);
    if (it != ready_index.end()) {
      ready.erase(it->second);
      ready_index.erase(it);
    }
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.energy_before_uj < -eps || e.energy_before_uj > capacity_uj + eps ||
        e.energy_after_uj < -eps || e.energy_after_uj > capacity_uj + eps) {
      res.violations.push_back("energy out of bounds at event " +
                               std::to_string(i));
    }
    switch (e.kind) {
      case EventKind::TaskAdded:
        kinds[*e.task] = e.detail.substr(0, e.detail.find(':'));
        break;
      case EventKind::TaskRemoved:
        kinds.erase(*e.task);
        completed_iter.erase(*e.task);
        completed_once.erase(*e.task);
        drop_ready(*e.task);
        break;
      case EventKind::EdgeAdded:
        edges.insert(*e.edge);
        break;
      case EventKind::EdgeRemoved:
        edges.erase(*e.edge);
        break;
      case EventKind::Release: {
        QueueEntry entry{e.deadline_us, e.priority.value_or(0), *e.task};
        ready.insert(entry);
        ready_index[*e.task] = entry;
        break;
      }
      case EventKind::Blocked:
        drop_ready(*e.task);
        break;
      case EventKind::Dispatch: {
        res.dispatches += 1;
        if (ready.empty() || ready.begin()->id != *e.task) {
          res.violations.push_back("pop order violation at event " +
                                   std::to_string(i) + " task " +
                                   to_string(*e.task));
        }
        drop_ready(*e.task);
        // predecessor order, judged against the graph as mutated so far.
        // One-shot tasks keep a predecessor satisfied once it completed
        // (iteration resets do not re-arm them); routine tasks need their
        // routine predecessors completed within the current iteration.
        const auto dispatched_kind = kinds.find(*e.task);
        const bool dispatched_one_shot = dispatched_kind != kinds.end() &&
                                         dispatched_kind->second != "routine";
        for (const Edge& edge : edges) {
          if (edge.second != *e.task) continue;
          const TaskId p = edge.first;
          const auto kind_it = kinds.find(p);
          if (kind_it == kinds.end()) continue;  // removed predecessor
          if (kind_it->second == "virtual_start") continue;
          const bool p_one_shot = kind_it->second != "routine";
          const bool done_this_iter = completed_iter.contains(p) &&
                                      completed_iter.at(p) == e.iteration;
          const bool done_ever = completed_once.contains(p);
          const bool satisfied =
              (p_one_shot || dispatched_one_shot) ? done_ever : done_this_iter;
          if (!satisfied) {
            res.violations.push_back(
                "dispatch of " + to_string(*e.task) + " before predecessor " +
                to_string(p) + " at event " + std::to_string(i));
          }
        }
        break;
      }
      case EventKind::Complete:
        completed_iter[*e.task] = e.iteration;
        completed_once.insert(*e.task);
        break;
      default:
        break;
    }
  }
  return res;
}

}  // namespace aero::testing
