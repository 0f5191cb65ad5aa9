#include "aero/schedule.hpp"

namespace aero {

void ReadyQueue::push(const QueueEntry& e) {
  if (index_.contains(e.id)) return;
  entries_.insert(e);
  index_.emplace(e.id, e);
}

std::optional<QueueEntry> ReadyQueue::peek() const {
  if (entries_.empty()) return std::nullopt;
  return *entries_.begin();
}

std::optional<QueueEntry> ReadyQueue::pop() {
  if (entries_.empty()) return std::nullopt;
  QueueEntry e = *entries_.begin();
  entries_.erase(entries_.begin());
  index_.erase(e.id);
  return e;
}

bool ReadyQueue::remove(TaskId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return false;
  entries_.erase(it->second);
  index_.erase(it);
  return true;
}

std::vector<QueueEntry> ReadyQueue::snapshot() const {
  return {entries_.begin(), entries_.end()};
}

void IterationState::note_completion(const Dag& dag, TaskId id) {
  const Task& t = dag.task(id);
  if (t.kind == TaskKind::Routine) completed_routine.insert(id);
  for (TaskId succ : dag.successors(id)) {
    if (is_one_shot(dag.task(succ).kind)) latched[succ].insert(id);
  }
}

void IterationState::latch_existing(const Dag& dag) {
  for (const auto& [id, t] : dag.tasks()) {
    if (!is_one_shot(t.kind)) continue;
    for (TaskId pred : dag.predecessors(id)) {
      if (dag.task(pred).status == TaskStatus::Completed) latched[id].insert(pred);
    }
  }
}

bool IterationState::preds_satisfied(const Dag& dag, TaskId id) const {
  const bool one_shot = is_one_shot(dag.task(id).kind);
  for (TaskId pred : dag.predecessors(id)) {
    if (one_shot) {
      auto it = latched.find(id);
      if (it != latched.end() && it->second.contains(pred)) continue;
    }
    if (dag.task(pred).status != TaskStatus::Completed) return false;
  }
  return true;
}

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::IterationStart: return "iteration_start";
    case EventKind::IterationEnd: return "iteration_end";
    case EventKind::Release: return "release";
    case EventKind::Blocked: return "blocked";
    case EventKind::Dispatch: return "dispatch";
    case EventKind::Complete: return "complete";
    case EventKind::Idle: return "idle";
    case EventKind::UpdateArrival: return "update_arrival";
    case EventKind::ChainSpawned: return "chain_spawned";
    case EventKind::UpdateValidated: return "update_validated";
    case EventKind::DagAdjusted: return "dag_adjusted";
    case EventKind::UpdateWork: return "update_work";
    case EventKind::UpdateApplied: return "update_applied";
    case EventKind::UpdateFinalized: return "update_finalized";
    case EventKind::UpdateAborted: return "update_aborted";
    case EventKind::MemberInterrupted: return "member_interrupted";
    case EventKind::TaskAdded: return "task_added";
    case EventKind::TaskRemoved: return "task_removed";
    case EventKind::EdgeAdded: return "edge_added";
    case EventKind::EdgeRemoved: return "edge_removed";
  }
  return "unknown";
}

void refresh_ready(Dag& dag, IterationState& state, ReadyQueue& queue,
                   const DeadlinePolicy& policy, const std::set<TaskId>& barred,
                   double now_us, std::uint32_t iteration,
                   std::vector<Event>* log) {
  std::vector<TaskId> ids;
  ids.reserve(dag.tasks().size());
  for (const auto& [id, t] : dag.tasks()) ids.push_back(id);
  for (TaskId id : ids) {
    const Task& t = dag.task(id);
    if (t.kind == TaskKind::VirtualStart || t.placeholder) continue;
    if (t.status == TaskStatus::Completed) continue;
    if (queue.contains(id)) continue;
    if (t.kind == TaskKind::Routine && barred.contains(id)) continue;
    if (!state.preds_satisfied(dag, id)) continue;

    QueueEntry entry;
    entry.id = id;
    entry.priority = t.profile.priority;
    const bool deadlined =
        t.kind != TaskKind::Update || policy.update_tasks_have_deadline;
    if (deadlined) {
      entry.deadline_us = now_us + policy.margin_factor * t.profile.exec_time_us;
    }
    queue.push(entry);
    state.release_us[id] = now_us;
    dag.task(id).status = TaskStatus::Ready;
    if (log) {
      Event e;
      e.time_us = now_us;
      e.kind = EventKind::Release;
      e.iteration = iteration;
      e.task = id;
      e.deadline_us = entry.deadline_us;
      e.priority = entry.priority;
      log->push_back(e);
    }
  }
}

std::optional<bool> record_deadline(const DeadlinePolicy& policy, const Task& task,
                                    double release_us, double completion_us) {
  if (task.kind != TaskKind::Routine) return std::nullopt;
  return completion_us - release_us >
         policy.margin_factor * task.profile.exec_time_us;
}

}  // namespace aero
