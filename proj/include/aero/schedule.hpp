#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aero/dag.hpp"

namespace aero {

struct DeadlinePolicy {
  double margin_factor{1.5};               // absolute deadline = release + margin * exec
  bool update_tasks_have_deadline{false};  // default: update tasks sort last
};

// Pop order: deadlined entries first by (deadline, priority, id); entries
// without a deadline then by (priority, id). Total order, so pop sequences
// are reproducible.
struct QueueEntry {
  std::optional<double> deadline_us;
  std::uint32_t priority{0};
  TaskId id{};

  friend bool operator<(const QueueEntry& a, const QueueEntry& b) {
    if (a.deadline_us.has_value() != b.deadline_us.has_value()) {
      return a.deadline_us.has_value();
    }
    if (a.deadline_us && b.deadline_us && *a.deadline_us != *b.deadline_us) {
      return *a.deadline_us < *b.deadline_us;
    }
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.id < b.id;
  }
};

class ReadyQueue {
 public:
  bool contains(TaskId id) const { return index_.contains(id); }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  void push(const QueueEntry& e);
  std::optional<QueueEntry> peek() const;
  std::optional<QueueEntry> pop();
  bool remove(TaskId id);
  std::vector<QueueEntry> snapshot() const;

 private:
  std::set<QueueEntry> entries_;
  std::map<TaskId, QueueEntry> index_;
};

// Per-run scheduling bookkeeping. Routine statuses reset every iteration;
// one-shot tasks instead latch predecessor completions so a dependency
// satisfied once stays satisfied across resets.
struct IterationState {
  std::uint32_t iteration{1};
  std::set<TaskId> completed_routine;            // this iteration
  std::map<TaskId, double> release_us;           // current instance release
  std::map<TaskId, std::set<TaskId>> latched;    // one-shot -> satisfied preds

  void note_completion(const Dag& dag, TaskId id);
  void latch_existing(const Dag& dag);  // latch completed preds after graph surgery
  bool preds_satisfied(const Dag& dag, TaskId id) const;
};

enum class EventKind {
  IterationStart,
  IterationEnd,
  Release,
  Blocked,   // evicted from the queue by entry blocking
  Dispatch,
  Complete,
  Idle,
  UpdateArrival,
  ChainSpawned,
  UpdateValidated,
  DagAdjusted,
  UpdateWork,  // charged receive/decode/apply block outside the task graph
  UpdateApplied,
  UpdateFinalized,
  UpdateAborted,
  MemberInterrupted,
  TaskAdded,
  TaskRemoved,
  EdgeAdded,
  EdgeRemoved,
};

const char* event_kind_name(EventKind k);

struct Event {
  double time_us{0.0};
  EventKind kind{EventKind::Idle};
  std::uint32_t iteration{0};
  std::optional<TaskId> task;
  double energy_before_uj{0.0};
  double energy_after_uj{0.0};
  std::optional<bool> deadline_miss;
  std::optional<double> deadline_us;   // absolute, on Release
  std::optional<std::uint32_t> priority;
  std::optional<std::uint32_t> version;
  std::optional<Edge> edge;
  std::string detail;
};

// Enqueue every runnable task whose predecessors are satisfied, recording its
// release time and queue key. `barred` holds routine tasks whose block entry
// is currently withheld.
void refresh_ready(Dag& dag, IterationState& state, ReadyQueue& queue,
                   const DeadlinePolicy& policy, const std::set<TaskId>& barred,
                   double now_us, std::uint32_t iteration,
                   std::vector<Event>* log);

// Deadline verdict for a completed task; routine tasks only.
std::optional<bool> record_deadline(const DeadlinePolicy& policy, const Task& task,
                                    double release_us, double completion_us);

}  // namespace aero
