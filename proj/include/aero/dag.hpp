#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace aero {

// Task slot index. Slots are a fixed, small address space shared by packet
// bitmaps, so ids stay valid across the wire and the graph.
struct TaskId {
  std::uint8_t value{0};
  constexpr auto operator<=>(const TaskId&) const = default;
};

inline std::string to_string(TaskId id) { return "t" + std::to_string(id.value); }

enum class TaskKind : std::uint8_t {
  Routine,
  Update,           // carries one group member's operation
  ReceiveHelper,    // collects update packets
  DecodeHelper,     // decodes packets into a bundle
  DependencyHelper, // derives the affected block
  IntegrateHelper,  // performs the graph adjustment
  VirtualStart,     // structural entry node, present only while updating
};

constexpr bool is_helper(TaskKind k) {
  return k == TaskKind::ReceiveHelper || k == TaskKind::DecodeHelper ||
         k == TaskKind::DependencyHelper || k == TaskKind::IntegrateHelper;
}

// Everything except Routine executes at most once and is removed afterwards.
constexpr bool is_one_shot(TaskKind k) { return k != TaskKind::Routine; }

const char* task_kind_name(TaskKind k);
std::optional<TaskKind> task_kind_from_name(const std::string& name);

struct TaskProfile {
  double exec_time_us{0.0};
  double energy_uj{0.0};
  std::uint32_t priority{0};  // lower value = higher priority
  std::uint32_t version{0};
  auto operator<=>(const TaskProfile&) const = default;
};

enum class TaskStatus : std::uint8_t { NotReady, Ready, Completed };

struct Task {
  TaskId id{};
  TaskKind kind{TaskKind::Routine};
  TaskProfile profile{};
  TaskStatus status{TaskStatus::NotReady};
  // A placeholder is an inserted-but-not-yet-applied routine task. It is not
  // schedulable and does not count toward iteration completion.
  bool placeholder{false};
  auto operator<=>(const Task&) const = default;
};

enum class DagErrc {
  DuplicateId,
  CapacityExceeded,
  CycleDetected,
  MissingEndpoint,
  UnknownTask,
  InvalidProfile,
};

class DagError : public std::runtime_error {
 public:
  DagError(DagErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  DagErrc code() const { return code_; }
  const char* name() const;

 private:
  DagErrc code_;
};

using Edge = std::pair<TaskId, TaskId>;  // (from, to): `to` depends on `from`

// Labeled DAG over a bounded slot space. Value type: copies are deep and
// independent, so whole-graph snapshots and cross-thread handoff are plain
// copies. All mutators re-establish the class invariants or throw without
// partial effects.
class Dag {
 public:
  static constexpr std::size_t kDefaultSlotCapacity = 32;

  explicit Dag(std::size_t slot_capacity = kDefaultSlotCapacity)
      : slot_capacity_(slot_capacity) {}

  void add_task(const Task& task);
  void add_edge(TaskId from, TaskId to);
  void remove_task(TaskId id);            // drops incident edges
  void remove_edge(TaskId from, TaskId to);

  bool has_task(TaskId id) const { return tasks_.contains(id); }
  bool has_edge(TaskId from, TaskId to) const {
    return edges_.contains({from, to});
  }
  Task& task(TaskId id);
  const Task& task(TaskId id) const;

  const std::map<TaskId, Task>& tasks() const { return tasks_; }
  const std::set<Edge>& edges() const { return edges_; }
  std::size_t slot_capacity() const { return slot_capacity_; }

  // Zero in-degree tasks, excluding the virtual start node.
  std::set<TaskId> sources() const;
  // Zero in-degree live Routine tasks; the anchor set for the virtual start.
  std::set<TaskId> routine_sources() const;

  std::vector<TaskId> predecessors(TaskId id) const;
  std::vector<TaskId> successors(TaskId id) const;
  std::vector<TaskId> topological_order() const;  // throws CycleDetected

  std::optional<TaskId> lowest_free_slot() const;

  // Ids, kinds, profiles (incl. versions), placeholder flags and edges;
  // runtime statuses are ignored.
  bool structurally_equal(const Dag& other) const;

  bool operator==(const Dag&) const = default;

 private:
  bool would_cycle() const;

  std::size_t slot_capacity_;
  std::map<TaskId, Task> tasks_;
  std::set<Edge> edges_;
};

enum class UpdateOp : std::uint8_t { Modify, Insert, Remove };

const char* update_op_name(UpdateOp op);

struct GroupMember {
  TaskId target{};  // existing task for Modify/Remove; fresh slot for Insert
  UpdateOp op{UpdateOp::Modify};
  auto operator<=>(const GroupMember&) const = default;
};

// Mutually dependent update group: members must be integrated atomically.
struct UpdateGroup {
  std::vector<GroupMember> members;

  std::set<TaskId> existing_targets() const;  // Modify/Remove targets
  bool targets(TaskId id) const;
};

// The subgraph an update must treat as a unit: the group's existing targets
// plus every task on a directed path between two of them. blocked_edges are
// the entry edges (tail outside, head inside) backed up while the update is
// pending.
struct AffectedBlock {
  std::set<TaskId> nodes;
  std::set<Edge> blocked_edges;
  bool contains(TaskId id) const { return nodes.contains(id); }
};

// Throws UnknownTask if a Modify/Remove target is absent. Insert members
// contribute nothing: a task that does not exist yet has no position in the
// graph.
AffectedBlock compute_affected_block(const Dag& dag, const UpdateGroup& group);

}  // namespace aero
