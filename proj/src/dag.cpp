#include "aero/dag.hpp"

#include <algorithm>
#include <deque>

namespace aero {

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::Routine: return "routine";
    case TaskKind::Update: return "update";
    case TaskKind::ReceiveHelper: return "receive_helper";
    case TaskKind::DecodeHelper: return "decode_helper";
    case TaskKind::DependencyHelper: return "dependency_helper";
    case TaskKind::IntegrateHelper: return "integrate_helper";
    case TaskKind::VirtualStart: return "virtual_start";
  }
  return "unknown";
}

std::optional<TaskKind> task_kind_from_name(const std::string& name) {
  for (auto k : {TaskKind::Routine, TaskKind::Update, TaskKind::ReceiveHelper,
                 TaskKind::DecodeHelper, TaskKind::DependencyHelper,
                 TaskKind::IntegrateHelper, TaskKind::VirtualStart}) {
    if (name == task_kind_name(k)) return k;
  }
  return std::nullopt;
}

const char* DagError::name() const {
  switch (code_) {
    case DagErrc::DuplicateId: return "DuplicateId";
    case DagErrc::CapacityExceeded: return "CapacityExceeded";
    case DagErrc::CycleDetected: return "CycleDetected";
    case DagErrc::MissingEndpoint: return "MissingEndpoint";
    case DagErrc::UnknownTask: return "UnknownTask";
    case DagErrc::InvalidProfile: return "InvalidProfile";
  }
  return "DagError";
}

const char* update_op_name(UpdateOp op) {
  switch (op) {
    case UpdateOp::Modify: return "modify";
    case UpdateOp::Insert: return "insert";
    case UpdateOp::Remove: return "remove";
  }
  return "unknown";
}

void Dag::add_task(const Task& task) {
  if (task.id.value >= slot_capacity_) {
    throw DagError(DagErrc::CapacityExceeded,
                   "task slot " + to_string(task.id) + " exceeds capacity " +
                       std::to_string(slot_capacity_));
  }
  if (tasks_.contains(task.id)) {
    throw DagError(DagErrc::DuplicateId, to_string(task.id) + " already present");
  }
  const bool needs_cost =
      (task.kind == TaskKind::Routine && !task.placeholder) ||
      task.kind == TaskKind::Update;
  if (needs_cost &&
      (task.profile.exec_time_us <= 0.0 || task.profile.energy_uj <= 0.0)) {
    throw DagError(DagErrc::InvalidProfile,
                   to_string(task.id) + ": routine/update tasks need positive cost");
  }
  if (task.kind == TaskKind::VirtualStart &&
      (task.profile.exec_time_us != 0.0 || task.profile.energy_uj != 0.0)) {
    throw DagError(DagErrc::InvalidProfile, "virtual start must be zero cost");
  }
  tasks_.emplace(task.id, task);
}

void Dag::add_edge(TaskId from, TaskId to) {
  if (!tasks_.contains(from) || !tasks_.contains(to)) {
    throw DagError(DagErrc::MissingEndpoint,
                   "edge " + to_string(from) + "->" + to_string(to) +
                       " references a missing task");
  }
  auto [it, inserted] = edges_.insert({from, to});
  if (!inserted) return;  // idempotent
  if (would_cycle()) {
    edges_.erase(it);
    throw DagError(DagErrc::CycleDetected,
                   "edge " + to_string(from) + "->" + to_string(to) +
                       " would close a cycle");
  }
}

void Dag::remove_task(TaskId id) {
  if (!tasks_.contains(id)) {
    throw DagError(DagErrc::UnknownTask, to_string(id) + " not in graph");
  }
  tasks_.erase(id);
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (it->first == id || it->second == id) {
      it = edges_.erase(it);
    } else {
      ++it;
    }
  }
}

void Dag::remove_edge(TaskId from, TaskId to) {
  if (edges_.erase({from, to}) == 0) {
    throw DagError(DagErrc::MissingEndpoint,
                   "edge " + to_string(from) + "->" + to_string(to) + " not present");
  }
}

Task& Dag::task(TaskId id) {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) {
    throw DagError(DagErrc::UnknownTask, to_string(id) + " not in graph");
  }
  return it->second;
}

const Task& Dag::task(TaskId id) const {
  return const_cast<Dag*>(this)->task(id);
}

std::set<TaskId> Dag::sources() const {
  std::set<TaskId> out;
  for (const auto& [id, t] : tasks_) {
    if (t.kind == TaskKind::VirtualStart) continue;
    out.insert(id);
  }
  for (const auto& [from, to] : edges_) out.erase(to);
  return out;
}

std::set<TaskId> Dag::routine_sources() const {
  std::set<TaskId> out;
  for (const auto& [id, t] : tasks_) {
    if (t.kind == TaskKind::Routine && !t.placeholder) out.insert(id);
  }
  for (const auto& [from, to] : edges_) out.erase(to);
  return out;
}

std::vector<TaskId> Dag::predecessors(TaskId id) const {
  std::vector<TaskId> out;
  for (const auto& [from, to] : edges_) {
    if (to == id) out.push_back(from);
  }
  return out;
}

std::vector<TaskId> Dag::successors(TaskId id) const {
  std::vector<TaskId> out;
  for (const auto& [from, to] : edges_) {
    if (from == id) out.push_back(to);
  }
  return out;
}

std::vector<TaskId> Dag::topological_order() const {
  std::map<TaskId, std::size_t> indeg;
  for (const auto& [id, t] : tasks_) indeg[id] = 0;
  for (const auto& [from, to] : edges_) indeg[to]++;

  std::deque<TaskId> frontier;
  for (const auto& [id, d] : indeg) {
    if (d == 0) frontier.push_back(id);
  }
  std::vector<TaskId> order;
  while (!frontier.empty()) {
    TaskId id = frontier.front();
    frontier.pop_front();
    order.push_back(id);
    for (const auto& [from, to] : edges_) {
      if (from == id && --indeg[to] == 0) frontier.push_back(to);
    }
  }
  if (order.size() != tasks_.size()) {
    throw DagError(DagErrc::CycleDetected, "graph is not acyclic");
  }
  return order;
}

std::optional<TaskId> Dag::lowest_free_slot() const {
  for (std::size_t v = 0; v < slot_capacity_; ++v) {
    TaskId id{static_cast<std::uint8_t>(v)};
    if (!tasks_.contains(id)) return id;
  }
  return std::nullopt;
}

bool Dag::structurally_equal(const Dag& other) const {
  if (slot_capacity_ != other.slot_capacity_ || edges_ != other.edges_ ||
      tasks_.size() != other.tasks_.size()) {
    return false;
  }
  for (const auto& [id, t] : tasks_) {
    auto it = other.tasks_.find(id);
    if (it == other.tasks_.end()) return false;
    const Task& o = it->second;
    if (t.kind != o.kind || t.profile != o.profile ||
        t.placeholder != o.placeholder) {
      return false;
    }
  }
  return true;
}

bool Dag::would_cycle() const {
  try {
    topological_order();
  } catch (const DagError&) {
    return true;
  }
  return false;
}

std::set<TaskId> UpdateGroup::existing_targets() const {
  std::set<TaskId> out;
  for (const auto& m : members) {
    if (m.op != UpdateOp::Insert) out.insert(m.target);
  }
  return out;
}

bool UpdateGroup::targets(TaskId id) const {
  return std::any_of(members.begin(), members.end(),
                     [&](const GroupMember& m) { return m.target == id; });
}

namespace {

std::set<TaskId> reachable(const Dag& dag, const std::set<TaskId>& from,
                           bool forward) {
  std::set<TaskId> seen = from;
  std::deque<TaskId> frontier(from.begin(), from.end());
  while (!frontier.empty()) {
    TaskId id = frontier.front();
    frontier.pop_front();
    for (const auto& [a, b] : dag.edges()) {
      TaskId src = forward ? a : b;
      TaskId dst = forward ? b : a;
      if (src == id && seen.insert(dst).second) frontier.push_back(dst);
    }
  }
  return seen;
}

}  // namespace

AffectedBlock compute_affected_block(const Dag& dag, const UpdateGroup& group) {
  std::set<TaskId> anchors;
  for (const auto& m : group.members) {
    if (m.op == UpdateOp::Insert) continue;
    if (!dag.has_task(m.target)) {
      throw DagError(DagErrc::UnknownTask,
                     "group member " + to_string(m.target) + " not in graph");
    }
    anchors.insert(m.target);
  }

  AffectedBlock block;
  if (anchors.empty()) return block;

  // v is in the block iff some anchor reaches v and v reaches some anchor;
  // anchors themselves qualify via the empty path.
  const auto down = reachable(dag, anchors, /*forward=*/true);
  const auto up = reachable(dag, anchors, /*forward=*/false);
  for (TaskId id : down) {
    if (up.contains(id)) block.nodes.insert(id);
  }
  for (const auto& e : dag.edges()) {
    if (block.nodes.contains(e.second) && !block.nodes.contains(e.first)) {
      block.blocked_edges.insert(e);
    }
  }
  return block;
}

}  // namespace aero
