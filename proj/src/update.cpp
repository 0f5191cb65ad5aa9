#include "aero/update.hpp"

#include <algorithm>

namespace aero {

const char* UpdateError::name() const {
  switch (code_) {
    case UpdateErrc::UpdateInFlight: return "UpdateInFlight";
    case UpdateErrc::UnknownTask: return "UnknownTask";
    case UpdateErrc::TargetExists: return "TargetExists";
    case UpdateErrc::InvalidDependency: return "InvalidDependency";
    case UpdateErrc::CycleDetected: return "CycleDetected";
    case UpdateErrc::MissingInsertProfile: return "MissingInsertProfile";
    case UpdateErrc::NoFreeSlot: return "NoFreeSlot";
  }
  return "UpdateError";
}

namespace {

TaskProfile scaled_profile(double base_us, double per_byte_us, double base_uj,
                           double per_byte_uj, std::size_t bytes,
                           std::uint32_t priority) {
  TaskProfile p;
  p.exec_time_us = base_us + per_byte_us * static_cast<double>(bytes);
  p.energy_uj = base_uj + per_byte_uj * static_cast<double>(bytes);
  p.priority = priority;
  return p;
}

// Machinery slots must not shadow the slots the update will insert into.
TaskId claim_slot(Dag& dag, const std::set<TaskId>& reserved) {
  for (std::size_t v = 0; v < dag.slot_capacity(); ++v) {
    TaskId id{static_cast<std::uint8_t>(v)};
    if (!dag.has_task(id) && !reserved.contains(id)) return id;
  }
  throw UpdateError(UpdateErrc::NoFreeSlot, "no task slot left for update machinery");
}

std::set<TaskId> insert_targets(const UpdateBundle& bundle) {
  std::set<TaskId> out;
  for (const auto& m : bundle.members) {
    if (m.op == UpdateOp::Insert) out.insert(m.target);
  }
  return out;
}

}  // namespace

TaskProfile UpdateCosts::receive_profile(std::size_t bundle_bytes) const {
  return scaled_profile(receive_base_us, receive_per_byte_us, receive_base_uj,
                        receive_per_byte_uj, bundle_bytes, 0);
}

TaskProfile UpdateCosts::decode_profile(std::size_t bundle_bytes) const {
  return scaled_profile(decode_base_us, decode_per_byte_us, decode_base_uj,
                        decode_per_byte_uj, bundle_bytes, 1);
}

TaskProfile UpdateCosts::block_id_profile() const {
  return scaled_profile(block_id_us, 0.0, block_id_uj, 0.0, 0, 2);
}

TaskProfile UpdateCosts::integrate_profile() const {
  return scaled_profile(integrate_us, 0.0, integrate_uj, 0.0, 0, 3);
}

TaskProfile UpdateCosts::apply_profile(std::size_t payload_bytes,
                                       std::uint32_t priority) const {
  return scaled_profile(apply_base_us, apply_per_byte_us, apply_base_uj,
                        apply_per_byte_uj, payload_bytes, priority);
}

HelperChain spawn_update_chain(Dag& dag, const UpdateBundle& bundle,
                               const UpdateCosts& costs) {
  for (const auto& [id, t] : dag.tasks()) {
    if (t.kind != TaskKind::Routine) {
      throw UpdateError(UpdateErrc::UpdateInFlight,
                        "update machinery already present at " + to_string(id));
    }
  }
  HelperChain chain;
  const std::set<TaskId> reserved = insert_targets(bundle);
  auto add = [&](TaskKind kind, const TaskProfile& profile) {
    TaskId id = claim_slot(dag, reserved);
    dag.add_task({id, kind, profile});
    return id;
  };
  chain.receive = add(TaskKind::ReceiveHelper, costs.receive_profile(bundle.total_size));
  chain.decode = add(TaskKind::DecodeHelper, costs.decode_profile(bundle.total_size));
  chain.dependency = add(TaskKind::DependencyHelper, costs.block_id_profile());
  chain.integrate = add(TaskKind::IntegrateHelper, costs.integrate_profile());
  dag.add_edge(chain.receive, chain.decode);
  dag.add_edge(chain.decode, chain.dependency);
  dag.add_edge(chain.dependency, chain.integrate);
  return chain;
}

BlockPosition classify_runtime_position(const Dag&, const AffectedBlock& block,
                                        std::optional<TaskId> current) {
  if (current && block.contains(*current)) return BlockPosition::InsideBlock;
  return BlockPosition::OutsideBlock;
}

AdjustmentResult adjust_dag(const Dag& dag, const UpdateBundle& bundle,
                            std::optional<TaskId> current,
                            const UpdateCosts& costs) {
  AdjustmentResult res;
  res.dag = dag;
  Dag& g = res.dag;
  const UpdateGroup group = bundle.group();
  const std::set<TaskId> reserved = insert_targets(bundle);

  // Virtual start in front of the routine entry points, so a block that
  // begins at the entry still has an edge to withhold.
  const auto entry_points = g.routine_sources();
  res.virtual_start = claim_slot(g, reserved);
  Task start;
  start.id = res.virtual_start;
  start.kind = TaskKind::VirtualStart;
  start.status = TaskStatus::Completed;  // structural; never scheduled
  g.add_task(start);
  for (TaskId src : entry_points) g.add_edge(res.virtual_start, src);

  res.block = compute_affected_block(g, group);
  for (const Edge& e : res.block.blocked_edges) g.remove_edge(e.first, e.second);

  res.deferred =
      classify_runtime_position(g, res.block, current) == BlockPosition::InsideBlock;

  std::uint32_t index = 0;
  for (const auto& member : bundle.members) {
    TaskId uid = claim_slot(g, reserved);
    g.add_task({uid, TaskKind::Update,
                costs.apply_profile(member.payload.size(), index)});
    res.update_tasks.push_back(uid);
    if (member.op == UpdateOp::Insert) {
      if (g.has_task(member.target)) {
        throw UpdateError(UpdateErrc::TargetExists,
                          "insert target " + to_string(member.target) +
                              " already occupied");
      }
      Task placeholder;
      placeholder.id = member.target;
      placeholder.kind = TaskKind::Routine;
      placeholder.placeholder = true;
      g.add_task(placeholder);
      g.add_edge(uid, member.target);
      res.placeholders.push_back(member.target);
    } else {
      if (!g.has_task(member.target)) {
        throw UpdateError(UpdateErrc::UnknownTask,
                          "member target " + to_string(member.target) + " missing");
      }
      if (res.deferred) {
        g.add_edge(member.target, uid);  // old version finishes first
      } else {
        g.add_edge(uid, member.target);  // update lands before the target runs
      }
      res.placeholders.push_back(std::nullopt);
    }
    ++index;
  }
  return res;
}

void validate_update(const Dag& dag, const UpdateBundle& bundle,
                     const std::map<TaskId, TaskProfile>& insert_profiles) {
  std::set<TaskId> removed;
  std::set<TaskId> inserted;
  for (const auto& member : bundle.members) {
    switch (member.op) {
      case UpdateOp::Modify:
      case UpdateOp::Remove: {
        if (!dag.has_task(member.target) ||
            dag.task(member.target).kind != TaskKind::Routine ||
            dag.task(member.target).placeholder) {
          throw UpdateError(UpdateErrc::UnknownTask,
                            "member target " + to_string(member.target) +
                                " is not a live routine task");
        }
        if (member.op == UpdateOp::Remove) removed.insert(member.target);
        break;
      }
      case UpdateOp::Insert: {
        if (dag.has_task(member.target)) {
          throw UpdateError(UpdateErrc::TargetExists,
                            "insert target " + to_string(member.target) +
                                " already occupied");
        }
        auto it = insert_profiles.find(member.target);
        if (it == insert_profiles.end() || it->second.exec_time_us <= 0.0 ||
            it->second.energy_uj <= 0.0) {
          throw UpdateError(UpdateErrc::MissingInsertProfile,
                            "no runnable profile for inserted task " +
                                to_string(member.target));
        }
        inserted.insert(member.target);
        break;
      }
    }
  }

  // Build the post-update routine graph and insist it stays a DAG. The
  // check is order-free: it sees exactly what finalize will leave behind.
  Dag final_graph(dag.slot_capacity());
  for (const auto& [id, t] : dag.tasks()) {
    if (t.kind != TaskKind::Routine || t.placeholder) continue;
    if (removed.contains(id)) continue;
    Task copy = t;
    copy.status = TaskStatus::NotReady;
    final_graph.add_task(copy);
  }
  for (TaskId id : inserted) {
    Task t;
    t.id = id;
    t.profile = insert_profiles.at(id);
    final_graph.add_task(t);
  }
  for (const Edge& e : dag.edges()) {
    if (final_graph.has_task(e.first) && final_graph.has_task(e.second)) {
      final_graph.add_edge(e.first, e.second);
    }
  }
  for (const auto& member : bundle.members) {
    if (!member.deps) continue;
    for (TaskId dep : member.deps->set_ids()) {
      const bool survives = final_graph.has_task(dep);
      const bool was_known = dag.has_task(dep) || inserted.contains(dep);
      if (!was_known || (!survives && !removed.contains(dep))) {
        throw UpdateError(UpdateErrc::InvalidDependency,
                          "dependency bit " + to_string(dep) +
                              " does not name a routine task");
      }
      if (!survives || removed.contains(member.target)) continue;
      try {
        final_graph.add_edge(dep, member.target);
      } catch (const DagError& err) {
        if (err.code() == DagErrc::CycleDetected) {
          throw UpdateError(UpdateErrc::CycleDetected,
                            "dependency edges close a cycle at " +
                                to_string(member.target));
        }
        throw;
      }
    }
  }
}

void apply_update_op(Dag& dag, const BundleMember& member,
                     const TaskProfile* insert_profile,
                     std::span<const Edge> restorable) {
  if (member.op != UpdateOp::Insert && !dag.has_task(member.target)) {
    throw UpdateError(UpdateErrc::UnknownTask,
                      "member target " + to_string(member.target) + " missing");
  }

  if (member.deps && !member.deps->empty() &&
      (member.op != UpdateOp::Remove)) {
    // Cycle checks must see the blocked entry edges that finalize restores.
    Dag scratch = dag;
    for (const Edge& e : restorable) {
      if (scratch.has_task(e.first) && scratch.has_task(e.second)) {
        scratch.add_edge(e.first, e.second);
      }
    }
    std::vector<Edge> accepted;
    for (TaskId dep : member.deps->set_ids()) {
      if (!scratch.has_task(dep)) continue;  // removed by an earlier member
      try {
        scratch.add_edge(dep, member.target);
        accepted.push_back({dep, member.target});
      } catch (const DagError& err) {
        if (err.code() == DagErrc::CycleDetected) {
          throw UpdateError(UpdateErrc::CycleDetected,
                            "dependency edge " + to_string(dep) + "->" +
                                to_string(member.target) + " closes a cycle");
        }
        throw;
      }
    }
    for (const Edge& e : accepted) dag.add_edge(e.first, e.second);
  }

  switch (member.op) {
    case UpdateOp::Modify:
      dag.task(member.target).profile.version += 1;
      break;
    case UpdateOp::Insert: {
      Task& t = dag.task(member.target);
      if (!t.placeholder) {
        throw UpdateError(UpdateErrc::TargetExists,
                          to_string(member.target) + " is not a placeholder");
      }
      if (insert_profile == nullptr || insert_profile->exec_time_us <= 0.0 ||
          insert_profile->energy_uj <= 0.0) {
        throw UpdateError(UpdateErrc::MissingInsertProfile,
                          "no runnable profile for inserted task " +
                              to_string(member.target));
      }
      t.profile = *insert_profile;
      t.placeholder = false;
      break;
    }
    case UpdateOp::Remove:
      dag.remove_task(member.target);
      break;
  }
}

void finalize_update(Dag& dag, const AffectedBlock& block,
                     std::span<const TaskId> machinery, TaskId virtual_start) {
  for (const Edge& e : block.blocked_edges) {
    if (dag.has_task(e.first) && dag.has_task(e.second)) {
      dag.add_edge(e.first, e.second);
    }
  }
  for (TaskId id : machinery) {
    if (dag.has_task(id)) dag.remove_task(id);
  }
  if (dag.has_task(virtual_start)) dag.remove_task(virtual_start);
}

}  // namespace aero
