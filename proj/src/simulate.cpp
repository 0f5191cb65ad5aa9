#include "aero/simulate.hpp"

#include <algorithm>
#include <cassert>

namespace aero {

const char* approach_name(Approach a) {
  switch (a) {
    case Approach::Aero: return "aero";
    case Approach::LiveUpdate: return "live";
    case Approach::IntermittentUpdate: return "intermittent";
  }
  return "unknown";
}

std::optional<Approach> approach_from_name(const std::string& name) {
  if (name == "aero") return Approach::Aero;
  if (name == "live") return Approach::LiveUpdate;
  if (name == "intermittent") return Approach::IntermittentUpdate;
  return std::nullopt;
}

Simulation::Simulation(SimConfig config) : cfg_(std::move(config)), dag_(cfg_.dag) {
  for (const auto& [id, t] : dag_.tasks()) {
    if (t.kind != TaskKind::Routine || t.placeholder) {
      throw SimError("simulation input graph must contain live routine tasks only");
    }
    dag_.task(id).status = TaskStatus::NotReady;
  }
  if (cfg_.capacity_uj <= 0.0) throw SimError("capacity must be positive");
  if (cfg_.update && cfg_.update->arrival_us >= cfg_.horizon_us) {
    throw SimError("update arrival must precede the horizon");
  }
  energy_.capacity_uj = cfg_.capacity_uj;
  energy_.stored_uj =
      cfg_.capacity_uj * std::clamp(cfg_.initial_stored_fraction, 0.0, 1.0);
  energy_.now_us = 0.0;
  policy_ = cfg_.policy;
  result_.seed = cfg_.seed;
  result_.initial_stored_uj = energy_.stored_uj;
}

bool Simulation::update_settled() const {
  return !cfg_.update.has_value() || phase_ == UpdatePhase::Settled;
}

bool Simulation::iteration_complete() const {
  for (const auto& [id, t] : dag_.tasks()) {
    if (t.kind != TaskKind::Routine || t.placeholder) continue;
    if (t.status != TaskStatus::Completed) return false;
  }
  return true;
}

bool Simulation::has_live_routine() const {
  for (const auto& [id, t] : dag_.tasks()) {
    if (t.kind == TaskKind::Routine && !t.placeholder) return true;
  }
  return false;
}

std::set<TaskId> Simulation::barred() const {
  if (phase_ != UpdatePhase::Blocked) return {};
  // When the update deferred, the iteration that was already inside the block
  // runs to completion under the old version; barring starts next iteration.
  if (adj_.deferred && iter_.iteration == adjust_iteration_) return {};
  std::set<TaskId> out;
  for (TaskId id : adj_.block.nodes) {
    if (dag_.has_task(id) && dag_.task(id).kind == TaskKind::Routine) {
      out.insert(id);
    }
  }
  return out;
}

void Simulation::log(Event e) { events_.push_back(std::move(e)); }

void Simulation::log_simple(EventKind kind, std::optional<TaskId> task,
                            const std::string& detail) {
  Event e;
  e.time_us = now();
  e.kind = kind;
  e.iteration = iter_.iteration;
  e.task = task;
  e.energy_before_uj = energy_.stored_uj;
  e.energy_after_uj = energy_.stored_uj;
  e.detail = detail;
  log(std::move(e));
}

void Simulation::log_graph_diff(const Dag& before, const Dag& after) {
  for (const Edge& e : before.edges()) {
    if (!after.edges().contains(e)) {
      Event ev;
      ev.time_us = now();
      ev.kind = EventKind::EdgeRemoved;
      ev.iteration = iter_.iteration;
      ev.edge = e;
      log(std::move(ev));
    }
  }
  for (const auto& [id, t] : before.tasks()) {
    if (!after.has_task(id)) {
      Event ev;
      ev.time_us = now();
      ev.kind = EventKind::TaskRemoved;
      ev.iteration = iter_.iteration;
      ev.task = id;
      log(std::move(ev));
    }
  }
  for (const auto& [id, t] : after.tasks()) {
    if (!before.has_task(id)) {
      Event ev;
      ev.time_us = now();
      ev.kind = EventKind::TaskAdded;
      ev.iteration = iter_.iteration;
      ev.task = id;
      ev.version = t.profile.version;
      ev.detail = std::string(task_kind_name(t.kind)) +
                  (t.placeholder ? ":placeholder" : "");
      log(std::move(ev));
    }
  }
  for (const Edge& e : after.edges()) {
    if (!before.edges().contains(e)) {
      Event ev;
      ev.time_us = now();
      ev.kind = EventKind::EdgeAdded;
      ev.iteration = iter_.iteration;
      ev.edge = e;
      log(std::move(ev));
    }
  }
}

RunResult Simulation::run() {
  log_simple(EventKind::IterationStart);
  while (true) {
    if (events_.size() > cfg_.max_events) {
      throw SimError("event budget exceeded; simulation is not settling");
    }
    if (now() >= cfg_.horizon_us && update_settled()) break;
    process_arrival();
    refresh();

    if (queue_.empty() && iteration_complete()) {
      if (intermittent_ready_) {
        intermittent_apply_now();
        refresh();
        if (!queue_.empty()) continue;
      }
      if (has_live_routine() && iteration_complete() && queue_.empty()) {
        reset_iteration();
        refresh();
        continue;
      }
    }

    if (queue_.empty()) {
      double target = cfg_.horizon_us;
      if (cfg_.update && !arrival_processed_) {
        target = std::min(target, cfg_.update->arrival_us);
      }
      if (target <= now()) {
        if (cfg_.update && !arrival_processed_ && cfg_.update->arrival_us <= now()) {
          continue;  // picked up at the next loop head
        }
        throw SimError("scheduler stalled with an empty queue");
      }
      result_.harvested_uj += harvest(energy_, cfg_.trace, target);
      log_simple(EventKind::Idle);
      continue;
    }

    dispatch_next();
  }

  result_.final_stored_uj = energy_.stored_uj;
  result_.final_dag = dag_;
  result_.iterations_completed = iter_.iteration - 1;
  result_.events = std::move(events_);
  return result_;
}

void Simulation::process_arrival() {
  if (!cfg_.update || arrival_processed_) return;
  const double tau = cfg_.update->arrival_us;
  if (tau > now()) return;
  arrival_processed_ = true;
  result_.update_delivered = true;

  Event e;
  e.time_us = tau;
  e.kind = EventKind::UpdateArrival;
  e.iteration = iter_.iteration;
  e.energy_before_uj = energy_.stored_uj;
  e.energy_after_uj = energy_.stored_uj;
  log(std::move(e));

  switch (cfg_.approach) {
    case Approach::Aero:
    case Approach::IntermittentUpdate:
      spawn_helpers();
      break;
    case Approach::LiveUpdate: {
      if (last_exec_task_ && tau > last_exec_start_ && tau < last_exec_end_) {
        const auto targets = cfg_.update->bundle.group().existing_targets();
        if (targets.contains(*last_exec_task_)) {
          result_.member_interrupted = true;
          Event ev;
          ev.time_us = tau;
          ev.kind = EventKind::MemberInterrupted;
          ev.iteration = iter_.iteration;
          ev.task = *last_exec_task_;
          ev.detail = "arrival inside member execution";
          log(std::move(ev));
        }
      }
      live_apply_now();
      break;
    }
  }
}

void Simulation::spawn_helpers() {
  const UpdateBundle& bundle = cfg_.update->bundle;
  Dag before = dag_;
  if (cfg_.approach == Approach::Aero) {
    chain_ = spawn_update_chain(dag_, bundle, cfg_.costs);
    chain_tasks_ = chain_.all();
  } else {
    // The deferred baseline still receives and decodes during execution; only
    // integration waits for the quiescent point.
    std::set<TaskId> reserved;
    for (const auto& m : bundle.members) {
      if (m.op == UpdateOp::Insert) reserved.insert(m.target);
    }
    auto claim = [&](TaskKind kind, const TaskProfile& profile) {
      for (std::size_t v = 0; v < dag_.slot_capacity(); ++v) {
        TaskId id{static_cast<std::uint8_t>(v)};
        if (!dag_.has_task(id) && !reserved.contains(id)) {
          dag_.add_task({id, kind, profile});
          return id;
        }
      }
      throw SimError("no free slot for update helpers");
    };
    chain_.receive = claim(TaskKind::ReceiveHelper,
                           cfg_.costs.receive_profile(bundle.total_size));
    chain_.decode = claim(TaskKind::DecodeHelper,
                          cfg_.costs.decode_profile(bundle.total_size));
    dag_.add_edge(chain_.receive, chain_.decode);
    chain_tasks_ = {chain_.receive, chain_.decode};
  }
  log_graph_diff(before, dag_);
  log_simple(EventKind::ChainSpawned);
  phase_ = UpdatePhase::ChainRunning;
}

void Simulation::charge_block(const TaskProfile& profile, const std::string& what) {
  const double before = energy_.stored_uj;
  auto acq = acquire_for_task(energy_, cfg_.trace, profile.energy_uj);
  result_.harvested_uj += acq.credited_uj;
  result_.consumed_uj += profile.energy_uj;
  result_.harvested_uj += harvest(energy_, cfg_.trace, now() + profile.exec_time_us);

  Event e;
  e.time_us = now();
  e.kind = EventKind::UpdateWork;
  e.iteration = iter_.iteration;
  e.energy_before_uj = before;
  e.energy_after_uj = energy_.stored_uj;
  e.detail = what;
  log(std::move(e));
}

void Simulation::live_apply_now() {
  const UpdateBundle& bundle = cfg_.update->bundle;
  try {
    validate_update(dag_, bundle, cfg_.update->insert_profiles);
  } catch (const UpdateError& err) {
    if (!err.is_bad_update()) throw;
    abort_update(err.name());
    return;
  }
  charge_block(cfg_.costs.receive_profile(bundle.total_size), "receive");
  charge_block(cfg_.costs.decode_profile(bundle.total_size), "decode");

  std::uint32_t index = 0;
  for (const BundleMember& member : bundle.members) {
    charge_block(cfg_.costs.apply_profile(member.payload.size(), index),
                 std::string("apply:") + update_op_name(member.op));
    Dag before = dag_;
    const TaskProfile* insert_profile = nullptr;
    if (member.op == UpdateOp::Insert) {
      Task placeholder;
      placeholder.id = member.target;
      placeholder.kind = TaskKind::Routine;
      placeholder.placeholder = true;
      dag_.add_task(placeholder);
      insert_profile = &cfg_.update->insert_profiles.at(member.target);
    }
    apply_update_op(dag_, member, insert_profile, {});
    log_graph_diff(before, dag_);
    if (member.op == UpdateOp::Remove) {
      queue_.remove(member.target);
      iter_.completed_routine.erase(member.target);
      iter_.release_us.erase(member.target);
    }
    Event e;
    e.time_us = now();
    e.kind = EventKind::UpdateApplied;
    e.iteration = iter_.iteration;
    e.task = member.target;
    if (member.op != UpdateOp::Remove) {
      e.version = dag_.task(member.target).profile.version;
    }
    e.detail = update_op_name(member.op);
    log(std::move(e));
    ++index;
  }
  phase_ = UpdatePhase::Settled;
  result_.completion_us = now() - cfg_.update->arrival_us;
}

void Simulation::intermittent_apply_now() {
  const UpdateBundle& bundle = cfg_.update->bundle;
  intermittent_ready_ = false;
  try {
    validate_update(dag_, bundle, cfg_.update->insert_profiles);
  } catch (const UpdateError& err) {
    if (!err.is_bad_update()) throw;
    abort_update(err.name());
    return;
  }

  // Quiescent point: strip the helpers first, then integrate the whole group
  // before the next iteration begins.
  {
    Dag before = dag_;
    for (TaskId id : chain_tasks_) {
      if (dag_.has_task(id)) dag_.remove_task(id);
    }
    log_graph_diff(before, dag_);
  }

  std::uint32_t index = 0;
  for (const BundleMember& member : bundle.members) {
    charge_block(cfg_.costs.apply_profile(member.payload.size(), index),
                 std::string("apply:") + update_op_name(member.op));
    Dag before = dag_;
    const TaskProfile* insert_profile = nullptr;
    if (member.op == UpdateOp::Insert) {
      Task placeholder;
      placeholder.id = member.target;
      placeholder.kind = TaskKind::Routine;
      placeholder.placeholder = true;
      dag_.add_task(placeholder);
      insert_profile = &cfg_.update->insert_profiles.at(member.target);
    }
    apply_update_op(dag_, member, insert_profile, {});
    log_graph_diff(before, dag_);
    if (member.op == UpdateOp::Remove) {
      iter_.completed_routine.erase(member.target);
      iter_.release_us.erase(member.target);
    }
    Event e;
    e.time_us = now();
    e.kind = EventKind::UpdateApplied;
    e.iteration = iter_.iteration;
    e.task = member.target;
    if (member.op != UpdateOp::Remove) {
      e.version = dag_.task(member.target).profile.version;
    }
    e.detail = update_op_name(member.op);
    log(std::move(e));
    ++index;
  }
  phase_ = UpdatePhase::Settled;
  result_.completion_us = now() - cfg_.update->arrival_us;
}

void Simulation::refresh() {
  refresh_ready(dag_, iter_, queue_, policy_, barred(), now(), iter_.iteration,
                &events_);
}

void Simulation::reset_iteration() {
  log_simple(EventKind::IterationEnd);
  for (const auto& [id, t] : dag_.tasks()) {
    if (t.kind == TaskKind::Routine && !t.placeholder) {
      dag_.task(id).status = TaskStatus::NotReady;
      iter_.release_us.erase(id);
    }
  }
  iter_.completed_routine.clear();
  iter_.iteration += 1;
  log_simple(EventKind::IterationStart);
}

void Simulation::dispatch_next() {
  auto entry = queue_.pop();
  assert(entry.has_value());
  const TaskId id = entry->id;
  const TaskProfile profile = dag_.task(id).profile;

  Event d;
  d.time_us = now();
  d.kind = EventKind::Dispatch;
  d.iteration = iter_.iteration;
  d.task = id;
  d.energy_before_uj = energy_.stored_uj;
  d.energy_after_uj = energy_.stored_uj;
  d.priority = profile.priority;
  log(std::move(d));

  auto acq = acquire_for_task(energy_, cfg_.trace, profile.energy_uj);
  result_.harvested_uj += acq.credited_uj;
  result_.consumed_uj += profile.energy_uj;
  const double start = now();
  result_.harvested_uj += harvest(energy_, cfg_.trace, start + profile.exec_time_us);
  last_exec_start_ = start;
  last_exec_end_ = now();
  last_exec_task_ = id;
  on_complete(id);
}

void Simulation::on_complete(TaskId id) {
  dag_.task(id).status = TaskStatus::Completed;
  iter_.note_completion(dag_, id);
  const Task task = dag_.task(id);  // copy: hooks below may remove it

  const auto verdict =
      record_deadline(policy_, task, iter_.release_us[id], now());
  if (verdict) {
    result_.routine_instances += 1;
    if (*verdict) result_.deadline_misses += 1;
  }

  Event e;
  e.time_us = now();
  e.kind = EventKind::Complete;
  e.iteration = iter_.iteration;
  e.task = id;
  e.energy_before_uj = energy_.stored_uj;
  e.energy_after_uj = energy_.stored_uj;
  e.deadline_miss = verdict;
  e.version = task.profile.version;
  log(std::move(e));

  if (phase_ == UpdatePhase::ChainRunning) {
    if (cfg_.approach == Approach::Aero && id == chain_.integrate) {
      aero_adjust();
    } else if (cfg_.approach == Approach::IntermittentUpdate &&
               id == chain_.decode) {
      intermittent_ready_ = true;
    }
  } else if (phase_ == UpdatePhase::Blocked && task.kind == TaskKind::Update) {
    aero_apply(id);
  }
}

void Simulation::aero_adjust() {
  const UpdateBundle& bundle = cfg_.update->bundle;
  try {
    validate_update(dag_, bundle, cfg_.update->insert_profiles);
  } catch (const UpdateError& err) {
    if (!err.is_bad_update()) throw;
    abort_update(err.name());
    return;
  }
  log_simple(EventKind::UpdateValidated);

  // Runtime position: if any member already ran this iteration, execution is
  // effectively inside the affected block and integration defers, so one
  // iteration never sees two versions.
  std::optional<TaskId> current;
  for (const auto& member : bundle.members) {
    if (member.op == UpdateOp::Insert) continue;
    if (iter_.completed_routine.contains(member.target)) {
      current = member.target;
      break;
    }
  }

  snapshot_ = dag_;
  Dag before = dag_;
  adj_ = adjust_dag(dag_, bundle, current, cfg_.costs);
  dag_ = adj_.dag;
  adjust_iteration_ = iter_.iteration;
  members_applied_ = 0;
  phase_ = UpdatePhase::Blocked;
  iter_.latch_existing(dag_);
  log_graph_diff(before, dag_);
  log_simple(EventKind::DagAdjusted, std::nullopt,
             adj_.deferred ? "deferred" : "pre-target");

  for (TaskId b : barred()) {
    if (queue_.remove(b)) {
      dag_.task(b).status = TaskStatus::NotReady;
      iter_.release_us.erase(b);
      log_simple(EventKind::Blocked, b);
    }
  }
}

void Simulation::aero_apply(TaskId update_task) {
  const UpdateBundle& bundle = cfg_.update->bundle;
  auto it = std::find(adj_.update_tasks.begin(), adj_.update_tasks.end(),
                      update_task);
  assert(it != adj_.update_tasks.end());
  const std::size_t index =
      static_cast<std::size_t>(it - adj_.update_tasks.begin());
  const BundleMember& member = bundle.members[index];

  const TaskProfile* insert_profile = nullptr;
  if (member.op == UpdateOp::Insert) {
    insert_profile = &cfg_.update->insert_profiles.at(member.target);
  }
  std::vector<Edge> restorable(adj_.block.blocked_edges.begin(),
                               adj_.block.blocked_edges.end());

  Dag before = dag_;
  apply_update_op(dag_, member, insert_profile, restorable);
  log_graph_diff(before, dag_);

  if (member.op == UpdateOp::Remove) {
    assert(!queue_.contains(member.target));
    iter_.completed_routine.erase(member.target);
    iter_.release_us.erase(member.target);
  }

  Event e;
  e.time_us = now();
  e.kind = EventKind::UpdateApplied;
  e.iteration = iter_.iteration;
  e.task = member.target;
  if (member.op != UpdateOp::Remove) {
    e.version = dag_.task(member.target).profile.version;
  }
  e.detail = update_op_name(member.op);
  log(std::move(e));

  iter_.latch_existing(dag_);
  members_applied_ += 1;
  if (members_applied_ == bundle.members.size()) aero_finalize();
}

void Simulation::aero_finalize() {
  Dag before = dag_;
  std::vector<TaskId> machinery = adj_.update_tasks;
  machinery.insert(machinery.end(), chain_tasks_.begin(), chain_tasks_.end());
  finalize_update(dag_, adj_.block, machinery, adj_.virtual_start);
  log_graph_diff(before, dag_);
  for (TaskId id : machinery) {
    queue_.remove(id);
    iter_.release_us.erase(id);
    iter_.latched.erase(id);
  }
  iter_.latched.erase(adj_.virtual_start);
  phase_ = UpdatePhase::Settled;
  result_.completion_us = now() - cfg_.update->arrival_us;
  log_simple(EventKind::UpdateFinalized);
}

void Simulation::abort_update(const std::string& reason) {
  Dag before = dag_;
  for (TaskId id : chain_tasks_) {
    if (dag_.has_task(id)) dag_.remove_task(id);
    queue_.remove(id);
    iter_.release_us.erase(id);
    iter_.latched.erase(id);
  }
  log_graph_diff(before, dag_);
  log_simple(EventKind::UpdateAborted, std::nullopt, reason);
  phase_ = UpdatePhase::Settled;
  result_.update_aborted = true;
}

RunResult simulate(SimConfig config) { return Simulation(std::move(config)).run(); }

}  // namespace aero
