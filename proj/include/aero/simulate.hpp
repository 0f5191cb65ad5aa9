#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aero/dag.hpp"
#include "aero/energy.hpp"
#include "aero/schedule.hpp"
#include "aero/update.hpp"

namespace aero {

enum class Approach { Aero, LiveUpdate, IntermittentUpdate };

const char* approach_name(Approach a);
std::optional<Approach> approach_from_name(const std::string& name);

struct SimConfig {
  Dag dag;  // routine graph; statuses are reset internally
  double capacity_uj{0.0};
  double initial_stored_fraction{1.0};
  HarvestTrace trace;
  DeadlinePolicy policy;
  UpdateCosts costs;
  Approach approach{Approach::Aero};
  double horizon_us{0.0};  // run lasts until horizon and the update settles
  std::optional<UpdateNotification> update;
  std::uint64_t seed{0};           // carried through to the result
  std::size_t max_events{500000};  // hard stop against non-termination bugs
};

struct RunResult {
  std::uint64_t seed{0};
  std::vector<Event> events;
  Dag final_dag;
  std::uint32_t iterations_completed{0};

  // Update lifecycle
  bool update_delivered{false};
  bool update_aborted{false};
  std::optional<double> completion_us;  // settle time minus arrival
  bool member_interrupted{false};       // arrival landed inside a member's execution

  // Deadlines
  std::uint64_t deadline_misses{0};
  std::uint64_t routine_instances{0};
  double dmr() const {
    return routine_instances == 0
               ? 0.0
               : static_cast<double>(deadline_misses) /
                     static_cast<double>(routine_instances);
  }

  // Energy balance
  double initial_stored_uj{0.0};
  double final_stored_uj{0.0};
  double harvested_uj{0.0};
  double consumed_uj{0.0};
};

class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic single-run discrete-event simulation: one task executes at a
// time, energy gates every dispatch, and the chosen approach decides how the
// update is woven into execution.
class Simulation {
 public:
  explicit Simulation(SimConfig config);
  RunResult run();

 private:
  enum class UpdatePhase { NotArrived, ChainRunning, Blocked, Settled };

  double now() const { return energy_.now_us; }
  bool update_settled() const;
  bool iteration_complete() const;
  bool has_live_routine() const;
  std::set<TaskId> barred() const;

  void log(Event e);
  void log_simple(EventKind kind, std::optional<TaskId> task = std::nullopt,
                  const std::string& detail = "");
  void log_graph_diff(const Dag& before, const Dag& after);

  void process_arrival();
  void spawn_helpers();
  void live_apply_now();
  void intermittent_apply_now();
  void refresh();
  void reset_iteration();
  void dispatch_next();
  void on_complete(TaskId id);
  void aero_adjust();
  void aero_apply(TaskId update_task);
  void aero_finalize();
  void abort_update(const std::string& reason);
  void charge_block(const TaskProfile& profile, const std::string& what);

  SimConfig cfg_;
  Dag dag_;
  EnergyState energy_;
  IterationState iter_;
  ReadyQueue queue_;
  DeadlinePolicy policy_;
  std::vector<Event> events_;
  RunResult result_;

  UpdatePhase phase_{UpdatePhase::NotArrived};
  bool arrival_processed_{false};
  HelperChain chain_{};
  std::vector<TaskId> chain_tasks_;
  AdjustmentResult adj_;
  Dag snapshot_;
  std::uint32_t adjust_iteration_{0};
  std::size_t members_applied_{0};
  bool intermittent_ready_{false};  // bundle decoded, waiting for quiescence

  // window of the most recent execution, for interrupt detection
  double last_exec_start_{-1.0};
  double last_exec_end_{-1.0};
  std::optional<TaskId> last_exec_task_;
};

RunResult simulate(SimConfig config);

}  // namespace aero
