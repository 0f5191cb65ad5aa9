#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aero/dag.hpp"
#include "aero/packet.hpp"

namespace aero {

enum class UpdateErrc {
  UpdateInFlight,
  UnknownTask,
  TargetExists,
  InvalidDependency,
  CycleDetected,
  MissingInsertProfile,
  NoFreeSlot,
};

class UpdateError : public std::runtime_error {
 public:
  UpdateError(UpdateErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  UpdateErrc code() const { return code_; }
  const char* name() const;
  // Anything that aborts the whole group and rolls the graph back.
  bool is_bad_update() const {
    return code_ == UpdateErrc::InvalidDependency ||
           code_ == UpdateErrc::CycleDetected ||
           code_ == UpdateErrc::TargetExists ||
           code_ == UpdateErrc::UnknownTask ||
           code_ == UpdateErrc::MissingInsertProfile;
  }

 private:
  UpdateErrc code_;
};

// Time/energy constants for the update machinery. Receive/decode scale with
// the full bundle, apply with each member's payload; the same per-byte
// constants drive every update approach so comparisons isolate mechanism.
struct UpdateCosts {
  double receive_base_us{200.0};
  double receive_per_byte_us{1.0};
  double receive_base_uj{20.0};
  double receive_per_byte_uj{0.05};

  double decode_base_us{200.0};
  double decode_per_byte_us{0.5};
  double decode_base_uj{10.0};
  double decode_per_byte_uj{0.03};

  double block_id_us{100.0};
  double block_id_uj{3.0};
  double integrate_us{150.0};
  double integrate_uj{4.0};

  double apply_base_us{100.0};
  double apply_per_byte_us{1.5};
  double apply_base_uj{10.0};
  double apply_per_byte_uj{0.08};

  TaskProfile receive_profile(std::size_t bundle_bytes) const;
  TaskProfile decode_profile(std::size_t bundle_bytes) const;
  TaskProfile block_id_profile() const;
  TaskProfile integrate_profile() const;
  TaskProfile apply_profile(std::size_t payload_bytes, std::uint32_t priority) const;
};

struct UpdateNotification {
  double arrival_us{0.0};
  UpdateBundle bundle;
  // Routine profiles for Insert members, keyed by target slot. The wire
  // carries the code; what it costs to run is scenario configuration.
  std::map<TaskId, TaskProfile> insert_profiles;
};

struct HelperChain {
  TaskId receive{};
  TaskId decode{};
  TaskId dependency{};
  TaskId integrate{};
  std::vector<TaskId> all() const { return {receive, decode, dependency, integrate}; }
};

// Insert the four-stage update chain (receive -> decode -> dependency ->
// integrate) as helper tasks scheduled alongside routine work. Throws
// UpdateInFlight when the graph already carries update machinery.
HelperChain spawn_update_chain(Dag& dag, const UpdateBundle& bundle,
                               const UpdateCosts& costs);

enum class BlockPosition { InsideBlock, OutsideBlock };

BlockPosition classify_runtime_position(const Dag& dag, const AffectedBlock& block,
                                        std::optional<TaskId> current);

struct AdjustmentResult {
  Dag dag;                          // adjusted graph
  AffectedBlock block;              // nodes + backed-up entry edges
  std::vector<TaskId> update_tasks; // one per member, member order
  std::vector<std::optional<TaskId>> placeholders;  // Insert members only
  TaskId virtual_start{};
  bool deferred{false};             // runtime was inside the block
};

// The graph adjustment: virtual start, entry-edge blocking, and per-member
// update-task insertion (before the target, or after it when execution is
// already inside the affected block).
AdjustmentResult adjust_dag(const Dag& dag, const UpdateBundle& bundle,
                            std::optional<TaskId> current,
                            const UpdateCosts& costs);

// Full-group feasibility check, run by the dependency helper before any graph
// surgery: targets must exist (or not, for Insert), dependency bits must
// reference tasks that survive the update, and the post-update graph must be
// acyclic. Throws UpdateError on the first violation.
void validate_update(const Dag& dag, const UpdateBundle& bundle,
                     const std::map<TaskId, TaskProfile>& insert_profiles);

// Execute one member's operation: add its dependency edges, then modify /
// activate / remove the target. `restorable` holds currently-blocked edges so
// cycle checks see the graph that finalize will restore. Throws UpdateError
// with is_bad_update() set when the member cannot be applied; the caller owns
// rollback.
void apply_update_op(Dag& dag, const BundleMember& member,
                     const TaskProfile* insert_profile,
                     std::span<const Edge> restorable = {});

// Restore blocked entry edges (skipping endpoints that no longer exist) and
// strip all update machinery, leaving the new routine graph.
void finalize_update(Dag& dag, const AffectedBlock& block,
                     std::span<const TaskId> machinery, TaskId virtual_start);

}  // namespace aero
