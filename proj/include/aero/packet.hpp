#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aero/dag.hpp"

namespace aero {

// One bit per task slot, LSB-first: bit k of byte k/8 is slot k.
class TaskBitmap {
 public:
  explicit TaskBitmap(std::uint32_t bits = 0) : bits_(bits) {}

  void set(TaskId id) { bits_ |= (1u << id.value); }
  bool test(TaskId id) const { return (bits_ >> id.value) & 1u; }
  std::uint32_t raw() const { return bits_; }
  bool empty() const { return bits_ == 0; }

  std::vector<TaskId> set_ids() const;
  std::optional<TaskId> highest() const;

  auto operator<=>(const TaskBitmap&) const = default;

 private:
  std::uint32_t bits_;
};

enum class UpdateOpCode : std::uint8_t {
  ModifyExisting = 0b00,
  InsertNew = 0b01,
  RemoveObsolete = 0b10,
  // 0b11 reserved
};

UpdateOp to_update_op(UpdateOpCode code);
UpdateOpCode to_opcode(UpdateOp op);

enum class CodecErrc {
  Truncated,
  InvalidOpcode,
  BadBitmapIndex,
  InvalidTaskId,
  TrailingBytes,
  InvalidPacket,
};

class CodecError : public std::runtime_error {
 public:
  CodecError(CodecErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  CodecErrc code() const { return code_; }
  const char* name() const;

 private:
  CodecErrc code_;
};

// Wire layout (all multi-byte fields big-endian, bitmaps LSB-first):
//   [seq:1][group bitmap: ceil(n/8), iff seq==0]
//   [header:1 = opcode(2) | dag_flag(1) | task_id(5)]
//   [dep bitmap: ceil(n/8), iff dag_flag]
//   [code length:2][code bytes]
struct UpdatePacket {
  std::uint8_t seq{0};
  std::optional<TaskBitmap> group_field;  // present iff seq == 0
  UpdateOpCode opcode{UpdateOpCode::ModifyExisting};
  bool dag_flag{false};
  TaskId task_id{};
  std::optional<TaskBitmap> dep_field;    // present iff dag_flag
  std::vector<std::uint8_t> code_segment;

  auto operator<=>(const UpdatePacket&) const = default;
};

std::size_t encoded_length(const UpdatePacket& p,
                           std::size_t n_max = Dag::kDefaultSlotCapacity);
std::vector<std::uint8_t> encode_packet(
    const UpdatePacket& p, std::size_t n_max = Dag::kDefaultSlotCapacity);
UpdatePacket decode_packet(std::span<const std::uint8_t> bytes,
                           std::size_t n_max = Dag::kDefaultSlotCapacity);

enum class BundleErrc {
  MissingFirstPacket,
  DuplicateSequence,
  GapInSequence,
  UncoveredGroupMember,
  UnlistedOperation,
  DuplicateOperation,
  StrayGroupField,
};

class BundleError : public std::runtime_error {
 public:
  BundleError(BundleErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  BundleErrc code() const { return code_; }
  const char* name() const;

 private:
  BundleErrc code_;
};

struct BundleMember {
  TaskId target{};
  UpdateOp op{UpdateOp::Modify};
  std::optional<TaskBitmap> deps;  // new predecessor set, when carried
  std::vector<std::uint8_t> payload;

  auto operator<=>(const BundleMember&) const = default;
};

// A fully received update: the group plus each member's operation, decoded
// from a contiguous packet sequence.
struct UpdateBundle {
  TaskBitmap group_bits;
  std::vector<BundleMember> members;  // in sequence order
  std::size_t total_size{0};          // sum of payload bytes

  UpdateGroup group() const;
  const BundleMember* member_for(TaskId target) const;

  auto operator<=>(const UpdateBundle&) const = default;
};

// Accepts packets in any order; validates that seq 0 exists, sequence numbers
// are contiguous and that operations cover the group bits exactly.
UpdateBundle assemble_bundle(std::vector<UpdatePacket> packets,
                             std::size_t n_max = Dag::kDefaultSlotCapacity);

}  // namespace aero
