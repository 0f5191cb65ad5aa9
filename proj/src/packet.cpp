#include "aero/packet.hpp"

#include <algorithm>

namespace aero {

namespace {

constexpr std::size_t bitmap_bytes(std::size_t n_max) { return (n_max + 7) / 8; }

void check_n_max(std::size_t n_max) {
  if (n_max == 0 || n_max > 32) {
    throw CodecError(CodecErrc::InvalidPacket,
                     "codec supports 1..32 task slots, got " +
                         std::to_string(n_max));
  }
}

void put_bitmap(std::vector<std::uint8_t>& out, TaskBitmap bm, std::size_t n_max) {
  for (std::size_t i = 0; i < bitmap_bytes(n_max); ++i) {
    out.push_back(static_cast<std::uint8_t>((bm.raw() >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    if (pos_ >= bytes_.size()) {
      throw CodecError(CodecErrc::Truncated, "packet ends inside a field");
    }
    return bytes_[pos_++];
  }

  std::uint16_t u16_be() {
    std::uint16_t hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }

  TaskBitmap bitmap(std::size_t n_max) {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < bitmap_bytes(n_max); ++i) {
      bits |= static_cast<std::uint32_t>(u8()) << (8 * i);
    }
    TaskBitmap bm(bits);
    if (auto top = bm.highest(); top && top->value >= n_max) {
      throw CodecError(CodecErrc::BadBitmapIndex,
                       "bitmap bit " + std::to_string(top->value) +
                           " outside slot space of " + std::to_string(n_max));
    }
    return bm;
  }

  std::vector<std::uint8_t> take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw CodecError(CodecErrc::Truncated, "code segment shorter than its length field");
    }
    std::vector<std::uint8_t> out(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_{0};
};

}  // namespace

std::vector<TaskId> TaskBitmap::set_ids() const {
  std::vector<TaskId> out;
  for (std::uint8_t v = 0; v < 32; ++v) {
    if ((bits_ >> v) & 1u) out.push_back(TaskId{v});
  }
  return out;
}

std::optional<TaskId> TaskBitmap::highest() const {
  if (bits_ == 0) return std::nullopt;
  std::uint8_t top = 31;
  while (!((bits_ >> top) & 1u)) --top;
  return TaskId{top};
}

UpdateOp to_update_op(UpdateOpCode code) {
  switch (code) {
    case UpdateOpCode::ModifyExisting: return UpdateOp::Modify;
    case UpdateOpCode::InsertNew: return UpdateOp::Insert;
    case UpdateOpCode::RemoveObsolete: return UpdateOp::Remove;
  }
  throw CodecError(CodecErrc::InvalidOpcode, "reserved opcode");
}

UpdateOpCode to_opcode(UpdateOp op) {
  switch (op) {
    case UpdateOp::Modify: return UpdateOpCode::ModifyExisting;
    case UpdateOp::Insert: return UpdateOpCode::InsertNew;
    case UpdateOp::Remove: return UpdateOpCode::RemoveObsolete;
  }
  throw CodecError(CodecErrc::InvalidOpcode, "bad update op");
}

const char* CodecError::name() const {
  switch (code_) {
    case CodecErrc::Truncated: return "Truncated";
    case CodecErrc::InvalidOpcode: return "InvalidOpcode";
    case CodecErrc::BadBitmapIndex: return "BadBitmapIndex";
    case CodecErrc::InvalidTaskId: return "InvalidTaskId";
    case CodecErrc::TrailingBytes: return "TrailingBytes";
    case CodecErrc::InvalidPacket: return "InvalidPacket";
  }
  return "CodecError";
}

const char* BundleError::name() const {
  switch (code_) {
    case BundleErrc::MissingFirstPacket: return "MissingFirstPacket";
    case BundleErrc::DuplicateSequence: return "DuplicateSequence";
    case BundleErrc::GapInSequence: return "GapInSequence";
    case BundleErrc::UncoveredGroupMember: return "UncoveredGroupMember";
    case BundleErrc::UnlistedOperation: return "UnlistedOperation";
    case BundleErrc::DuplicateOperation: return "DuplicateOperation";
    case BundleErrc::StrayGroupField: return "StrayGroupField";
  }
  return "BundleError";
}

namespace {

void validate_packet(const UpdatePacket& p, std::size_t n_max) {
  check_n_max(n_max);
  if (static_cast<std::uint8_t>(p.opcode) > 0b10) {
    throw CodecError(CodecErrc::InvalidOpcode, "reserved opcode 0b11");
  }
  if (p.group_field.has_value() != (p.seq == 0)) {
    throw CodecError(CodecErrc::InvalidPacket,
                     "group field present iff seq == 0");
  }
  if (p.dep_field.has_value() != p.dag_flag) {
    throw CodecError(CodecErrc::InvalidPacket,
                     "dependency field present iff dag flag set");
  }
  if (p.task_id.value >= n_max) {
    throw CodecError(CodecErrc::InvalidTaskId,
                     "task id " + std::to_string(p.task_id.value) +
                         " outside slot space");
  }
  for (const auto& bm : {p.group_field, p.dep_field}) {
    if (!bm) continue;
    if (auto top = bm->highest(); top && top->value >= n_max) {
      throw CodecError(CodecErrc::BadBitmapIndex, "bitmap bit outside slot space");
    }
  }
  if (p.code_segment.size() > 0xFFFF) {
    throw CodecError(CodecErrc::InvalidPacket, "code segment exceeds 65535 bytes");
  }
}

}  // namespace

std::size_t encoded_length(const UpdatePacket& p, std::size_t n_max) {
  check_n_max(n_max);
  return 1 + (p.seq == 0 ? bitmap_bytes(n_max) : 0) + 1 +
         (p.dag_flag ? bitmap_bytes(n_max) : 0) + 2 + p.code_segment.size();
}

std::vector<std::uint8_t> encode_packet(const UpdatePacket& p, std::size_t n_max) {
  validate_packet(p, n_max);
  std::vector<std::uint8_t> out;
  out.reserve(encoded_length(p, n_max));
  out.push_back(p.seq);
  if (p.group_field) put_bitmap(out, *p.group_field, n_max);
  const std::uint8_t header =
      static_cast<std::uint8_t>((static_cast<std::uint8_t>(p.opcode) << 6) |
                                ((p.dag_flag ? 1u : 0u) << 5) |
                                (p.task_id.value & 0x1F));
  out.push_back(header);
  if (p.dep_field) put_bitmap(out, *p.dep_field, n_max);
  const auto len = static_cast<std::uint16_t>(p.code_segment.size());
  out.push_back(static_cast<std::uint8_t>(len >> 8));
  out.push_back(static_cast<std::uint8_t>(len & 0xFF));
  out.insert(out.end(), p.code_segment.begin(), p.code_segment.end());
  return out;
}

UpdatePacket decode_packet(std::span<const std::uint8_t> bytes, std::size_t n_max) {
  check_n_max(n_max);
  Reader r(bytes);
  UpdatePacket p;
  p.seq = r.u8();
  if (p.seq == 0) p.group_field = r.bitmap(n_max);
  const std::uint8_t header = r.u8();
  const std::uint8_t opcode = header >> 6;
  if (opcode == 0b11) {
    throw CodecError(CodecErrc::InvalidOpcode, "reserved opcode 0b11");
  }
  p.opcode = static_cast<UpdateOpCode>(opcode);
  p.dag_flag = (header >> 5) & 1u;
  p.task_id = TaskId{static_cast<std::uint8_t>(header & 0x1F)};
  if (p.task_id.value >= n_max) {
    throw CodecError(CodecErrc::InvalidTaskId,
                     "task id " + std::to_string(p.task_id.value) +
                         " outside slot space");
  }
  if (p.dag_flag) p.dep_field = r.bitmap(n_max);
  const std::uint16_t len = r.u16_be();
  p.code_segment = r.take(len);
  if (!r.done()) {
    throw CodecError(CodecErrc::TrailingBytes, "bytes left after code segment");
  }
  return p;
}

UpdateGroup UpdateBundle::group() const {
  UpdateGroup g;
  for (const auto& m : members) g.members.push_back({m.target, m.op});
  return g;
}

const BundleMember* UpdateBundle::member_for(TaskId target) const {
  for (const auto& m : members) {
    if (m.target == target) return &m;
  }
  return nullptr;
}

UpdateBundle assemble_bundle(std::vector<UpdatePacket> packets, std::size_t n_max) {
  check_n_max(n_max);
  std::sort(packets.begin(), packets.end(),
            [](const UpdatePacket& a, const UpdatePacket& b) { return a.seq < b.seq; });
  if (packets.empty() || packets.front().seq != 0 || !packets.front().group_field) {
    throw BundleError(BundleErrc::MissingFirstPacket,
                      "no seq-0 packet carrying the group field");
  }
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (i > 0 && packets[i].group_field) {
      throw BundleError(BundleErrc::StrayGroupField,
                        "group field outside the first packet");
    }
    if (packets[i].seq == i) continue;
    if (i > 0 && packets[i].seq == packets[i - 1].seq) {
      throw BundleError(BundleErrc::DuplicateSequence,
                        "duplicate seq " + std::to_string(packets[i].seq));
    }
    throw BundleError(BundleErrc::GapInSequence,
                      "sequence jumps to " + std::to_string(packets[i].seq) +
                          " at position " + std::to_string(i));
  }

  UpdateBundle bundle;
  bundle.group_bits = *packets.front().group_field;
  for (const auto& p : packets) {
    if (!bundle.group_bits.test(p.task_id)) {
      throw BundleError(BundleErrc::UnlistedOperation,
                        "operation on " + to_string(p.task_id) +
                            " which the group field does not flag");
    }
    if (bundle.member_for(p.task_id)) {
      throw BundleError(BundleErrc::DuplicateOperation,
                        "second operation for " + to_string(p.task_id));
    }
    bundle.members.push_back(
        {p.task_id, to_update_op(p.opcode), p.dep_field, p.code_segment});
    bundle.total_size += p.code_segment.size();
  }
  for (TaskId id : bundle.group_bits.set_ids()) {
    if (!bundle.member_for(id)) {
      throw BundleError(BundleErrc::UncoveredGroupMember,
                        to_string(id) + " flagged in group but never covered");
    }
  }
  return bundle;
}

}  // namespace aero
