#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <optional>
#include <string_view>

namespace sdt {

enum class OpClass : std::uint8_t { IntAlu, FpAlu, VecAlu, Load, Store, Branch };
std::string_view to_string(OpClass c);

// Side effect an op has on the packet bookkeeping when it commits.
enum class PacketEvent : std::uint8_t {
  None,
  DescriptorReleased,  // delivery: descriptor slot handed back to the NIC
  Delivered,           // delivery: payload pointer published to the consumer
  Dequeued,            // processing: payload ring slot freed
  Processed,           // processing: application work for the packet done
};

inline constexpr std::size_t kMaxDeps = 3;

struct MicroOp {
  // Position in the owning thread's stream; dependencies name earlier positions.
  std::uint64_t index = 0;
  OpClass op_class = OpClass::IntAlu;
  std::array<std::uint64_t, kMaxDeps> src_deps{};
  std::uint8_t num_deps = 0;
  std::uint32_t exec_latency = 1;
  std::uint64_t pc = 0;
  std::optional<std::uint64_t> mem_addr;
  std::uint32_t mem_bytes = 0;
  bool is_spin_poll = false;
  // Software prefetch: fills the cache but retires without waiting for data.
  bool is_prefetch = false;
  // Branch whose outcome the front end will get wrong.
  bool mispredicted = false;
  PacketEvent event = PacketEvent::None;
  std::uint64_t packet_id = 0;

  void add_dep(std::uint64_t dep) {
    assert(num_deps < kMaxDeps);
    src_deps[num_deps++] = dep;
  }
  bool is_memory() const { return op_class == OpClass::Load || op_class == OpClass::Store; }
};

}  // namespace sdt
