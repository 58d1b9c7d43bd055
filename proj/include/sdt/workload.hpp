#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "sdt/config.hpp"
#include "sdt/core.hpp"
#include "sdt/memory.hpp"
#include "sdt/micro_op.hpp"
#include "sdt/rng.hpp"

namespace sdt {

inline constexpr double kMaxRate = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Compute intensity of the data-processing thread.

enum class Intensity : std::uint8_t { Low, Medium, High };
std::string_view to_string(Intensity i);
std::optional<Intensity> intensity_from_string(std::string_view name);

struct IntensityPreset {
  Intensity label = Intensity::Medium;
  double target_gbps = 0.0;      // network load per core
  double cycles_per_byte = 0.0;  // processing cost that one core sustains at target_gbps
};

// Low 9 Gbps, Medium 4 Gbps, High 0.5 Gbps per core; cycles/byte is the
// cycle budget per byte at that load: clock_hz * 8 / target_bps.
IntensityPreset intensity_preset(Intensity label, double clock_ghz = 3.0);

// ---------------------------------------------------------------------------
// NIC load generator.

// Fixed-rate arrivals with +-10% uniform jitter per gap, deterministic in the
// seed. An infinite rate delivers one packet every cycle.
class ArrivalProcess {
 public:
  ArrivalProcess(double rate_gbps, std::uint32_t pkt_bytes, double clock_ghz, std::uint64_t seed);

  // Mean cycles between arrivals; infinite for rate 0.
  double mean_interarrival() const { return mean_; }
  bool active() const { return active_; }
  Cycle peek() const { return next_cycle_; }
  void pop();

 private:
  void advance();

  double mean_;
  bool active_;
  bool back_to_back_;
  Rng rng_;
  double next_time_ = 0.0;
  Cycle next_cycle_ = 0;
};

// Arrival cycles in [0, duration).
std::vector<Cycle> nic_arrivals(double rate_gbps, std::uint32_t pkt_bytes, Cycle duration, std::uint64_t seed,
                                double clock_ghz = 3.0);

// ---------------------------------------------------------------------------
// Buffers shared between the NIC, the delivery thread and the processing
// thread. Counters are monotonic; occupancy is their difference.

class DescriptorRing {
 public:
  explicit DescriptorRing(std::uint32_t slots = 1024);

  std::uint32_t slots() const { return slots_; }
  std::uint64_t occupancy() const { return tail_ - head_; }
  bool full() const { return occupancy() == slots_; }
  std::uint64_t drops() const { return drops_; }

  // NIC side: fills the next slot, or counts a drop when the ring is full.
  std::optional<std::uint32_t> produce(std::uint64_t packet_id);
  // Driver side: claims the oldest filled slot not yet claimed.
  struct Claim {
    std::uint32_t slot;
    std::uint64_t packet_id;
  };
  std::optional<Claim> claim();
  bool claimable() const { return claimed_ < tail_; }
  // Hands the oldest claimed slot back to the NIC.
  void release();

  std::uint64_t head() const { return head_; }
  std::uint64_t tail() const { return tail_; }

 private:
  std::uint32_t slots_;
  std::vector<std::uint64_t> packet_;
  std::uint64_t head_ = 0;
  std::uint64_t claimed_ = 0;
  std::uint64_t tail_ = 0;
  std::uint64_t drops_ = 0;
};

// Single-producer single-consumer pointer ring between the two threads.
// Producer reserves at fetch and publishes at commit; consumer claims at
// fetch and releases at commit.
class PayloadRing {
 public:
  explicit PayloadRing(std::uint32_t slots = 512);

  std::uint32_t slots() const { return slots_; }
  bool can_reserve() const { return reserved_ - released_ < slots_; }
  void reserve() { ++reserved_; }
  void publish(std::uint64_t packet_id);
  bool claimable() const { return !visible_.empty(); }
  std::optional<std::uint64_t> claim();
  void release() { ++released_; }
  // Published entries whose slot has not been freed by the consumer.
  std::uint64_t occupancy() const { return published_ - released_; }
  std::uint64_t published() const { return published_; }
  std::uint64_t claimed() const { return claimed_; }

 private:
  std::uint32_t slots_;
  std::uint64_t reserved_ = 0;
  std::uint64_t published_ = 0;
  std::uint64_t claimed_ = 0;
  std::uint64_t released_ = 0;
  std::deque<std::uint64_t> visible_;
};

struct PacketRecord {
  Cycle arrival_cycle = 0;
  Cycle delivery_done_cycle = 0;
  Cycle processing_done_cycle = 0;
  std::uint32_t size = 64;
  std::uint32_t slot = 0;
  bool delivered = false;
  bool processed = false;
};

class PacketLedger {
 public:
  std::uint64_t admit(Cycle arrival, std::uint32_t size, std::uint32_t slot);
  void drop() {
    ++injected_;
    ++dropped_;
  }
  void mark_delivered(std::uint64_t id, Cycle at);
  void mark_processed(std::uint64_t id, Cycle at);

  const PacketRecord& operator[](std::uint64_t id) const { return records_[id]; }
  std::size_t size() const { return records_.size(); }
  const std::vector<PacketRecord>& records() const { return records_; }

  std::uint64_t injected() const { return injected_; }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t processed() const { return processed_; }
  std::uint64_t in_flight() const { return injected_ - dropped_ - processed_; }
  std::uint64_t delivered_bytes() const { return delivered_bytes_; }
  std::uint64_t processed_bytes() const { return processed_bytes_; }

 private:
  std::vector<PacketRecord> records_;
  std::uint64_t injected_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t delivered_bytes_ = 0;
  std::uint64_t processed_bytes_ = 0;
};

// Virtual addresses of the shared buffers and code. Each node uses its own
// map, so distinct nodes never alias.
struct AddressMap {
  std::uint64_t descriptors = 0x1000'0000;
  std::uint64_t packet_pool = 0x2000'0000;
  std::uint64_t payload_ring = 0x3000'0000;
  std::uint64_t ring_indices = 0x3100'0000;
  std::uint64_t mempool_cache = 0x3800'0000;
  std::uint64_t app_state = 0x4000'0000;
  std::uint64_t delivery_code = 0x0040'0000;
  std::uint64_t processing_code = 0x0050'0000;

  static constexpr std::uint32_t kDescriptorBytes = 64;
  static constexpr std::uint32_t kBufferStride = 2048 + 128;  // padded so buffers spread over cache sets
  static constexpr std::uint32_t kHeadroom = 128;

  std::uint64_t descriptor(std::uint64_t slot) const { return descriptors + slot * kDescriptorBytes; }
  std::uint64_t mbuf(std::uint64_t slot) const { return packet_pool + slot * kBufferStride; }
  std::uint64_t packet_data(std::uint64_t slot) const { return mbuf(slot) + kHeadroom; }
  std::uint64_t ring_entry(std::uint64_t pos) const { return payload_ring + pos * 8; }
};

// The NIC port: generates arrivals, DMAs packet bytes and descriptors into
// the LLC and advances the descriptor ring tail.
class NicPort {
 public:
  NicPort(ArrivalProcess arrivals, std::uint32_t pkt_bytes, DescriptorRing& ring, PacketLedger& ledger,
          MemorySystem& memory, const AddressMap& map, Cycle origin = 0);

  // Admits every arrival scheduled at or before `now`; schedule times count
  // from `origin`.
  void tick(Cycle now);

 private:
  Cycle origin_;
  ArrivalProcess arrivals_;
  std::uint32_t pkt_bytes_;
  DescriptorRing& ring_;
  PacketLedger& ledger_;
  MemorySystem& memory_;
  AddressMap map_;
};

// ---------------------------------------------------------------------------
// Op-stream generators.

struct DeliveryParams {
  std::uint32_t ops_per_packet = 200;
  // Share of the per-packet ops on the loop-carried header-rewrite chain.
  double chain_fraction = 0.78;
  std::uint32_t prefetch_distance = 4;
  double branch_accuracy = 0.99;
  std::uint64_t seed = 1;
};

// Fixed ops in the delivery template besides the rewrite chain and filler.
inline constexpr std::uint32_t kDeliveryFixedOps = 19;

// l2fwd-like driver loop: polls the descriptor ring, reads and rewrites the
// packet header, publishes the buffer pointer to the payload ring (or to the
// TX side when there is no consumer) and refills the descriptor.
class DeliveryThread final : public OpSource {
 public:
  // `payload` may be null: packets then complete when delivered.
  DeliveryThread(const DeliveryParams& params, const AddressMap& map, DescriptorRing& rx, PayloadRing* payload,
                 PacketLedger& ledger);

  std::optional<MicroOp> next(Cycle now) override;
  void on_commit(const MicroOp& op, Cycle now) override;

  // Template for the packet in `slot`. Depends only on its arguments and the
  // generator's register state.
  std::vector<MicroOp> packet_ops(std::uint32_t slot, std::uint64_t packet_id);
  std::vector<MicroOp> poll_ops(bool waiting_on_consumer);

  std::uint64_t generated() const { return next_index_; }
  std::uint64_t spin_ops() const { return spin_ops_; }

 private:
  enum Reg : std::uint8_t { Head, Tail, Desc, Mbuf, Meta, Hdr, Chain, Acc, Pool, PoolPtr, Tmp, Tmp2, Stat0, kRegs };
  static constexpr std::uint8_t kStatRegs = 4;

  MicroOp make(OpClass c, std::optional<std::uint8_t> dest, std::initializer_list<std::uint8_t> srcs,
               std::uint32_t template_pos);
  bool mispredict(std::uint64_t index) const;

  DeliveryParams params_;
  AddressMap map_;
  DescriptorRing& rx_;
  PayloadRing* payload_;
  PacketLedger& ledger_;
  std::uint64_t next_index_ = 0;
  std::uint64_t packets_ = 0;
  std::array<std::optional<std::uint64_t>, kRegs + kStatRegs> last_writer_{};
  std::deque<MicroOp> pending_;
  std::uint64_t spin_ops_ = 0;
};

struct ProcessingParams {
  std::uint32_t pkt_bytes = 64;
  double cycles_per_byte = 6.0;
  std::uint32_t ilp = 2;
  std::uint32_t chain_length = 4;
  std::uint32_t branch_every = 32;
  double branch_accuracy = 0.97;
  std::uint64_t app_state_bytes = 256 * 1024;
  std::uint64_t seed = 2;
};

// Application thread: dequeues a payload pointer, reads the payload and a
// slice of application state, then runs size * cycles_per_byte cycles of
// integer work as `ilp` interleaved strands of dependent chains.
class ProcessingThread final : public OpSource {
 public:
  ProcessingThread(const ProcessingParams& params, const AddressMap& map, PayloadRing& payload,
                   PacketLedger& ledger);

  std::optional<MicroOp> next(Cycle now) override;
  void on_commit(const MicroOp& op, Cycle now) override;

  std::vector<MicroOp> packet_ops(std::uint64_t packet_id, std::uint32_t size);
  std::vector<MicroOp> poll_ops();

  // Cycles of work per packet before the ILP factor.
  static double work_cycles(std::uint32_t size, double cycles_per_byte) { return size * cycles_per_byte; }
  std::uint64_t work_ops(std::uint32_t size) const;

 private:
  enum Reg : std::uint8_t { RingHead, Ptr, AppVal, Tmp, kFixedRegs };

  MicroOp make(OpClass c, std::optional<std::uint8_t> dest, std::initializer_list<std::uint8_t> srcs,
               std::uint32_t template_pos);
  bool mispredict(std::uint64_t index) const;

  ProcessingParams params_;
  AddressMap map_;
  PayloadRing& payload_;
  PacketLedger& ledger_;
  std::uint64_t next_index_ = 0;
  std::vector<std::optional<std::uint64_t>> last_writer_;
  std::deque<MicroOp> pending_;
};

}  // namespace sdt
