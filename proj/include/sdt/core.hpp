#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdt/cache.hpp"
#include "sdt/config.hpp"
#include "sdt/memory.hpp"
#include "sdt/micro_op.hpp"
#include "sdt/partition.hpp"

namespace sdt {

// A thread's instruction supply. Ops must be numbered 0, 1, 2, ... in
// program order; `next` returns nullopt when nothing can be fetched now.
class OpSource {
 public:
  virtual ~OpSource() = default;
  virtual std::optional<MicroOp> next(Cycle now) = 0;
  virtual void on_commit(const MicroOp& op, Cycle now) {
    (void)op;
    (void)now;
  }
};

// Replays a fixed list of ops; indices are assigned in list order.
class VectorSource final : public OpSource {
 public:
  explicit VectorSource(std::vector<MicroOp> ops);
  std::optional<MicroOp> next(Cycle now) override;
  void on_commit(const MicroOp& op, Cycle now) override;

  std::size_t size() const { return ops_.size(); }
  std::size_t fetched() const { return pos_; }
  std::size_t committed() const { return committed_; }

 private:
  std::vector<MicroOp> ops_;
  std::size_t pos_ = 0;
  std::size_t committed_ = 0;
};

// Renumbers another source's ops by a fixed offset, so a fresh generator can
// take over a thread whose stream already has history.
class ShiftedSource final : public OpSource {
 public:
  ShiftedSource(OpSource& inner, std::uint64_t base) : inner_(inner), base_(base) {}
  std::optional<MicroOp> next(Cycle now) override;
  void on_commit(const MicroOp& op, Cycle now) override;

 private:
  OpSource& inner_;
  std::uint64_t base_;
};

enum class StallReason : std::uint8_t { None, Iq, Lq, Sq, Rob, Reg, Mem, Ring };
std::string_view to_string(StallReason r);

struct ThreadContext {
  ThreadId thread_id = ThreadId::Sdt;
  OpSource* workload = nullptr;
  std::uint64_t fetch_pc = 0;
  StallReason stalled_on = StallReason::None;
};

struct CommittedOp {
  ThreadId thread;
  std::uint64_t index;
  OpClass op_class;
  bool operator==(const CommittedOp&) const = default;
};

struct PacketNote {
  ThreadId thread;
  PacketEvent event;
  std::uint64_t packet_id;
  bool operator==(const PacketNote&) const = default;
};

struct CycleEvents {
  Cycle cycle = 0;
  std::vector<CommittedOp> committed;
  std::vector<PacketNote> packets;
  bool operator==(const CycleEvents&) const = default;
};

// Per-core access counts feeding the power model.
struct ActivityCounters {
  std::uint64_t cycles = 0;
  std::uint64_t fetched = 0;
  std::uint64_t dispatched = 0;
  std::uint64_t issued = 0;
  std::uint64_t committed = 0;
  std::uint64_t int_ops = 0;
  std::uint64_t fp_ops = 0;
  std::uint64_t vec_ops = 0;
  std::uint64_t loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t branches = 0;
  std::uint64_t reg_reads = 0;
  std::uint64_t reg_writes = 0;
  std::uint64_t l1i_accesses = 0;
  std::uint64_t l1d_accesses = 0;
  std::uint64_t l2_accesses = 0;
  std::uint64_t l3_accesses = 0;
  std::uint64_t dram_accesses = 0;
  std::uint64_t itlb_accesses = 0;
  std::uint64_t dtlb_accesses = 0;
  std::uint64_t btb_accesses = 0;
  std::uint64_t flushed_ops = 0;
};

struct OccupancyStats {
  std::uint64_t sum = 0;
  std::uint32_t max = 0;
};

class StallAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One physical core with two hardware threads sharing partitioned
// out-of-order structures. Advances one clock per step().
class Core {
 public:
  static constexpr Cycle kZeroLimitWarnCycles = 1'000'000;

  Core(const CoreConfig& config, MemorySystem& memory, std::uint8_t core_id = 0);
  Core(const Core&) = delete;
  Core& operator=(const Core&) = delete;

  const CoreConfig& config() const { return config_; }
  std::uint8_t id() const { return id_; }
  Cycle now() const { return now_; }

  void bind(ThreadId t, OpSource* source);
  // Runs at the start of every cycle, before any pipeline stage.
  void set_pre_cycle_hook(std::function<void(Cycle)> hook) { pre_cycle_ = std::move(hook); }
  // Line-oriented per-event trace: cycle,thread,stage,opclass,<usage per structure>.
  void set_trace(std::ostream* out);

  const CycleEvents& step();

  // Discards every in-flight op of both threads; fetch resumes after the
  // refill penalty, which is returned.
  Cycle flush();
  // Gates fetch and steps until both ROB partitions are empty. Returns the
  // cycles that elapsed.
  Cycle drain();

  // Installs new limits. Core-queue usage must already fit (flush or drain
  // first); caches, TLBs and the BTB evict down to the new limits.
  void set_scheme(const PartitionScheme& scheme);
  const PartitionScheme& scheme() const { return scheme_; }

  std::uint32_t usage(StructureKind kind, ThreadId t) const;
  std::uint32_t limit(StructureKind kind, ThreadId t) const;
  std::uint32_t capacity(StructureKind kind) const { return capacity_of(config_, kind); }

  const ThreadContext& thread(ThreadId t) const { return threads_[idx(t)].ctx; }
  std::size_t in_flight(ThreadId t) const;
  // Index the thread's next newly supplied op must carry.
  std::uint64_t next_op_index(ThreadId t) const;
  bool idle() const;

  // Every usage register matches a recount of live entries and every
  // usage <= limit; returns the discrepancies found.
  std::vector<std::string> audit() const;

  // Functional warm-up: one op per thread per cycle, committed immediately,
  // with cache/TLB/BTB side effects only.
  void warm_functional(Cycle cycles);

  void reset_stats();
  const ActivityCounters& activity() const { return activity_; }
  std::uint64_t committed(ThreadId t) const { return threads_[idx(t)].committed; }
  const OccupancyStats& occupancy(StructureKind kind, ThreadId t) const {
    return occupancy_[idx(kind)][idx(t)];
  }
  std::uint64_t stats_cycles() const { return activity_.cycles; }

  // Set once a thread has been blocked for kZeroLimitWarnCycles on a
  // structure whose limit is zero.
  std::optional<StructureKind> zero_limit_stall() const { return zero_limit_warning_; }

  PrivateCaches& caches() { return caches_; }
  MemorySystem& memory() { return memory_; }

 private:
  enum class RegClass : std::uint8_t { None, Int, Fp, Vec };

  struct RobEntry {
    MicroOp op;
    Cycle dispatch_cycle = 0;
    Cycle complete_cycle = 0;
    bool issued = false;
    bool completed = false;
    std::uint8_t pending = 0;
    RegClass reg = RegClass::None;
    std::array<std::uint64_t, 6> consumers{};
    std::uint8_t num_consumers = 0;
    std::vector<std::uint64_t> more_consumers;
  };

  struct FetchedOp {
    MicroOp op;
    Cycle ready;
  };

  struct ThreadState {
    ThreadContext ctx;
    std::deque<FetchedOp> fetch_buffer;
    std::deque<MicroOp> replay;
    std::deque<RobEntry> rob;
    std::uint64_t commit_index = 0;
    std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> ready;
    std::uint32_t epoch = 0;
    Cycle fetch_resume = 0;
    std::optional<std::uint64_t> blocked_branch;
    std::uint64_t last_fetch_line = ~0ull;
    Cycle zero_limit_cycles = 0;
    std::uint64_t committed = 0;
  };

  struct Completion {
    std::uint8_t thread;
    std::uint32_t epoch;
    std::uint64_t index;
  };

  static constexpr std::size_t kWheelSize = 1u << 14;

  PartitionedStructure& queue(StructureKind k) { return queues_[idx(k)]; }
  const PartitionedStructure& queue(StructureKind k) const { return queues_[idx(k)]; }
  static RegClass reg_class(const MicroOp& op);
  static std::optional<StructureKind> reg_kind(RegClass rc);

  void writeback();
  void commit();
  void issue();
  void dispatch();
  void fetch();
  void sample_occupancy();

  void recompute_shares();
  std::uint32_t share(ThreadId t) const;
  void schedule(ThreadId t, std::uint64_t index, Cycle at);
  RobEntry* find(ThreadState& ts, std::uint64_t index);

  Cycle load_latency(ThreadId t, std::uint64_t addr, Cycle now, bool count);
  Cycle instruction_fetch(ThreadId t, std::uint64_t pc, Cycle now);
  void store_commit(ThreadId t, std::uint64_t addr, Cycle now);

  void trace(ThreadId t, const char* stage, OpClass c);

  CoreConfig config_;
  MemorySystem& memory_;
  std::uint8_t id_;
  PrivateCaches caches_;
  PartitionedLru btb_;
  std::array<PartitionedStructure, kStructureKinds> queues_;
  PartitionScheme scheme_;
  PerThread<std::uint32_t> base_share_{};
  std::uint32_t remainder_ = 0;

  PerThread<ThreadState> threads_;
  std::vector<std::vector<Completion>> wheel_;
  Cycle now_ = 0;
  bool fetch_gated_ = false;
  std::function<void(Cycle)> pre_cycle_;
  std::ostream* trace_ = nullptr;

  CycleEvents events_;
  ActivityCounters activity_;
  std::array<PerThread<OccupancyStats>, kStructureKinds> occupancy_{};
  std::optional<StructureKind> zero_limit_warning_;
};

}  // namespace sdt
