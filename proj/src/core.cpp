#include "sdt/core.hpp"

#include <algorithm>
#include <cassert>
#include <ostream>
#include <sstream>

namespace sdt {

std::string_view to_string(OpClass c) {
  switch (c) {
    case OpClass::IntAlu: return "int_alu";
    case OpClass::FpAlu: return "fp_alu";
    case OpClass::VecAlu: return "vec_alu";
    case OpClass::Load: return "load";
    case OpClass::Store: return "store";
    case OpClass::Branch: return "branch";
  }
  return "?";
}

std::string_view to_string(StallReason r) {
  switch (r) {
    case StallReason::None: return "none";
    case StallReason::Iq: return "iq";
    case StallReason::Lq: return "lq";
    case StallReason::Sq: return "sq";
    case StallReason::Rob: return "rob";
    case StallReason::Reg: return "reg";
    case StallReason::Mem: return "mem";
    case StallReason::Ring: return "ring";
  }
  return "?";
}

VectorSource::VectorSource(std::vector<MicroOp> ops) : ops_(std::move(ops)) {
  for (std::size_t i = 0; i < ops_.size(); ++i) ops_[i].index = i;
}

std::optional<MicroOp> VectorSource::next(Cycle) {
  if (pos_ >= ops_.size()) return std::nullopt;
  return ops_[pos_++];
}

void VectorSource::on_commit(const MicroOp&, Cycle) { ++committed_; }

std::optional<MicroOp> ShiftedSource::next(Cycle now) {
  auto op = inner_.next(now);
  if (!op) return op;
  op->index += base_;
  for (std::uint8_t d = 0; d < op->num_deps; ++d) op->src_deps[d] += base_;
  return op;
}

void ShiftedSource::on_commit(const MicroOp& op, Cycle now) {
  MicroOp local = op;
  local.index -= base_;
  for (std::uint8_t d = 0; d < local.num_deps; ++d) local.src_deps[d] -= base_;
  inner_.on_commit(local, now);
}

namespace {

StallReason stall_for(StructureKind k) {
  switch (k) {
    case StructureKind::IQ: return StallReason::Iq;
    case StructureKind::LQ: return StallReason::Lq;
    case StructureKind::SQ: return StallReason::Sq;
    case StructureKind::ROB: return StallReason::Rob;
    default: return StallReason::Reg;
  }
}

constexpr std::array<StructureKind, 7> kQueueKinds{
    StructureKind::IQ,     StructureKind::LQ,    StructureKind::SQ,    StructureKind::ROB,
    StructureKind::IntReg, StructureKind::FpReg, StructureKind::VecReg,
};

}  // namespace

Core::Core(const CoreConfig& config, MemorySystem& memory, std::uint8_t core_id)
    : config_(config),
      memory_(memory),
      id_(core_id),
      caches_(config),
      btb_(config.btb_entries, /*shared_lookup=*/false),
      wheel_(kWheelSize) {
  config_.validate();
  for (auto k : kAllStructures) queues_[idx(k)] = PartitionedStructure(k, capacity_of(config_, k));
  threads_[0].ctx.thread_id = ThreadId::Sdt;
  threads_[1].ctx.thread_id = ThreadId::Main;
  memory_.attach(&caches_);
  set_scheme(preset_scheme(config_, PresetLabel::Baseline));
}

void Core::bind(ThreadId t, OpSource* source) { threads_[idx(t)].ctx.workload = source; }

void Core::set_trace(std::ostream* out) {
  trace_ = out;
  if (trace_) {
    *trace_ << "cycle,thread,stage,opclass";
    for (auto k : kQueueKinds) *trace_ << ',' << to_string(k);
    *trace_ << '\n';
  }
}

void Core::trace(ThreadId t, const char* stage, OpClass c) {
  *trace_ << now_ << ',' << to_string(t) << ',' << stage << ',' << to_string(c);
  for (auto k : kQueueKinds) *trace_ << ',' << queue(k).usage(t);
  *trace_ << '\n';
}

Core::RegClass Core::reg_class(const MicroOp& op) {
  switch (op.op_class) {
    case OpClass::IntAlu: return RegClass::Int;
    case OpClass::Load: return op.is_prefetch ? RegClass::None : RegClass::Int;
    case OpClass::FpAlu: return RegClass::Fp;
    case OpClass::VecAlu: return RegClass::Vec;
    default: return RegClass::None;
  }
}

std::optional<StructureKind> Core::reg_kind(RegClass rc) {
  switch (rc) {
    case RegClass::Int: return StructureKind::IntReg;
    case RegClass::Fp: return StructureKind::FpReg;
    case RegClass::Vec: return StructureKind::VecReg;
    case RegClass::None: break;
  }
  return std::nullopt;
}

void Core::set_scheme(const PartitionScheme& scheme) {
  auto violations = validate(scheme, config_);
  if (!violations.empty()) {
    throw std::invalid_argument("scheme violates capacity of " + std::string(to_string(violations.front().kind)));
  }
  for (auto k : kQueueKinds) {
    for (auto t : kAllThreads) {
      const auto lim = static_cast<std::uint32_t>(t == ThreadId::Sdt ? scheme[k].sdt : scheme[k].main);
      if (queue(k).usage(t) > lim) {
        throw std::logic_error("set_scheme: " + std::string(to_string(k)) + " holds entries beyond the new limit");
      }
    }
  }
  for (auto k : kAllStructures) {
    queues_[idx(k)].set_limits(static_cast<std::uint32_t>(scheme[k].sdt), static_cast<std::uint32_t>(scheme[k].main));
  }
  btb_.set_limits(static_cast<std::uint32_t>(scheme[StructureKind::BTB].sdt),
                  static_cast<std::uint32_t>(scheme[StructureKind::BTB].main));
  caches_.itlb.set_limits(static_cast<std::uint32_t>(scheme[StructureKind::ITLB].sdt),
                          static_cast<std::uint32_t>(scheme[StructureKind::ITLB].main));
  caches_.dtlb.set_limits(static_cast<std::uint32_t>(scheme[StructureKind::DTLB].sdt),
                          static_cast<std::uint32_t>(scheme[StructureKind::DTLB].main));
  caches_.l1d.set_way_quota({static_cast<std::uint32_t>(scheme[StructureKind::L1dWays].sdt),
                             static_cast<std::uint32_t>(scheme[StructureKind::L1dWays].main)});
  caches_.l1d.enforce_quota();
  caches_.l2.set_way_quota({static_cast<std::uint32_t>(scheme[StructureKind::L2Ways].sdt),
                            static_cast<std::uint32_t>(scheme[StructureKind::L2Ways].main)});
  caches_.l2.enforce_quota();
  scheme_ = scheme;
  recompute_shares();
}

void Core::recompute_shares() {
  const std::uint64_t w = config_.superscalar_width;
  const std::uint64_t a = static_cast<std::uint64_t>(scheme_[StructureKind::ROB].sdt);
  const std::uint64_t b = static_cast<std::uint64_t>(scheme_[StructureKind::ROB].main);
  if (a + b == 0) {
    base_share_ = {0, 0};
    remainder_ = 0;
    return;
  }
  base_share_ = {static_cast<std::uint32_t>(w * a / (a + b)), static_cast<std::uint32_t>(w * b / (a + b))};
  remainder_ = static_cast<std::uint32_t>(w - base_share_[0] - base_share_[1]);
}

std::uint32_t Core::share(ThreadId t) const {
  const auto i = idx(t);
  if (limit(StructureKind::ROB, t) == 0) return 0;
  std::uint32_t s = base_share_[i];
  if (remainder_ > 0) {
    // Remainder slots alternate between threads; a thread with no ROB share
    // forfeits its turn to the other.
    const auto turn = static_cast<std::size_t>(now_ % kThreads);
    const bool other_disabled = limit(StructureKind::ROB, other(t)) == 0;
    if (turn == i || other_disabled) s += remainder_;
  }
  return s;
}

std::uint32_t Core::usage(StructureKind kind, ThreadId t) const {
  switch (kind) {
    case StructureKind::BTB: return btb_.usage(t);
    case StructureKind::ITLB: return caches_.itlb.usage(t);
    case StructureKind::DTLB: return caches_.dtlb.usage(t);
    case StructureKind::L1dWays: return caches_.l1d.max_lines_in_a_set(static_cast<std::uint8_t>(idx(t)));
    case StructureKind::L2Ways: return caches_.l2.max_lines_in_a_set(static_cast<std::uint8_t>(idx(t)));
    default: return queue(kind).usage(t);
  }
}

std::uint32_t Core::limit(StructureKind kind, ThreadId t) const { return queue(kind).limit(t); }

std::size_t Core::in_flight(ThreadId t) const {
  const auto& ts = threads_[idx(t)];
  return ts.rob.size() + ts.fetch_buffer.size();
}

std::uint64_t Core::next_op_index(ThreadId t) const {
  const auto& ts = threads_[idx(t)];
  return ts.commit_index + ts.rob.size() + ts.fetch_buffer.size() + ts.replay.size();
}

bool Core::idle() const {
  for (const auto& ts : threads_) {
    if (!ts.rob.empty() || !ts.fetch_buffer.empty() || !ts.replay.empty()) return false;
  }
  return true;
}

void Core::schedule(ThreadId t, std::uint64_t index, Cycle at) {
  assert(at > now_ || at == now_);
  if (at - now_ >= kWheelSize) throw std::logic_error("latency exceeds completion wheel");
  wheel_[at & (kWheelSize - 1)].push_back({static_cast<std::uint8_t>(idx(t)), threads_[idx(t)].epoch, index});
}

Core::RobEntry* Core::find(ThreadState& ts, std::uint64_t index) {
  if (index < ts.commit_index) return nullptr;
  const auto off = index - ts.commit_index;
  if (off >= ts.rob.size()) return nullptr;
  return &ts.rob[off];
}

const CycleEvents& Core::step() {
  if (pre_cycle_) pre_cycle_(now_);
  events_.cycle = now_;
  events_.committed.clear();
  events_.packets.clear();

  writeback();
  commit();
  issue();
  dispatch();
  fetch();
  sample_occupancy();

  ++activity_.cycles;
  ++now_;
  return events_;
}

void Core::writeback() {
  auto& bucket = wheel_[now_ & (kWheelSize - 1)];
  for (const auto& c : bucket) {
    auto& ts = threads_[c.thread];
    if (c.epoch != ts.epoch) continue;
    RobEntry* e = find(ts, c.index);
    if (!e || e->completed) continue;
    e->completed = true;
    e->complete_cycle = now_;
    auto wake = [&](std::uint64_t consumer) {
      RobEntry* d = find(ts, consumer);
      if (d && d->pending > 0 && --d->pending == 0 && !d->issued) ts.ready.push(consumer);
    };
    for (std::uint8_t i = 0; i < e->num_consumers; ++i) wake(e->consumers[i]);
    for (auto consumer : e->more_consumers) wake(consumer);
    if (ts.blocked_branch && *ts.blocked_branch == c.index) {
      ts.blocked_branch.reset();
      ts.fetch_resume = std::max(ts.fetch_resume, now_ + config_.mispredict_penalty);
    }
  }
  bucket.clear();
}

void Core::commit() {
  const auto first = static_cast<std::size_t>(now_ % kThreads);
  for (std::size_t k = 0; k < kThreads; ++k) {
    const ThreadId t = kAllThreads[(first + k) % kThreads];
    auto& ts = threads_[idx(t)];
    std::uint32_t budget = share(t);
    while (budget > 0 && !ts.rob.empty() && ts.rob.front().completed) {
      RobEntry& e = ts.rob.front();
      const MicroOp& op = e.op;
      if (op.op_class == OpClass::Store && op.mem_addr) store_commit(t, *op.mem_addr, now_);
      queue(StructureKind::ROB).release(t, 1);
      if (op.op_class == OpClass::Load) queue(StructureKind::LQ).release(t, 1);
      if (op.op_class == OpClass::Store) queue(StructureKind::SQ).release(t, 1);
      if (auto rk = reg_kind(e.reg)) queue(*rk).release(t, 1);
      events_.committed.push_back({t, op.index, op.op_class});
      if (op.event != PacketEvent::None) events_.packets.push_back({t, op.event, op.packet_id});
      if (trace_) trace(t, "commit", op.op_class);
      if (ts.ctx.workload) ts.ctx.workload->on_commit(op, now_);
      ++ts.committed;
      ++activity_.committed;
      ++activity_.reg_writes;  // architectural state update
      ts.rob.pop_front();
      ++ts.commit_index;
      --budget;
    }
    if (!ts.rob.empty() && !ts.rob.front().completed && ts.rob.front().op.op_class == OpClass::Load &&
        ts.rob.front().issued) {
      ts.ctx.stalled_on = StallReason::Mem;
    }
  }
}

void Core::issue() {
  const auto& u = config_.units;
  std::uint32_t int_free = u.int_alu;
  std::uint32_t fp_free = u.fp;
  std::uint32_t vec_free = u.vec;
  std::uint32_t load_free = u.load_ports;
  std::uint32_t store_free = u.store_ports;
  auto unit = [&](OpClass c) -> std::uint32_t& {
    switch (c) {
      case OpClass::IntAlu:
      case OpClass::Branch: return int_free;
      case OpClass::FpAlu: return fp_free;
      case OpClass::VecAlu: return vec_free;
      case OpClass::Load: return load_free;
      case OpClass::Store: return store_free;
    }
    return int_free;
  };

  std::vector<std::uint64_t> deferred;
  const auto first = static_cast<std::size_t>(now_ % kThreads);
  for (std::size_t k = 0; k < kThreads; ++k) {
    const ThreadId t = kAllThreads[(first + k) % kThreads];
    auto& ts = threads_[idx(t)];
    std::uint32_t budget = share(t);
    deferred.clear();
    while (budget > 0 && !ts.ready.empty()) {
      const std::uint64_t index = ts.ready.top();
      ts.ready.pop();
      RobEntry* e = find(ts, index);
      if (!e || e->issued) continue;
      auto& free = unit(e->op.op_class);
      if (free == 0) {
        deferred.push_back(index);
        // Nothing else can issue once every unit class is exhausted.
        if (int_free + fp_free + vec_free + load_free + store_free == 0) break;
        continue;
      }
      --free;
      --budget;
      e->issued = true;
      queue(StructureKind::IQ).release(t, 1);
      ++activity_.issued;
      activity_.reg_reads += e->op.num_deps;
      if (trace_) trace(t, "issue", e->op.op_class);

      Cycle done = now_ + e->op.exec_latency;
      switch (e->op.op_class) {
        case OpClass::IntAlu: ++activity_.int_ops; break;
        case OpClass::Branch: ++activity_.branches; break;
        case OpClass::FpAlu: ++activity_.fp_ops; break;
        case OpClass::VecAlu: ++activity_.vec_ops; break;
        case OpClass::Store: ++activity_.stores; break;
        case OpClass::Load: {
          ++activity_.loads;
          const Cycle data = load_latency(t, e->op.mem_addr.value_or(0), now_, true);
          done = e->op.is_prefetch ? now_ + 1 : std::max(done, data);
          break;
        }
      }
      schedule(t, index, std::max(done, now_ + 1));
    }
    for (auto d : deferred) ts.ready.push(d);
  }
}

void Core::dispatch() {
  const auto first = static_cast<std::size_t>(now_ % kThreads);
  for (std::size_t k = 0; k < kThreads; ++k) {
    const ThreadId t = kAllThreads[(first + k) % kThreads];
    auto& ts = threads_[idx(t)];
    std::uint32_t budget = share(t);
    // Width follows the ROB limit, so a zero ROB limit never reaches the
    // allocation check below.
    std::optional<StructureKind> blocked_by_zero;
    if (budget == 0 && ts.ctx.workload && queue(StructureKind::ROB).limit(t) == 0) {
      blocked_by_zero = StructureKind::ROB;
    }
    while (budget > 0 && !ts.fetch_buffer.empty() && ts.fetch_buffer.front().ready <= now_) {
      const MicroOp& op = ts.fetch_buffer.front().op;
      const std::uint64_t expected = ts.commit_index + ts.rob.size();
      if (op.index != expected) {
        throw ConfigError("op stream out of order: expected index " + std::to_string(expected) + ", got " +
                          std::to_string(op.index));
      }
      if (op.is_memory() != op.mem_addr.has_value()) {
        throw ConfigError("memory address present iff op is a load or store (op " + std::to_string(op.index) + ")");
      }
      if (op.exec_latency < 1) throw ConfigError("exec_latency must be >= 1 (op " + std::to_string(op.index) + ")");
      for (std::uint8_t d = 0; d < op.num_deps; ++d) {
        if (op.src_deps[d] >= op.index) {
          throw ConfigError("dangling dependency: op " + std::to_string(op.index) + " depends on " +
                            std::to_string(op.src_deps[d]));
        }
      }

      const RegClass rc = reg_class(op);
      std::array<StructureKind, 4> need{};
      std::size_t n = 0;
      need[n++] = StructureKind::ROB;
      need[n++] = StructureKind::IQ;
      if (op.op_class == OpClass::Load) need[n++] = StructureKind::LQ;
      if (op.op_class == OpClass::Store) need[n++] = StructureKind::SQ;
      if (auto rk = reg_kind(rc)) need[n++] = *rk;

      std::optional<StructureKind> reject;
      for (std::size_t i = 0; i < n; ++i) {
        if (!queue(need[i]).can_allocate(t, 1)) {
          reject = need[i];
          break;
        }
      }
      if (reject) {
        ts.ctx.stalled_on = stall_for(*reject);
        if (queue(*reject).limit(t) == 0) blocked_by_zero = reject;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) queue(need[i]).try_allocate(t, 1);

      RobEntry e;
      e.op = op;
      e.dispatch_cycle = now_;
      e.reg = rc;
      for (std::uint8_t d = 0; d < op.num_deps; ++d) {
        RobEntry* producer = find(ts, op.src_deps[d]);
        if (!producer || producer->completed) continue;
        ++e.pending;
        if (producer->num_consumers < producer->consumers.size()) {
          producer->consumers[producer->num_consumers++] = op.index;
        } else {
          producer->more_consumers.push_back(op.index);
        }
      }
      ts.ctx.stalled_on = op.is_spin_poll ? StallReason::Ring : StallReason::None;
      const bool ready = e.pending == 0;
      ts.rob.push_back(std::move(e));
      if (ready) ts.ready.push(op.index);
      ts.fetch_buffer.pop_front();
      ++activity_.dispatched;
      if (trace_) trace(t, "dispatch", ts.rob.back().op.op_class);
      --budget;
    }
    if (blocked_by_zero) {
      if (++ts.zero_limit_cycles >= kZeroLimitWarnCycles && !zero_limit_warning_) {
        zero_limit_warning_ = blocked_by_zero;
      }
    } else if (budget < share(t) || ts.fetch_buffer.empty()) {
      ts.zero_limit_cycles = 0;
    }
  }
}

void Core::fetch() {
  if (fetch_gated_) return;
  const std::size_t cap = 4u * config_.superscalar_width;
  const auto first = static_cast<std::size_t>(now_ % kThreads);
  for (std::size_t k = 0; k < kThreads; ++k) {
    const ThreadId t = kAllThreads[(first + k) % kThreads];
    auto& ts = threads_[idx(t)];
    if (!ts.ctx.workload && ts.replay.empty()) continue;
    if (now_ < ts.fetch_resume || ts.blocked_branch) continue;
    std::uint32_t budget = share(t);
    while (budget > 0 && ts.fetch_buffer.size() < cap) {
      std::optional<MicroOp> op;
      if (!ts.replay.empty()) {
        op = std::move(ts.replay.front());
        ts.replay.pop_front();
      } else if (ts.ctx.workload) {
        op = ts.ctx.workload->next(now_);
      }
      if (!op) break;

      const std::uint64_t line = op->pc / kLineBytes;
      if (line != ts.last_fetch_line) {
        const Cycle ready = instruction_fetch(t, op->pc, now_);
        if (ready > now_ + config_.l1_latency) {
          ts.replay.push_front(std::move(*op));
          ts.fetch_resume = ready;
          break;
        }
        ts.last_fetch_line = line;
      }
      ts.ctx.fetch_pc = op->pc;
      ++activity_.fetched;
      bool stop = false;
      if (op->op_class == OpClass::Branch) {
        ++activity_.btb_accesses;
        if (!btb_.lookup(t, op->pc)) {
          btb_.insert(t, op->pc);
          ts.fetch_resume = now_ + config_.btb_miss_bubble;
          stop = true;
        }
        if (op->mispredicted) {
          ts.blocked_branch = op->index;
          stop = true;
        }
      }
      if (trace_) trace(t, "fetch", op->op_class);
      ts.fetch_buffer.push_back({std::move(*op), now_ + config_.frontend_depth});
      --budget;
      if (stop) break;
    }
  }
}

void Core::sample_occupancy() {
  auto add = [&](StructureKind k, ThreadId t, std::uint32_t u) {
    auto& o = occupancy_[idx(k)][idx(t)];
    o.sum += u;
    o.max = std::max(o.max, u);
  };
  for (auto t : kAllThreads) {
    for (auto k : kQueueKinds) add(k, t, queue(k).usage(t));
    add(StructureKind::BTB, t, btb_.usage(t));
    add(StructureKind::ITLB, t, caches_.itlb.usage(t));
    add(StructureKind::DTLB, t, caches_.dtlb.usage(t));
  }
  // Way occupancy is a full-cache scan; sample it sparsely.
  if ((now_ & 4095) == 0) {
    for (auto t : kAllThreads) {
      const auto owner = static_cast<std::uint8_t>(idx(t));
      for (auto k : {StructureKind::L1dWays, StructureKind::L2Ways}) {
        auto& o = occupancy_[idx(k)][idx(t)];
        const auto u = (k == StructureKind::L1dWays ? caches_.l1d : caches_.l2).max_lines_in_a_set(owner);
        o.sum += static_cast<std::uint64_t>(u) * 4096;
        o.max = std::max(o.max, u);
      }
    }
  }
}

Cycle Core::load_latency(ThreadId t, std::uint64_t addr, Cycle now, bool count) {
  const auto owner = static_cast<std::uint8_t>(idx(t));
  Cycle start = now;
  if (count) ++activity_.dtlb_accesses;
  const std::uint64_t page = addr / config_.data_page_bytes;
  if (!caches_.dtlb.lookup(t, page)) {
    caches_.dtlb.insert(t, page);
    start += config_.tlb_miss_penalty;
  }
  if (count) ++activity_.l1d_accesses;
  Cycle at = start + config_.l1_latency;
  if (auto r = caches_.l1d.probe(addr)) return std::max(at, *r);
  if (count) ++activity_.l2_accesses;
  at += config_.l2_latency;
  if (auto r = caches_.l2.probe(addr)) {
    const Cycle done = std::max(at, *r);
    caches_.l1d.fill(addr, owner, done);
    return done;
  }
  if (count) ++activity_.l3_accesses;
  ++memory_.l3_accesses;
  at += memory_.l3_latency();
  Cycle done;
  if (auto r = memory_.l3().probe(addr)) {
    done = std::max(at, *r);
  } else {
    if (count) ++activity_.dram_accesses;
    ++memory_.dram_accesses;
    done = at + memory_.dram_cycles();
    memory_.l3().fill(addr, 0, done);
  }
  caches_.l2.fill(addr, owner, done);
  caches_.l1d.fill(addr, owner, done);
  return done;
}

Cycle Core::instruction_fetch(ThreadId t, std::uint64_t pc, Cycle now) {
  ++activity_.itlb_accesses;
  ++activity_.l1i_accesses;
  Cycle start = now;
  const std::uint64_t page = pc / config_.code_page_bytes;
  if (!caches_.itlb.lookup(t, page)) {
    caches_.itlb.insert(t, page);
    start += config_.tlb_miss_penalty;
  }
  Cycle at = start + config_.l1_latency;
  if (auto r = caches_.l1i.probe(pc)) return std::max(at, *r);
  ++activity_.l2_accesses;
  at += config_.l2_latency;
  Cycle done;
  if (auto r = caches_.l2.probe(pc)) {
    done = std::max(at, *r);
  } else {
    ++activity_.l3_accesses;
    ++memory_.l3_accesses;
    at += memory_.l3_latency();
    if (auto r3 = memory_.l3().probe(pc)) {
      done = std::max(at, *r3);
    } else {
      ++activity_.dram_accesses;
      ++memory_.dram_accesses;
      done = at + memory_.dram_cycles();
      memory_.l3().fill(pc, 0, done);
    }
    caches_.l2.fill(pc, static_cast<std::uint8_t>(idx(t)), done);
  }
  caches_.l1i.fill(pc, static_cast<std::uint8_t>(idx(t)), done);
  return done;
}

void Core::store_commit(ThreadId t, std::uint64_t addr, Cycle now) {
  ++activity_.l1d_accesses;
  caches_.l1d.fill(addr, static_cast<std::uint8_t>(idx(t)), now);
  memory_.write_through(addr, &caches_, now);
}

Cycle Core::flush() {
  for (auto t : kAllThreads) {
    auto& ts = threads_[idx(t)];
    std::deque<MicroOp> replay;
    for (auto& e : ts.rob) replay.push_back(std::move(e.op));
    for (auto& f : ts.fetch_buffer) replay.push_back(std::move(f.op));
    for (auto& r : ts.replay) replay.push_back(std::move(r));
    activity_.flushed_ops += ts.rob.size() + ts.fetch_buffer.size();
    ts.replay = std::move(replay);
    ts.rob.clear();
    ts.fetch_buffer.clear();
    ts.ready = {};
    ++ts.epoch;
    ts.blocked_branch.reset();
    ts.last_fetch_line = ~0ull;
    ts.fetch_resume = now_ + config_.flush_refill_penalty;
    for (auto k : kQueueKinds) queue(k).reset_usage(t);
  }
  return config_.flush_refill_penalty;
}

Cycle Core::drain() {
  const Cycle start = now_;
  fetch_gated_ = true;
  for (auto& ts : threads_) {
    while (!ts.fetch_buffer.empty()) {
      ts.replay.push_front(std::move(ts.fetch_buffer.back().op));
      ts.fetch_buffer.pop_back();
    }
    ts.blocked_branch.reset();
  }
  // Every ROB op is dispatched and will complete; the guard only catches
  // ops that can never issue (e.g. FP work on a core without FP units).
  constexpr Cycle kGuard = 10'000'000;
  while (!threads_[0].rob.empty() || !threads_[1].rob.empty()) {
    if (now_ - start > kGuard) {
      fetch_gated_ = false;
      throw StallAbort("drain did not complete: in-flight ops can never issue");
    }
    step();
  }
  fetch_gated_ = false;
  return now_ - start;
}

std::vector<std::string> Core::audit() const {
  std::vector<std::string> out;
  for (auto t : kAllThreads) {
    const auto& ts = threads_[idx(t)];
    std::array<std::uint32_t, kStructureKinds> count{};
    for (const auto& e : ts.rob) {
      ++count[idx(StructureKind::ROB)];
      if (!e.issued) ++count[idx(StructureKind::IQ)];
      if (e.op.op_class == OpClass::Load) ++count[idx(StructureKind::LQ)];
      if (e.op.op_class == OpClass::Store) ++count[idx(StructureKind::SQ)];
      if (auto rk = reg_kind(e.reg)) ++count[idx(*rk)];
    }
    for (auto k : kQueueKinds) {
      const auto u = queue(k).usage(t);
      if (u != count[idx(k)]) {
        out.push_back(std::string(to_string(t)) + " " + std::string(to_string(k)) + ": usage register " +
                      std::to_string(u) + " but " + std::to_string(count[idx(k)]) + " live entries");
      }
    }
    for (auto k : kAllStructures) {
      if (usage(k, t) > limit(k, t)) {
        out.push_back(std::string(to_string(t)) + " " + std::string(to_string(k)) + ": usage " +
                      std::to_string(usage(k, t)) + " exceeds limit " + std::to_string(limit(k, t)));
      }
    }
  }
  for (auto k : kAllStructures) {
    const std::uint64_t sum = static_cast<std::uint64_t>(limit(k, ThreadId::Sdt)) + limit(k, ThreadId::Main);
    if (sum > capacity(k)) {
      out.push_back(std::string(to_string(k)) + ": limits sum " + std::to_string(sum) + " above capacity");
    }
    if (static_cast<std::uint64_t>(usage(k, ThreadId::Sdt)) + usage(k, ThreadId::Main) > capacity(k)) {
      out.push_back(std::string(to_string(k)) + ": usage sum above capacity");
    }
  }
  return out;
}

void Core::warm_functional(Cycle cycles) {
  for (Cycle c = 0; c < cycles; ++c) {
    if (pre_cycle_) pre_cycle_(now_);
    for (auto t : kAllThreads) {
      auto& ts = threads_[idx(t)];
      std::optional<MicroOp> op;
      if (!ts.replay.empty()) {
        op = std::move(ts.replay.front());
        ts.replay.pop_front();
      } else if (ts.ctx.workload) {
        op = ts.ctx.workload->next(now_);
      }
      if (!op) continue;
      if (op->index != ts.commit_index) throw ConfigError("op stream out of order during warm-up");
      instruction_fetch(t, op->pc, now_);
      if (op->op_class == OpClass::Branch && !btb_.lookup(t, op->pc)) btb_.insert(t, op->pc);
      if (op->op_class == OpClass::Load && op->mem_addr) load_latency(t, *op->mem_addr, now_, false);
      if (op->op_class == OpClass::Store && op->mem_addr) store_commit(t, *op->mem_addr, now_);
      if (ts.ctx.workload) ts.ctx.workload->on_commit(*op, now_);
      ++ts.commit_index;
    }
    ++now_;
  }
  reset_stats();
}

void Core::reset_stats() {
  activity_ = {};
  occupancy_ = {};
  for (auto& ts : threads_) ts.committed = 0;
}

}  // namespace sdt
