#include "sdt/workload.hpp"

#include <cmath>
#include <stdexcept>

namespace sdt {

std::string_view to_string(Intensity i) {
  switch (i) {
    case Intensity::Low: return "low";
    case Intensity::Medium: return "medium";
    case Intensity::High: return "high";
  }
  return "?";
}

std::optional<Intensity> intensity_from_string(std::string_view name) {
  for (auto i : {Intensity::Low, Intensity::Medium, Intensity::High}) {
    if (to_string(i) == name) return i;
  }
  return std::nullopt;
}

IntensityPreset intensity_preset(Intensity label, double clock_ghz) {
  double gbps = 0.0;
  switch (label) {
    case Intensity::Low: gbps = 9.0; break;
    case Intensity::Medium: gbps = 4.0; break;
    case Intensity::High: gbps = 0.5; break;
  }
  return {label, gbps, clock_ghz * 1e9 * 8.0 / (gbps * 1e9)};
}

// ---------------------------------------------------------------------------

ArrivalProcess::ArrivalProcess(double rate_gbps, std::uint32_t pkt_bytes, double clock_ghz, std::uint64_t seed)
    : rng_(mix64(seed, 0xa441)) {
  if (rate_gbps < 0.0 || std::isnan(rate_gbps)) throw std::invalid_argument("arrival rate must be >= 0");
  if (pkt_bytes == 0) throw std::invalid_argument("packet size must be >= 1 byte");
  back_to_back_ = std::isinf(rate_gbps);
  active_ = rate_gbps > 0.0;
  if (back_to_back_) {
    mean_ = 1.0;
  } else if (!active_) {
    mean_ = std::numeric_limits<double>::infinity();
  } else {
    const double pps = rate_gbps * 1e9 / 8.0 / pkt_bytes;
    mean_ = clock_ghz * 1e9 / pps;
  }
  if (active_) advance();
}

void ArrivalProcess::advance() {
  if (back_to_back_) {
    next_time_ += 1.0;
  } else {
    next_time_ += mean_ * rng_.uniform(0.9, 1.1);
  }
  next_cycle_ = static_cast<Cycle>(next_time_);
}

void ArrivalProcess::pop() {
  if (active_) advance();
}

std::vector<Cycle> nic_arrivals(double rate_gbps, std::uint32_t pkt_bytes, Cycle duration, std::uint64_t seed,
                                double clock_ghz) {
  ArrivalProcess p(rate_gbps, pkt_bytes, clock_ghz, seed);
  std::vector<Cycle> out;
  while (p.active() && p.peek() < duration) {
    out.push_back(p.peek());
    p.pop();
  }
  return out;
}

// ---------------------------------------------------------------------------

DescriptorRing::DescriptorRing(std::uint32_t slots) : slots_(slots), packet_(slots, 0) {
  if (slots == 0) throw std::invalid_argument("descriptor ring needs at least one slot");
}

std::optional<std::uint32_t> DescriptorRing::produce(std::uint64_t packet_id) {
  if (full()) {
    ++drops_;
    return std::nullopt;
  }
  const auto slot = static_cast<std::uint32_t>(tail_ % slots_);
  packet_[slot] = packet_id;
  ++tail_;
  return slot;
}

std::optional<DescriptorRing::Claim> DescriptorRing::claim() {
  if (!claimable()) return std::nullopt;
  const auto slot = static_cast<std::uint32_t>(claimed_ % slots_);
  ++claimed_;
  return Claim{slot, packet_[slot]};
}

void DescriptorRing::release() {
  if (head_ >= claimed_) throw std::logic_error("descriptor release without claim");
  ++head_;
}

PayloadRing::PayloadRing(std::uint32_t slots) : slots_(slots) {
  if (slots == 0) throw std::invalid_argument("payload ring needs at least one slot");
}

void PayloadRing::publish(std::uint64_t packet_id) {
  visible_.push_back(packet_id);
  ++published_;
}

std::optional<std::uint64_t> PayloadRing::claim() {
  if (visible_.empty()) return std::nullopt;
  const auto id = visible_.front();
  visible_.pop_front();
  ++claimed_;
  return id;
}

std::uint64_t PacketLedger::admit(Cycle arrival, std::uint32_t size, std::uint32_t slot) {
  ++injected_;
  PacketRecord r;
  r.arrival_cycle = arrival;
  r.size = size;
  r.slot = slot;
  records_.push_back(r);
  return records_.size() - 1;
}

void PacketLedger::mark_delivered(std::uint64_t id, Cycle at) {
  auto& r = records_.at(id);
  if (r.delivered) throw std::logic_error("packet delivered twice");
  r.delivered = true;
  r.delivery_done_cycle = at;
  ++delivered_;
  delivered_bytes_ += r.size;
}

void PacketLedger::mark_processed(std::uint64_t id, Cycle at) {
  auto& r = records_.at(id);
  if (r.processed) throw std::logic_error("packet processed twice");
  r.processed = true;
  r.processing_done_cycle = at;
  ++processed_;
  processed_bytes_ += r.size;
}

NicPort::NicPort(ArrivalProcess arrivals, std::uint32_t pkt_bytes, DescriptorRing& ring, PacketLedger& ledger,
                 MemorySystem& memory, const AddressMap& map, Cycle origin)
    : origin_(origin),
      arrivals_(std::move(arrivals)), pkt_bytes_(pkt_bytes), ring_(ring), ledger_(ledger), memory_(memory), map_(map) {}

void NicPort::tick(Cycle now) {
  while (arrivals_.active() && origin_ + arrivals_.peek() <= now) {
    const Cycle at = origin_ + arrivals_.peek();
    arrivals_.pop();
    if (ring_.full()) {
      ring_.produce(0);
      ledger_.drop();
      continue;
    }
    const std::uint64_t id = ledger_.size();
    const auto slot = *ring_.produce(id);
    ledger_.admit(at, pkt_bytes_, slot);
    memory_.dma_write(map_.packet_data(slot), pkt_bytes_, now);
    memory_.dma_write(map_.descriptor(slot), AddressMap::kDescriptorBytes, now);
  }
}

// ---------------------------------------------------------------------------

DeliveryThread::DeliveryThread(const DeliveryParams& params, const AddressMap& map, DescriptorRing& rx,
                               PayloadRing* payload, PacketLedger& ledger)
    : params_(params), map_(map), rx_(rx), payload_(payload), ledger_(ledger) {
  if (params_.ops_per_packet < kDeliveryFixedOps + 2) {
    throw std::invalid_argument("delivery_ops_per_packet must be at least " + std::to_string(kDeliveryFixedOps + 2));
  }
}

bool DeliveryThread::mispredict(std::uint64_t index) const {
  return to_unit(mix64(params_.seed, index)) >= params_.branch_accuracy;
}

MicroOp DeliveryThread::make(OpClass c, std::optional<std::uint8_t> dest, std::initializer_list<std::uint8_t> srcs,
                             std::uint32_t template_pos) {
  MicroOp op;
  op.index = next_index_++;
  op.op_class = c;
  op.pc = map_.delivery_code + 4ull * template_pos;
  for (auto s : srcs) {
    if (last_writer_[s]) op.add_dep(*last_writer_[s]);
  }
  if (dest) last_writer_[*dest] = op.index;
  if (c == OpClass::Branch) op.mispredicted = mispredict(op.index);
  return op;
}

std::vector<MicroOp> DeliveryThread::packet_ops(std::uint32_t slot, std::uint64_t packet_id) {
  const std::uint32_t n = params_.ops_per_packet;
  const auto chain = std::max<std::uint32_t>(
      2, std::min<std::uint32_t>(n - kDeliveryFixedOps,
                                 static_cast<std::uint32_t>(std::lround(params_.chain_fraction * n))));
  const std::uint32_t filler = n - kDeliveryFixedOps - chain;
  const std::uint32_t ahead = (slot + params_.prefetch_distance) % rx_.slots();
  const std::uint64_t ring_pos = packets_++;

  std::vector<MicroOp> ops;
  ops.reserve(n);
  std::uint32_t pos = 0;
  auto load = [&](std::optional<std::uint8_t> dest, std::initializer_list<std::uint8_t> srcs, std::uint64_t addr,
                  std::uint32_t bytes, bool prefetch = false) {
    auto op = make(OpClass::Load, dest, srcs, pos++);
    op.mem_addr = addr;
    op.mem_bytes = bytes;
    op.is_prefetch = prefetch;
    ops.push_back(op);
  };
  auto store = [&](std::initializer_list<std::uint8_t> srcs, std::uint64_t addr, std::uint32_t bytes) -> MicroOp& {
    auto op = make(OpClass::Store, std::nullopt, srcs, pos++);
    op.mem_addr = addr;
    op.mem_bytes = bytes;
    ops.push_back(op);
    return ops.back();
  };
  auto alu = [&](std::uint8_t dest, std::initializer_list<std::uint8_t> srcs) {
    ops.push_back(make(OpClass::IntAlu, dest, srcs, pos++));
  };
  auto branch = [&](std::initializer_list<std::uint8_t> srcs) {
    ops.push_back(make(OpClass::Branch, std::nullopt, srcs, pos++));
  };

  // Receive: descriptor, readiness check, buffer pointer, prefetch ahead.
  load(Desc, {Head}, map_.descriptor(slot), AddressMap::kDescriptorBytes);
  alu(Tmp, {Desc});
  branch({Tmp});
  alu(Mbuf, {Desc});
  load(std::nullopt, {Head}, map_.mbuf(ahead), kLineBytes, true);
  load(std::nullopt, {Head}, map_.packet_data(ahead), kLineBytes, true);
  load(std::nullopt, {Head}, map_.descriptor(ahead), kLineBytes, true);
  load(Meta, {Mbuf}, map_.mbuf(slot), kLineBytes);
  load(Hdr, {Mbuf}, map_.packet_data(slot), kLineBytes);

  // Header rewrite (decap + MAC swap), carried across packets through Acc.
  // Counter updates are spread through it.
  std::uint32_t stats = 0;
  auto counters_upto = [&](std::uint32_t i) {
    const std::uint32_t due = static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) * filler / chain);
    for (; stats < due; ++stats) {
      const auto r = static_cast<std::uint8_t>(kRegs + stats % kStatRegs);
      alu(r, {r});
    }
  };
  alu(Chain, {Acc, Meta});
  for (std::uint32_t i = 1; i + 1 < chain; ++i) {
    counters_upto(i);
    if (i == chain / 2) {
      alu(Chain, {Chain, Hdr});
    } else {
      alu(Chain, {Chain});
    }
  }
  counters_upto(chain);
  alu(Acc, {Chain});
  store({Mbuf, Acc}, map_.packet_data(slot), kLineBytes);

  // Publish the buffer pointer, then the producer index.
  alu(Tmp2, {Tail});
  const std::uint64_t entry = map_.ring_entry(payload_ ? ring_pos % payload_->slots() : 0);
  auto& publish = store({Tmp2, Mbuf}, entry, 8);
  publish.event = PacketEvent::Delivered;
  publish.packet_id = packet_id;
  alu(Tail, {Tail});
  store({Tail}, map_.ring_indices, 8);

  // Refill the descriptor from the mempool cache and hand it back.
  load(PoolPtr, {Pool}, map_.mempool_cache, 8);
  alu(Pool, {Pool});
  auto& refill = store({PoolPtr, Head}, map_.descriptor(slot), AddressMap::kDescriptorBytes);
  refill.event = PacketEvent::DescriptorReleased;
  refill.packet_id = packet_id;
  alu(Head, {Head});
  branch({Head});

  return ops;
}

std::vector<MicroOp> DeliveryThread::poll_ops(bool waiting_on_consumer) {
  constexpr std::uint32_t kPollPos = 512;
  std::vector<MicroOp> ops;
  const std::uint64_t addr =
      waiting_on_consumer ? map_.ring_indices + kLineBytes : map_.descriptor(rx_.head() % rx_.slots());
  auto ld = make(OpClass::Load, Tmp, {Head}, kPollPos);
  ld.mem_addr = addr;
  ld.mem_bytes = 8;
  ld.is_spin_poll = true;
  ops.push_back(ld);
  auto br = make(OpClass::Branch, std::nullopt, {Tmp}, kPollPos + 1);
  br.mispredicted = false;
  br.is_spin_poll = true;
  ops.push_back(br);
  spin_ops_ += 2;
  return ops;
}

std::optional<MicroOp> DeliveryThread::next(Cycle) {
  if (pending_.empty()) {
    const bool consumer_full = payload_ && !payload_->can_reserve();
    if (!consumer_full && rx_.claimable()) {
      const auto claim = *rx_.claim();
      if (payload_) payload_->reserve();
      auto ops = packet_ops(claim.slot, claim.packet_id);
      pending_.assign(ops.begin(), ops.end());
    } else {
      auto ops = poll_ops(consumer_full);
      pending_.assign(ops.begin(), ops.end());
    }
  }
  MicroOp op = pending_.front();
  pending_.pop_front();
  return op;
}

void DeliveryThread::on_commit(const MicroOp& op, Cycle now) {
  switch (op.event) {
    case PacketEvent::DescriptorReleased: rx_.release(); break;
    case PacketEvent::Delivered:
      ledger_.mark_delivered(op.packet_id, now);
      if (payload_) {
        payload_->publish(op.packet_id);
      } else {
        ledger_.mark_processed(op.packet_id, now);
      }
      break;
    default: break;
  }
}

// ---------------------------------------------------------------------------

ProcessingThread::ProcessingThread(const ProcessingParams& params, const AddressMap& map, PayloadRing& payload,
                                   PacketLedger& ledger)
    : params_(params), map_(map), payload_(payload), ledger_(ledger) {
  if (params_.ilp == 0) throw std::invalid_argument("processing ilp must be >= 1");
  if (params_.chain_length == 0) throw std::invalid_argument("processing chain length must be >= 1");
  last_writer_.resize(kFixedRegs + params_.ilp);
}

bool ProcessingThread::mispredict(std::uint64_t index) const {
  return to_unit(mix64(params_.seed, index)) >= params_.branch_accuracy;
}

std::uint64_t ProcessingThread::work_ops(std::uint32_t size) const {
  return static_cast<std::uint64_t>(std::llround(work_cycles(size, params_.cycles_per_byte) * params_.ilp));
}

MicroOp ProcessingThread::make(OpClass c, std::optional<std::uint8_t> dest, std::initializer_list<std::uint8_t> srcs,
                               std::uint32_t template_pos) {
  MicroOp op;
  op.index = next_index_++;
  op.op_class = c;
  op.pc = map_.processing_code + 4ull * template_pos;
  for (auto s : srcs) {
    if (last_writer_[s]) op.add_dep(*last_writer_[s]);
  }
  if (dest) last_writer_[*dest] = op.index;
  if (c == OpClass::Branch) op.mispredicted = mispredict(op.index);
  return op;
}

std::vector<MicroOp> ProcessingThread::packet_ops(std::uint64_t packet_id, std::uint32_t size) {
  std::vector<MicroOp> ops;
  const auto& rec = ledger_[packet_id];

  auto deq = make(OpClass::Load, Ptr, {RingHead}, 0);
  deq.mem_addr = map_.ring_entry(payload_.claimed() % payload_.slots());
  deq.mem_bytes = 8;
  ops.push_back(deq);
  ops.push_back(make(OpClass::IntAlu, RingHead, {RingHead}, 1));
  auto head = make(OpClass::Store, std::nullopt, {RingHead}, 2);
  head.mem_addr = map_.ring_indices + kLineBytes;
  head.mem_bytes = 8;
  head.event = PacketEvent::Dequeued;
  head.packet_id = packet_id;

  if (size == 0) {
    ops[1].event = PacketEvent::Processed;
    ops[1].packet_id = packet_id;
    ops.push_back(head);
    return ops;
  }
  ops.push_back(head);

  // Payload reads.
  const std::uint64_t lines = lines_spanned(map_.packet_data(rec.slot), size);
  std::vector<std::uint64_t> payload_loads;
  for (std::uint64_t i = 0; i < lines; ++i) {
    auto ld = make(OpClass::Load, Tmp, {Ptr}, static_cast<std::uint32_t>(3 + i % 8));
    ld.mem_addr = map_.packet_data(rec.slot) + i * kLineBytes;
    ld.mem_bytes = kLineBytes;
    payload_loads.push_back(ld.index);
    ops.push_back(ld);
  }
  if (params_.app_state_bytes >= kLineBytes) {
    const std::uint64_t lines_ws = params_.app_state_bytes / kLineBytes;
    auto ld = make(OpClass::Load, AppVal, {Ptr}, 11);
    ld.mem_addr = map_.app_state + (mix64(params_.seed ^ 0x5eed, packet_id) % lines_ws) * kLineBytes;
    ld.mem_bytes = 8;
    ops.push_back(ld);
  }

  // Work: `ilp` strands, each a sequence of dependent chains.
  const std::uint64_t work = work_ops(size);
  const std::uint32_t ilp = params_.ilp;
  const std::uint32_t len = params_.chain_length;
  constexpr std::uint32_t kLoopBody = 64;
  std::uint64_t chains_started = 0;
  for (std::uint64_t j = 0; j < work; ++j) {
    const auto pos = static_cast<std::uint32_t>(16 + j % kLoopBody);
    const auto strand = static_cast<std::uint8_t>(kFixedRegs + (j / len) % ilp);
    if (params_.branch_every > 0 && (j + 1) % params_.branch_every == 0) {
      ops.push_back(make(OpClass::Branch, std::nullopt, {strand}, pos));
      continue;
    }
    auto op = make(OpClass::IntAlu, strand, {strand}, pos);
    if (j % len == 0 && chains_started < payload_loads.size()) {
      op.add_dep(payload_loads[chains_started]);
    }
    if (j % len == 0) ++chains_started;
    ops.push_back(op);
  }

  // Reduce strands and record the result.
  for (std::uint32_t s = 1; s < ilp; ++s) {
    ops.push_back(make(OpClass::IntAlu, static_cast<std::uint8_t>(kFixedRegs),
                       {static_cast<std::uint8_t>(kFixedRegs), static_cast<std::uint8_t>(kFixedRegs + s)}, 12));
  }
  auto done = make(OpClass::IntAlu, Tmp, {static_cast<std::uint8_t>(kFixedRegs), AppVal}, 13);
  done.event = PacketEvent::Processed;
  done.packet_id = packet_id;
  ops.push_back(done);
  return ops;
}

std::vector<MicroOp> ProcessingThread::poll_ops() {
  std::vector<MicroOp> ops;
  auto ld = make(OpClass::Load, Tmp, {RingHead}, 96);
  ld.mem_addr = map_.ring_indices;
  ld.mem_bytes = 8;
  ld.is_spin_poll = true;
  ops.push_back(ld);
  auto br = make(OpClass::Branch, std::nullopt, {Tmp}, 97);
  br.mispredicted = false;
  br.is_spin_poll = true;
  ops.push_back(br);
  return ops;
}

std::optional<MicroOp> ProcessingThread::next(Cycle) {
  if (pending_.empty()) {
    if (auto id = payload_.claim()) {
      auto ops = packet_ops(*id, ledger_[*id].size);
      pending_.assign(ops.begin(), ops.end());
    } else {
      auto ops = poll_ops();
      pending_.assign(ops.begin(), ops.end());
    }
  }
  MicroOp op = pending_.front();
  pending_.pop_front();
  return op;
}

void ProcessingThread::on_commit(const MicroOp& op, Cycle now) {
  switch (op.event) {
    case PacketEvent::Dequeued: payload_.release(); break;
    case PacketEvent::Processed: ledger_.mark_processed(op.packet_id, now); break;
    default: break;
  }
}

}  // namespace sdt
