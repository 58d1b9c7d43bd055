#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "sdt/workload.hpp"

using namespace sdt;

TEST_SUITE("workload") {
  TEST_CASE("intensity presets: cycles per byte from the per-core load") {
    CHECK(intensity_preset(Intensity::Low).target_gbps == 9.0);
    CHECK(intensity_preset(Intensity::Medium).target_gbps == 4.0);
    CHECK(intensity_preset(Intensity::High).target_gbps == 0.5);
    CHECK(intensity_preset(Intensity::High).cycles_per_byte == doctest::Approx(48.0));
    CHECK(intensity_preset(Intensity::Medium).cycles_per_byte == doctest::Approx(6.0));
    CHECK(intensity_preset(Intensity::Low).cycles_per_byte == doctest::Approx(8.0 / 3.0));
    CHECK(ProcessingThread::work_cycles(64, 48.0) == doctest::Approx(3072.0));
    CHECK(ProcessingThread::work_cycles(64, 6.0) == doctest::Approx(384.0));
  }

  TEST_CASE("arrival gaps: clock / packet rate") {
    CHECK(ArrivalProcess(9.0, 64, 3.0, 1).mean_interarrival() == doctest::Approx(3e9 / (9e9 / 8 / 64)));
    CHECK(ArrivalProcess(9.0, 64, 3.0, 1).mean_interarrival() == doctest::Approx(170.67).epsilon(1e-3));
    CHECK(ArrivalProcess(0.5, 64, 3.0, 1).mean_interarrival() == doctest::Approx(3072.0));
    CHECK(nic_arrivals(0.0, 64, 1'000'000, 1).empty());

    const auto a = nic_arrivals(9.0, 64, 3'000'000, 7);
    // 3 M cycles / 170.67 = 17578 arrivals. Uniform +-10 % jitter gives the
    // sum of n gaps a deviation of sqrt(n) * 170.67 * 0.2 / sqrt(12), about
    // 8 packets; allow 5 sigma.
    CHECK(std::abs(static_cast<double>(a.size()) - 17578.0) <= 40.0);
    CHECK(std::is_sorted(a.begin(), a.end()));
    for (std::size_t i = 1; i < a.size(); ++i) {
      const double gap = static_cast<double>(a[i] - a[i - 1]);
      CHECK(gap >= 0.9 * 170.67 - 1);
      CHECK(gap <= 1.1 * 170.67 + 1);
    }
    CHECK(a == nic_arrivals(9.0, 64, 3'000'000, 7));
    CHECK(a != nic_arrivals(9.0, 64, 3'000'000, 8));

    const auto b2b = nic_arrivals(kMaxRate, 64, 100, 1);
    CHECK(b2b.size() == 99);
  }

  TEST_CASE("bad arrival parameters are rejected") {
    CHECK_THROWS(ArrivalProcess(-1.0, 64, 3.0, 1));
    CHECK_THROWS(ArrivalProcess(1.0, 0, 3.0, 1));
  }

  TEST_CASE("descriptor ring drops when full and recycles slots") {
    DescriptorRing ring(4);
    for (std::uint64_t i = 0; i < 4; ++i) CHECK(ring.produce(i) == i);
    CHECK(ring.full());
    CHECK_FALSE(ring.produce(9).has_value());
    CHECK(ring.drops() == 1);
    auto c = ring.claim();
    REQUIRE(c);
    CHECK(c->slot == 0);
    CHECK(c->packet_id == 0);
    CHECK(ring.full());  // claimed but not released
    ring.release();
    CHECK(ring.produce(10) == 0u);
    CHECK_THROWS(ring.release());
  }

  TEST_CASE("payload ring is FIFO and bounded") {
    PayloadRing r(2);
    r.reserve();
    r.reserve();
    CHECK_FALSE(r.can_reserve());
    r.publish(5);
    r.publish(6);
    CHECK(r.claim() == 5u);
    r.release();
    CHECK(r.can_reserve());
    CHECK(r.claim() == 6u);
    CHECK_FALSE(r.claim().has_value());
  }

  TEST_CASE("ledger conservation") {
    PacketLedger l;
    const auto a = l.admit(10, 64, 0);
    const auto b = l.admit(20, 64, 1);
    l.drop();
    CHECK(l.injected() == 3);
    CHECK(l.injected() == l.processed() + l.dropped() + l.in_flight());
    l.mark_delivered(a, 30);
    l.mark_processed(a, 50);
    CHECK(l.injected() == l.processed() + l.dropped() + l.in_flight());
    CHECK(l.in_flight() == 1);
    CHECK(l[a].processing_done_cycle == 50);
    CHECK_FALSE(l[b].processed);
  }

  TEST_CASE("delivery template: no FP or vector work, fixed length, same shape per packet") {
    DescriptorRing rx(64);
    PayloadRing payload(64);
    PacketLedger ledger;
    DeliveryParams p;
    DeliveryThread d(p, AddressMap{}, rx, &payload, ledger);
    const auto first = d.packet_ops(0, 0);
    const auto a = d.packet_ops(1, 1);
    const auto b = d.packet_ops(2, 2);
    CHECK(first.size() == p.ops_per_packet);
    REQUIRE(a.size() == b.size());
    for (const auto& op : a) {
      CHECK(op.op_class != OpClass::FpAlu);
      CHECK(op.op_class != OpClass::VecAlu);
    }
    auto rel = [](const MicroOp& op, std::size_t i) { return op.index - op.src_deps[i]; };
    bool only_addresses = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      only_addresses &= a[i].op_class == b[i].op_class && a[i].pc == b[i].pc && a[i].num_deps == b[i].num_deps &&
                        a[i].exec_latency == b[i].exec_latency && a[i].event == b[i].event &&
                        a[i].is_prefetch == b[i].is_prefetch && a[i].mem_bytes == b[i].mem_bytes &&
                        a[i].mem_addr.has_value() == b[i].mem_addr.has_value();
      for (std::size_t k = 0; k < a[i].num_deps && k < b[i].num_deps; ++k) {
        only_addresses &= rel(a[i], k) == rel(b[i], k);
      }
    }
    CHECK(only_addresses);
    CHECK(std::count_if(a.begin(), a.end(), [](const MicroOp& o) { return o.mem_addr.has_value(); }) > 0);
  }

  TEST_CASE("delivery spins on an empty ring") {
    DescriptorRing rx(8);
    PacketLedger ledger;
    DeliveryThread d(DeliveryParams{}, AddressMap{}, rx, nullptr, ledger);
    for (int i = 0; i < 10; ++i) {
      auto op = d.next(static_cast<Cycle>(i));
      REQUIRE(op);
      CHECK(op->is_spin_poll);
      CHECK((op->op_class == OpClass::Load || op->op_class == OpClass::Branch));
    }
    CHECK(d.spin_ops() >= 10);
  }

  TEST_CASE("processing template: work ops from size x cycles/byte x ILP") {
    PayloadRing payload(8);
    PacketLedger ledger;
    ProcessingParams p;
    p.cycles_per_byte = 6.0;
    ProcessingThread t(p, AddressMap{}, payload, ledger);
    CHECK(t.work_ops(64) == 768);
    const auto id = ledger.admit(0, 64, 0);
    const auto ops = t.packet_ops(id, 64);
    const auto alu = std::count_if(ops.begin(), ops.end(), [](const MicroOp& o) {
      return o.op_class == OpClass::IntAlu || o.op_class == OpClass::Branch;
    });
    // Work plus ring-head update, strand reduction and the final op.
    CHECK(alu == 768 + 1 + (p.ilp - 1) + 1);
    CHECK(ops.back().event == PacketEvent::Processed);

    const auto id0 = ledger.admit(0, 0, 1);
    const auto empty = t.packet_ops(id0, 0);
    CHECK(std::none_of(empty.begin(), empty.end(),
                       [](const MicroOp& o) { return o.op_class == OpClass::Branch; }));
    CHECK(empty.size() == 3);
  }
}
