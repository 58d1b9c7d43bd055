#include "doctest.h"
#include "sdt/core.hpp"
#include "sdt/strp.hpp"
#include "support.hpp"

using namespace sdt;
using test::Bench;

namespace {

std::vector<MicroOp> independent(std::size_t n) {
  std::vector<MicroOp> ops;
  for (std::size_t i = 0; i < n; ++i) {
    MicroOp op = test::int_op();
    op.pc = 0x400000 + (i % 16) * 4;
    ops.push_back(op);
  }
  return ops;
}

// Chain of loads to distinct lines of one data page, so every load after the
// first misses everything but the DTLB.
std::vector<MicroOp> missing_loads(std::size_t n) {
  std::vector<MicroOp> ops;
  for (std::size_t i = 0; i < n; ++i) {
    MicroOp op;
    op.op_class = OpClass::Load;
    op.pc = 0x400000 + (i % 16) * 4;
    op.mem_addr = 0x1000'0000ull + i * 4096;
    op.mem_bytes = 8;
    if (i > 0) op.add_dep(i - 1);
    ops.push_back(op);
  }
  return ops;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("idle core commits nothing") {
    Bench b;
    for (int i = 0; i < 100; ++i) {
      const auto& ev = b.core.step();
      CHECK(ev.committed.empty());
    }
    for (auto k : kAllStructures) {
      CHECK(b.core.usage(k, ThreadId::Sdt) == 0);
      if (k != StructureKind::L1dWays && k != StructureKind::L2Ways) CHECK(b.core.usage(k, ThreadId::Main) == 0);
    }
    CHECK(b.core.idle());
  }

  TEST_CASE("independent int ops reach min(width, int units) IPC") {
    Bench b;
    VectorSource src(independent(60'000));
    b.core.bind(ThreadId::Main, &src);
    // Skip the cold instruction fetch, then measure.
    while (src.committed() < 10'000) b.core.step();
    const Cycle t0 = b.core.now();
    const auto c0 = src.committed();
    while (src.committed() < 50'000) b.core.step();
    const double ipc = double(src.committed() - c0) / double(b.core.now() - t0);
    const double bound = std::min(b.config.superscalar_width, b.config.units.int_alu);
    CHECK(ipc == doctest::Approx(bound).epsilon(0.01));
  }

  TEST_CASE("dependent chains pay exactly the op latency per hop") {
    for (std::uint32_t lat : {1u, 3u, 7u}) {
      Bench b1;
      VectorSource s1(test::chain(100, test::int_op(lat)));
      b1.core.bind(ThreadId::Main, &s1);
      const Cycle short_run = b1.run(s1);
      Bench b2;
      VectorSource s2(test::chain(200, test::int_op(lat)));
      b2.core.bind(ThreadId::Main, &s2);
      const Cycle long_run = b2.run(s2);
      CHECK(long_run - short_run == 100 * lat);
    }
  }

  TEST_CASE("memory latencies add up along the hierarchy") {
    const CoreConfig c;
    const Cycle per_miss = c.l1_latency + c.l2_latency + c.l3_latency + c.dram_cycles();
    CHECK(c.dram_cycles() == 300);  // 100 ns at 3 GHz
    Bench b1;
    VectorSource s1(missing_loads(20));
    b1.core.bind(ThreadId::Main, &s1);
    const Cycle a = b1.run(s1);
    Bench b2;
    VectorSource s2(missing_loads(40));
    b2.core.bind(ThreadId::Main, &s2);
    const Cycle z = b2.run(s2);
    CHECK(z - a == 20 * per_miss);
  }

  TEST_CASE("a single missing load commits no earlier than the summed latencies") {
    Bench b;
    VectorSource src(missing_loads(1));
    b.core.bind(ThreadId::Main, &src);
    const CoreConfig c;
    CHECK(b.run(src) >= c.l1_latency + c.l2_latency + c.l3_latency + c.dram_cycles());
  }

  TEST_CASE("flush empties usage and is idempotent") {
    Bench b;
    VectorSource src(test::chain(5000, test::int_op(4)));
    b.core.bind(ThreadId::Main, &src);
    while (b.core.in_flight(ThreadId::Main) < 100) b.core.step();
    CHECK(b.core.flush() == 200);
    for (auto k : {StructureKind::IQ, StructureKind::LQ, StructureKind::SQ, StructureKind::ROB, StructureKind::IntReg}) {
      CHECK(b.core.usage(k, ThreadId::Main) == 0);
    }
    CHECK(b.core.audit().empty());
    const auto next = b.core.next_op_index(ThreadId::Main);
    CHECK(b.core.flush() == 200);
    CHECK(b.core.next_op_index(ThreadId::Main) == next);
    CHECK(b.core.in_flight(ThreadId::Main) == 0);
    b.run(src);
    CHECK(src.committed() == src.size());
    CHECK(b.core.committed(ThreadId::Main) == src.size());
  }

  TEST_CASE("flush on an idle core only stalls fetch") {
    Bench b;
    CHECK(b.core.flush() == 200);
    CHECK(b.core.idle());
  }

  TEST_CASE("drain waits for in-flight work and discards nothing") {
    Bench idle;
    CHECK(idle.core.drain() == 0);

    Bench b;
    VectorSource src(missing_loads(3));
    b.core.bind(ThreadId::Main, &src);
    // Let the first load get past the cold code fetch and issue.
    while (b.core.usage(StructureKind::ROB, ThreadId::Main) == 0) b.core.step();
    b.core.step();
    const Cycle penalty = b.core.drain();
    CHECK(penalty >= b.config.dram_cycles());
    CHECK(penalty > b.config.flush_refill_penalty);
    CHECK(b.core.in_flight(ThreadId::Main) == 0);
    CHECK(b.core.activity().flushed_ops == 0);
  }

  TEST_CASE("zero-limit structure stalls forever and is flagged") {
    CoreConfig c;
    MemorySystem mem(c, 1);
    Core core(c, mem);
    auto s = preset_scheme(c, PresetLabel::Baseline);
    s[StructureKind::FpReg] = {0, 256};
    core.set_scheme(s);
    MicroOp fp;
    fp.op_class = OpClass::FpAlu;
    fp.pc = 0x400000;
    VectorSource src(std::vector<MicroOp>(4, fp));
    core.bind(ThreadId::Sdt, &src);
    while (!core.zero_limit_stall() && core.now() < Core::kZeroLimitWarnCycles + 1000) core.step();
    CHECK(src.committed() == 0);
    REQUIRE(core.zero_limit_stall().has_value());
    CHECK(*core.zero_limit_stall() == StructureKind::FpReg);
  }

  TEST_CASE("dangling dependencies are rejected") {
    Bench b;
    auto ops = test::chain(4, test::int_op());
    ops[2].src_deps[0] = 3;
    VectorSource src(ops);
    b.core.bind(ThreadId::Main, &src);
    CHECK_THROWS_AS(b.run(src), ConfigError);
  }

  TEST_CASE("fetch width follows the ROB split") {
    CoreConfig c;
    MemorySystem mem(c, 1);
    Core core(c, mem);
    core.set_scheme(preset_scheme(c, PresetLabel::Baseline));
    VectorSource a(independent(40'000));
    VectorSource z(independent(40'000));
    core.bind(ThreadId::Sdt, &a);
    core.bind(ThreadId::Main, &z);
    for (int i = 0; i < 5000; ++i) core.step();
    CHECK(a.committed() == doctest::Approx(double(z.committed())).epsilon(0.01));
  }

  TEST_CASE("isolation: thread A's commits ignore thread B's stream") {
    // Memory latencies equal to L1 so the shared L3 cannot separate them;
    // B uses only FP units, A only int units.
    CoreConfig c;
    c.l2_latency = 0;
    c.l3_latency = 0;
    c.dram_latency_ns = 0;
    auto trace = [&](bool with_b) {
      MemorySystem mem(c, 1);
      Core core(c, mem);
      core.set_scheme(preset_scheme(c, PresetLabel::LowIntensity));
      VectorSource a(test::chain(3000, test::int_op(2)));
      std::vector<MicroOp> fp_ops;
      for (int i = 0; i < 3000; ++i) {
        MicroOp op;
        op.op_class = OpClass::FpAlu;
        op.exec_latency = 4;
        op.pc = 0x800000 + (i % 16) * 4;
        fp_ops.push_back(op);
      }
      VectorSource z(fp_ops);
      core.bind(ThreadId::Sdt, &a);
      if (with_b) core.bind(ThreadId::Main, &z);
      std::vector<std::pair<Cycle, std::uint64_t>> out;
      while (a.committed() < a.size()) {
        const auto& ev = core.step();
        for (const auto& op : ev.committed) {
          if (op.thread == ThreadId::Sdt) out.emplace_back(ev.cycle, op.index);
        }
      }
      return out;
    };
    CHECK(trace(false) == trace(true));
  }

  TEST_CASE("identical inputs give identical cycle events") {
    auto events = [] {
      Bench b;
      VectorSource src(missing_loads(50));
      b.core.bind(ThreadId::Main, &src);
      std::vector<CycleEvents> out;
      while (src.committed() < src.size()) out.push_back(b.core.step());
      return out;
    };
    CHECK(events() == events());
  }
}
