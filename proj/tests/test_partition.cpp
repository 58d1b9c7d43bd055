#include <cmath>

#include "doctest.h"
#include "sdt/partition.hpp"
#include "sdt/strp.hpp"
#include "support.hpp"

using namespace sdt;

TEST_SUITE("partition") {
  TEST_CASE("try_allocate grants up to the limit and stalls beyond it") {
    PartitionedStructure rob(StructureKind::ROB, 512);
    rob.set_limits(51, 461);
    CHECK(rob.try_allocate(ThreadId::Sdt, 51) == AllocResult::Granted);
    CHECK(rob.usage(ThreadId::Sdt) == 51);
    CHECK(rob.try_allocate(ThreadId::Sdt, 1) == AllocResult::Stall);
    CHECK(rob.usage(ThreadId::Sdt) == 51);

    PartitionedStructure iq(StructureKind::ROB, 512);
    iq.set_limits(256, 256);
    CHECK(iq.try_allocate(ThreadId::Main, 4) == AllocResult::Granted);
    CHECK(iq.usage(ThreadId::Main) == 4);
    iq.release(ThreadId::Main, 4);
    CHECK(iq.usage(ThreadId::Main) == 0);
  }

  TEST_CASE("zero limit never grants") {
    PartitionedStructure fp(StructureKind::FpReg, 256);
    fp.set_limits(0, 256);
    for (int i = 0; i < 1000; ++i) CHECK(fp.try_allocate(ThreadId::Sdt, 1) == AllocResult::Stall);
  }

  TEST_CASE("limits above capacity are refused") {
    PartitionedStructure rob(StructureKind::ROB, 512);
    CHECK_THROWS(rob.set_limits(300, 300));
  }

  TEST_CASE("preset limits are floor(capacity x share) with the remainder to MAIN") {
    const CoreConfig beefy;
    CHECK(preset_scheme(beefy, PresetLabel::HighIntensity)[StructureKind::ROB] == ThreadLimits{51, 461});
    CHECK(preset_scheme(beefy, PresetLabel::Baseline)[StructureKind::IQ] == ThreadLimits{97, 97});
    CHECK(preset_scheme(beefy, PresetLabel::LowIntensity)[StructureKind::IntReg] == ThreadLimits{179, 269});

    // Hand-computed ROB column for 10/20/40/50 %.
    CHECK(preset_scheme(beefy, PresetLabel::HighIntensity)[StructureKind::ROB].sdt == 51);
    CHECK(preset_scheme(beefy, PresetLabel::MediumIntensity)[StructureKind::ROB].sdt == 102);
    CHECK(preset_scheme(beefy, PresetLabel::LowIntensity)[StructureKind::ROB].sdt == 204);
    CHECK(preset_scheme(beefy, PresetLabel::Baseline)[StructureKind::ROB].sdt == 256);

    for (auto label : {PresetLabel::Baseline, PresetLabel::HighIntensity, PresetLabel::MediumIntensity,
                       PresetLabel::LowIntensity}) {
      const double share = sdt_share(label);
      const auto s = preset_scheme(beefy, label);
      for (auto k : kAllStructures) {
        const auto cap = capacity_of(beefy, k);
        auto expect = static_cast<std::int64_t>(std::floor(cap * share));
        if (expect == 0 && delivery_uses(k)) expect = 1;
        CHECK(s[k].sdt == expect);
        if (label == PresetLabel::Baseline) {
          CHECK(s[k].main == static_cast<std::int64_t>(std::floor(cap * 0.5)));
        } else {
          CHECK(s[k].main == cap - expect);
        }
      }
      CHECK(validate(s, beefy).empty());
    }
  }

  TEST_CASE("minimum one entry only where delivery needs it") {
    auto mini = minimalist_config();
    const auto s = preset_scheme(mini, PresetLabel::HighIntensity);
    // 10 % of 3 iTLB entries floors to 0; delivery fetches code, so 1.
    CHECK(s[StructureKind::ITLB].sdt == 1);
    CHECK(s[StructureKind::FpReg].sdt == 0);
  }

  TEST_CASE("validate reports oversubscription and negatives") {
    const CoreConfig beefy;
    auto s = preset_scheme(beefy, PresetLabel::Baseline);
    CHECK(validate(s, beefy).empty());
    s[StructureKind::ROB] = {300, 300};
    auto v = validate(s, beefy);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == StructureKind::ROB);

    auto f = preset_scheme(beefy, PresetLabel::Baseline);
    f[StructureKind::FpReg] = {0, 256};
    CHECK(validate(f, beefy).empty());
    f[StructureKind::IQ] = {-1, 10};
    CHECK(validate(f, beefy).size() == 1);
  }

  TEST_CASE("apply_strp flush: penalty 200 and emptied partitions") {
    test::Bench b;
    b.core.set_scheme(preset_scheme(b.config, PresetLabel::Baseline));
    VectorSource src(test::chain(2000, test::int_op(3)));
    b.core.bind(ThreadId::Sdt, &src);
    for (int i = 0; i < 600; ++i) b.core.step();
    REQUIRE(b.core.usage(StructureKind::ROB, ThreadId::Sdt) > 0);

    const auto r = apply_strp(b.core, preset_scheme(b.config, PresetLabel::HighIntensity), RepartitionMode::Flush);
    CHECK(r.penalty == 200);
    CHECK(r.old_label == PresetLabel::Baseline);
    CHECK(r.new_label == PresetLabel::HighIntensity);
    CHECK(b.core.limit(StructureKind::ROB, ThreadId::Sdt) == 51);
    CHECK(b.core.usage(StructureKind::ROB, ThreadId::Sdt) == 0);
    CHECK(b.core.audit().empty());
    // Safety holds on the very next cycle and the stream still completes.
    b.core.step();
    CHECK(b.core.audit().empty());
    b.run(src);
    CHECK(src.committed() == src.size());
  }

  TEST_CASE("apply_strp with the current scheme still pays the refill") {
    test::Bench b;
    const auto s = preset_scheme(b.config, PresetLabel::MediumIntensity);
    b.core.set_scheme(s);
    const auto r = apply_strp(b.core, s, RepartitionMode::Flush);
    CHECK(r.penalty == 200);
    CHECK(b.core.scheme() == s);
  }

  TEST_CASE("apply_strp drain on an idle core costs nothing") {
    test::Bench b;
    b.core.set_scheme(preset_scheme(b.config, PresetLabel::Baseline));
    const auto r = apply_strp(b.core, preset_scheme(b.config, PresetLabel::LowIntensity), RepartitionMode::Drain);
    CHECK(r.penalty == 0);
    CHECK(b.core.limit(StructureKind::IntReg, ThreadId::Sdt) == 179);
  }

  TEST_CASE("invalid scheme is rejected and the core is untouched") {
    test::Bench b;
    const auto before = preset_scheme(b.config, PresetLabel::Baseline);
    b.core.set_scheme(before);
    VectorSource src(test::chain(500, test::int_op(2)));
    b.core.bind(ThreadId::Main, &src);
    for (int i = 0; i < 450; ++i) b.core.step();
    const auto in_flight = b.core.in_flight(ThreadId::Main);
    auto bad = before;
    bad[StructureKind::ROB] = {300, 300};
    CHECK_THROWS_AS(apply_strp(b.core, bad, RepartitionMode::Flush), InvalidScheme);
    CHECK(b.core.scheme() == before);
    CHECK(b.core.in_flight(ThreadId::Main) == in_flight);
  }

  TEST_CASE("per-structure STRP changes one structure only") {
    test::Bench b;
    b.core.set_scheme(preset_scheme(b.config, PresetLabel::Baseline));
    apply_strp(b.core, StructureKind::ROB, ThreadLimits{100, 400}, RepartitionMode::Flush);
    CHECK(b.core.limit(StructureKind::ROB, ThreadId::Sdt) == 100);
    CHECK(b.core.limit(StructureKind::IQ, ThreadId::Sdt) == 97);
    CHECK(b.core.scheme().label == PresetLabel::Custom);
  }
}
