#include <sstream>

#include "doctest.h"
#include "sdt/experiments.hpp"

using namespace sdt;

namespace {

Scenario small(Topology t = Topology::DedicatedDeliveryCore) {
  Scenario s;
  s.topology = t;
  s.warmup_cycles = 100'000;
  s.measure_cycles = 150'000;
  if (t == Topology::DedicatedDeliveryCore) {
    s.workload.processing = false;
    s.workload.rate_gbps = kMaxRate;
  }
  return s;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("rate 0 delivers nothing and drops nothing") {
    auto s = small(Topology::ColocatedSmt);
    s.workload.rate_gbps = 0;
    const auto r = run(s);
    CHECK(r.throughput_gbps == 0.0);
    CHECK(r.injected == 0);
    CHECK(r.dropped == 0);
  }

  TEST_CASE("max-rate delivery stays under the issue-width roofline") {
    const auto s = small();
    const auto r = run(s);
    const double roofline = s.core.clock_hz() * s.core.superscalar_width / s.workload.delivery.ops_per_packet;
    CHECK(r.throughput_pps > 0.0);
    CHECK(r.throughput_pps <= roofline);
    CHECK(r.throughput_gbps <= r.offered_gbps);
    CHECK(r.p99_cycles >= r.p50_cycles);
  }

  TEST_CASE("sweep: one row per size, ratios against the best") {
    const auto one = sweep(small(), "rob", {256});
    REQUIRE(one.size() == 1);
    CHECK(one[0].ratio_to_max == 1.0);
    CHECK(one[0].above_90);

    const auto rows = sweep(small(), "width", {2, 12}, false);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].size == 2);
    CHECK(rows[1].ratio_to_max == 1.0);
    CHECK(rows[0].ratio_to_max < 1.0);

    CHECK_THROWS_AS(sweep(small(), "rob", {}), ConfigError);
    CHECK_THROWS_AS(sweep(small(), "nonsense", {1}), ConfigError);
    CHECK_THROWS_AS(sweep(small(), "rob", {256, 0}), ConfigError);
  }

  TEST_CASE("with_parameter edits exactly one field") {
    const Scenario base;
    CHECK(with_parameter(base, "fp_reg", 0).core.fp_regs == 0);
    CHECK(with_parameter(base, "l1i_kb", 4).core.l1i.bytes == 4096);
    const auto w = with_parameter(base, "width", 3);
    CHECK(w.core.superscalar_width == 3);
    CHECK(w.core.units.int_alu == scaled_units(3).int_alu);
    for (auto p : sweep_parameters()) {
      CHECK_NOTHROW(with_parameter(base, p, 8));
      CHECK(parameter_value(with_parameter(base, p, 8).core, p) == 8);
    }
    CHECK(parameter_value(base.core, "rob") == 512);
    CHECK_THROWS_AS(parameter_value(base.core, "nonsense"), ConfigError);
  }

  TEST_CASE("LLC latency model") {
    CHECK(llc_extra_latency(1, 0.0) == 0);
    CHECK(llc_extra_latency(4, 0.0) == 1);
    CHECK(llc_extra_latency(8, 0.0) == 2);
    // rho = 0.8: 0.8 / 0.4 = 2 cycles of queueing.
    CHECK(llc_extra_latency(1, 0.8) == 2);
    // rho = 0.92: 0.92 / 0.16 = 5.75, rounds to 6.
    CHECK(llc_extra_latency(2, 0.92) == 6);
    // Load past saturation is clamped at rho = 0.95.
    CHECK(llc_extra_latency(2, 7.0) == llc_extra_latency(2, 0.95));
    CHECK(llc_extra_latency(2, 0.95) >= 9);
  }

  TEST_CASE("scale: parallel epochs match the serial run bit for bit") {
    ScaleOptions par;
    par.epoch_cycles = 25'000;
    ScaleOptions ser = par;
    ser.parallel = false;
    const auto a = scale(small(), {1, 2}, par);
    const auto b = scale(small(), {1, 2}, ser);
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].aggregate_pps == b[i].aggregate_pps);
      CHECK(a[i].mean_extra_l3_latency == b[i].mean_extra_l3_latency);
    }
    CHECK(a[0].speedup == 1.0);
    CHECK(a[1].speedup >= 1.9);
    CHECK_THROWS_AS(scale(small(), {0}), ConfigError);
  }

  TEST_CASE("run_batch: parallel equals serial, reports repeat per seed") {
    std::vector<Scenario> points{small(), small(Topology::ColocatedSmt), small(Topology::SplitCore)};
    points[1].seed = 5;
    const auto a = run_batch(points, true);
    const auto b = run_batch(points, false);
    for (std::size_t i = 0; i < points.size(); ++i) CHECK(to_json(a[i]).dump() == to_json(b[i]).dump());
    auto other = points[1];
    other.seed = 6;
    CHECK(to_json(run(other)).dump() != to_json(a[1]).dump());
  }

  TEST_CASE("batch failures surface after every point runs") {
    std::vector<Scenario> points{small(), small()};
    points[1].measure_cycles = 0;
    CHECK_THROWS_AS(run_batch(points), ConfigError);
  }

  TEST_CASE("zero ROB share for the delivery thread aborts the run") {
    auto s = small(Topology::ColocatedSmt);
    s.warmup_cycles = 0;
    s.measure_cycles = 1'100'000;
    s.partition.preset = PresetLabel::Custom;
    s.partition.sdt_percent.fill(0.0);
    CHECK_THROWS_AS(run(s), StallAbort);
  }

  TEST_CASE("conservation at the final cycle") {
    for (auto t : {Topology::ColocatedSmt, Topology::SplitCore, Topology::DedicatedDeliveryCore}) {
      auto s = small(t);
      s.workload.rate_gbps = t == Topology::DedicatedDeliveryCore ? kMaxRate : 9.0;
      Simulation sim(s);
      sim.warm_up();
      sim.advance(s.measure_cycles);
      const auto& l = sim.ledger();
      CHECK(l.injected() == l.processed() + l.dropped() + l.in_flight());
      CHECK(l.in_flight() == sim.unfinished_packets());
    }
  }

  TEST_CASE("CSV and dat writers") {
    Table t{{"a", "b"}, {{"1", "2"}, {"3", "4"}}};
    std::ostringstream csv;
    write_csv(csv, t);
    CHECK(csv.str() == "a,b\n1,2\n3,4\n");
    std::ostringstream dat;
    write_dat(dat, t);
    CHECK(dat.str() == "# a b\n1 2\n3 4\n");
    const auto rows = to_table(std::vector<SweepRow>{{32, 1, 2, 3, 0.5, false}});
    CHECK(rows.rows.size() == 1);
    CHECK(rows.header.size() == rows.rows[0].size());
  }
}
