#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sdt/power_area.hpp"

using namespace sdt;

TEST_SUITE("power_area") {
  const CostModel model = CostModel::defaults();

  TEST_CASE("size 0 costs nothing and negative sizes are rejected") {
    for (std::size_t i = 0; i < kCostKinds; ++i) {
      const auto k = static_cast<CostKind>(i);
      const auto c = model.structure_cost(k, 0);
      CHECK(c.area == 0.0);
      CHECK(c.static_power == 0.0);
      CHECK(c.energy_per_access == 0.0);
      CHECK_THROWS_AS(model.structure_cost(k, -1), std::invalid_argument);
    }
  }

  TEST_CASE("closed-form scaling") {
    const double rob = model.structure_cost(CostKind::ROB, 512).area / model.structure_cost(CostKind::ROB, 128).area;
    CHECK(rob == doctest::Approx(std::pow(4.0, 1.1)));
    CHECK(rob == doctest::Approx(4.59).epsilon(1e-3));
    const double l2 =
        model.structure_cost(CostKind::L2, 1024 * 1024).area / model.structure_cost(CostKind::L2, 512 * 1024).area;
    CHECK(l2 == doctest::Approx(2.0));
    CHECK(model.structure_cost(CostKind::BTB, 8192).area ==
          doctest::Approx(2 * model.structure_cost(CostKind::BTB, 4096).area));
    CHECK(model.structure_cost(CostKind::Rename, 12).area ==
          doctest::Approx(4 * model.structure_cost(CostKind::Rename, 6).area));
  }

  TEST_CASE("costs never grow when a structure shrinks") {
    for (std::size_t i = 0; i < kCostKinds; ++i) {
      const auto k = static_cast<CostKind>(i);
      StructureCost prev = model.structure_cost(k, 0);
      for (double s = 1; s < 1e7; s *= 1.7) {
        const auto c = model.structure_cost(k, s);
        CHECK(c.area >= prev.area);
        CHECK(c.static_power >= prev.static_power);
        CHECK(c.energy_per_access >= prev.energy_per_access);
        prev = c;
      }
    }
    // Whole cores: every minimalist field is no larger than beefy's.
    CHECK(core_cost(model, minimalist_config(), false).area < core_cost(model, beefy_config(), false).area);
  }

  TEST_CASE("additivity across cores and structures") {
    const auto one = cmp_cost(model, 1, beefy_config(), false);
    const auto twenty = cmp_cost(model, 20, beefy_config(), false);
    const auto forty = cmp_cost(model, 40, beefy_config(), false);
    CHECK(forty.area == doctest::Approx(2 * twenty.area));
    CHECK(forty.power() == doctest::Approx(2 * twenty.power()));
    CHECK(twenty.area == doctest::Approx(20 * one.area));
    double sum = 0;
    for (const auto& s : one.per_core.front().structures) sum += s.area;
    CHECK(one.area == doctest::Approx(sum));
  }

  TEST_CASE("SDT increment is small") {
    const double plain = core_cost(model, beefy_config(), false).area;
    const double sdt = core_cost(model, beefy_config(), true).area;
    CHECK(sdt > plain);
    CHECK((sdt - plain) / plain < 0.03);
  }

  TEST_CASE("savings arithmetic") {
    const auto base = cmp_cost(model, 40, beefy_config(), false);
    const auto same = savings(base, base);
    CHECK(same.area_pct == 0.0);
    CHECK(same.power_pct == 0.0);
    const auto half = savings(base, cmp_cost(model, 20, beefy_config(), false));
    CHECK(half.area_pct == doctest::Approx(50.0));
    CHECK(half.power_pct == doctest::Approx(50.0));
    CmpCost empty;
    CHECK_THROWS(savings(empty, base));
  }

  TEST_CASE("dynamic power follows activity") {
    ActivityCounters a;
    a.cycles = 1000;
    a.fetched = a.dispatched = a.issued = a.committed = 2000;
    a.int_ops = 2000;
    a.reg_reads = 3000;
    a.reg_writes = 2000;
    const auto rates = activity_rates(a);
    CHECK(rates.per_cycle[static_cast<std::size_t>(CostKind::ROB)] == doctest::Approx(4.0));
    const auto idle = core_cost(model, beefy_config(), false);
    const auto busy = core_cost(model, beefy_config(), false, &rates);
    CHECK(busy.static_power == doctest::Approx(idle.static_power));
    CHECK(busy.dynamic_power > 0.0);
    auto doubled = rates;
    for (auto& v : doubled.per_cycle) v *= 2;
    CHECK(core_cost(model, beefy_config(), false, &doubled).dynamic_power == doctest::Approx(2 * busy.dynamic_power));
  }

  TEST_CASE("coefficient file parsing") {
    std::istringstream in("# comment\narea.rob = 2 # trailing\n\nstatic.per_area=0.5\n");
    const auto m = CostModel::parse(in, "t");
    CHECK(m.coef("area.rob") == 2.0);
    CHECK(m.coef("static.per_area") == 0.5);
    CHECK_THROWS(m.coef("area.iq"));
    std::istringstream bad("area.rob 2\n");
    CHECK_THROWS(CostModel::parse(bad, "t"));
    std::istringstream neg("area.rob = -1\n");
    CHECK_THROWS(CostModel::parse(neg, "t"));
  }

  TEST_CASE("area-weighted SDT share tracks the preset share") {
    const auto c = beefy_config();
    CHECK(weighted_sdt_share(model, c, preset_scheme(c, PresetLabel::Baseline)) == doctest::Approx(50.0).epsilon(0.01));
    // Way-partitioned caches floor to whole ways, so High sits a little under 10 %.
    const double high = weighted_sdt_share(model, c, preset_scheme(c, PresetLabel::HighIntensity));
    CHECK(high > 5.0);
    CHECK(high <= 10.0);
    CHECK(weighted_sdt_share(model, c, single_thread_scheme(c, ThreadId::Main)) == 0.0);
  }
}
