#include "doctest.h"
#include "sdt/daemon.hpp"
#include "sdt/rng.hpp"
#include "support.hpp"

using namespace sdt;

namespace {

// A window of `gbps` over `ms` at 3 GHz.
WindowMetrics window(double gbps, double ms = 1.0) {
  const Cycle cycles = static_cast<Cycle>(ms * 3e6);
  return {static_cast<std::uint64_t>(gbps * 1e9 / 8.0 * ms * 1e-3), cycles, 3.0};
}

struct Driven {
  test::Bench bench;
  DaemonState state;
  DaemonConfig config;
  std::vector<PresetLabel> labels;
  std::uint64_t strps = 0;

  Driven() { bench.core.set_scheme(preset_scheme(bench.config, PresetLabel::Baseline)); }
  void tick(double gbps) {
    if (daemon_tick(state, bench.core, window(gbps), config)) ++strps;
    labels.push_back(state.current_label);
  }
};

}  // namespace

TEST_SUITE("daemon") {
  TEST_CASE("window load arithmetic") {
    CHECK(window_load_gbps({0, 3'000'000, 3.0}) == 0.0);
    CHECK(window_load_gbps({17'578ull * 64, 3'000'000, 3.0}) == doctest::Approx(9.0).epsilon(1e-3));
    CHECK(window_load_gbps({1'125'000ull * 64, 3'000'000, 3.0}) == doctest::Approx(576.0));
  }

  TEST_CASE("overload is clamped to line rate") {
    DaemonState s;
    DaemonConfig c;
    CHECK(observe(s, {1'125'000ull * 64, 3'000'000, 3.0}, c) == doctest::Approx(c.line_rate_gbps));
  }

  TEST_CASE("EWMA is seeded by the first window, then blends") {
    DaemonState s;
    DaemonConfig c;
    CHECK(observe(s, window(4.0), c) == doctest::Approx(4.0));
    CHECK(observe(s, window(8.0), c) == doctest::Approx(6.0));
    CHECK(observe(s, window(0.0), c) == doctest::Approx(3.0));
  }

  TEST_CASE("classification anchors") {
    DaemonConfig c;
    CHECK(classify(9.0, c) == PresetLabel::LowIntensity);
    CHECK(classify(4.0, c) == PresetLabel::MediumIntensity);
    CHECK(classify(0.5, c) == PresetLabel::HighIntensity);
    CHECK(classify(6.0, c) == PresetLabel::LowIntensity);
    CHECK(classify(1.0, c) == PresetLabel::MediumIntensity);
  }

  TEST_CASE("steady loads settle within three periods with a single STRP") {
    const std::pair<double, PresetLabel> table[] = {{0.5, PresetLabel::HighIntensity},
                                                    {4.0, PresetLabel::MediumIntensity},
                                                    {9.0, PresetLabel::LowIntensity}};
    for (const auto& [load, expect] : table) {
      Driven d;
      for (int i = 0; i < 20; ++i) d.tick(load);
      CHECK(d.labels[2] == expect);
      CHECK(d.labels.back() == expect);
      CHECK(d.strps == 1);
      CHECK(d.state.strps == 1);
      CHECK(d.bench.core.scheme() == preset_scheme(d.bench.config, expect));
    }
  }

  TEST_CASE("no oscillation under 10 % jitter") {
    for (double load : {0.5, 4.0, 9.0}) {
      Driven d;
      Rng rng(42);
      for (int i = 0; i < 200; ++i) d.tick(load * rng.uniform(0.9, 1.1));
      CHECK(d.strps == 1);
    }
  }

  TEST_CASE("hysteresis holds the label around a boundary") {
    Driven d;
    for (int i = 0; i < 100; ++i) d.tick(i % 2 ? 1.1 : 0.9);
    CHECK(d.strps <= 1);
  }

  TEST_CASE("load step from 0.5 to 9 Gbps reaches Low within two periods") {
    Driven d;
    for (int i = 0; i < 10; ++i) d.tick(0.5);
    REQUIRE(d.state.current_label == PresetLabel::HighIntensity);
    d.tick(9.0);
    d.tick(9.0);
    CHECK(d.state.current_label == PresetLabel::LowIntensity);
  }

  TEST_CASE("drain mode repartitions too") {
    Driven d;
    d.config.mode = RepartitionMode::Drain;
    d.tick(9.0);
    CHECK(d.bench.core.scheme().label == PresetLabel::LowIntensity);
  }

  TEST_CASE("bad daemon settings are rejected") {
    DaemonConfig c;
    c.high_ceiling_gbps = 7.0;
    CHECK_THROWS(c.validate());
    DaemonConfig a;
    a.ewma_alpha = 0.0;
    CHECK_THROWS(a.validate());
    DaemonConfig p;
    p.period_ms = 0.0;
    CHECK_THROWS(p.validate());
  }
}
