#include <sstream>

#include "doctest.h"
#include "sdt/scenario.hpp"

using namespace sdt;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "t.toml");
}

int error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ScenarioError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("full file") {
    const auto s = parse(R"(
name = "x"
topology = "split_core"
seed = 9

[core]
preset = "minimalist"
rob_entries = 100   # override after the preset
l2_bytes = 1_048_576

[partition]
preset = "low"

[workload]
rate_gbps = "max"
pkt_bytes = 128
intensity = "high"

[daemon]
enabled = true
thresholds = [5, 2]
mode = "drain"

[sim]
warmup_cycles = 0
measure_cycles = 1000
)");
    CHECK(s.name == "x");
    CHECK(s.topology == Topology::SplitCore);
    CHECK(s.seed == 9);
    CHECK(s.core.rob_entries == 100);
    CHECK(s.core.iq_entries == minimalist_config().iq_entries);
    CHECK(s.core.l2.bytes == 1024 * 1024);
    CHECK(s.partition.preset == PresetLabel::LowIntensity);
    CHECK(std::isinf(s.workload.rate_gbps));
    CHECK(s.workload.pkt_bytes == 128);
    CHECK(s.workload.intensity == Intensity::High);
    CHECK(s.daemon_enabled);
    CHECK(s.daemon.low_floor_gbps == 5.0);
    CHECK(s.daemon.high_ceiling_gbps == 2.0);
    CHECK(s.daemon.mode == RepartitionMode::Drain);
    CHECK(s.measure_cycles == 1000);
  }

  TEST_CASE("top-level partition shorthand and percentage tables") {
    CHECK(parse("partition = \"high\"\n").partition.preset == PresetLabel::HighIntensity);
    const auto s = parse("[partition]\nrob = 30\n");
    CHECK(s.partition.preset == PresetLabel::Custom);
    CHECK(s.scheme()[StructureKind::ROB].sdt == 153);
  }

  TEST_CASE("errors carry the line") {
    CHECK(error_line("[core]\nrob_entries = 4\nbogus = 1\n") == 3);
    CHECK(error_line("[nope]\n") == 1);
    CHECK(error_line("\n\nrate_gbps 4\n") == 3);
    CHECK(error_line("[workload]\nrate_gbps = \"fast\"\n") == 2);
    CHECK(error_line("[core]\nrob_entries = -3\n") == 2);
    CHECK(error_line("topology = \"ring\"\n") == 1);
  }

  TEST_CASE("invalid scenarios fail validation") {
    Scenario s;
    s.measure_cycles = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    Scenario r;
    r.workload.rate_gbps = -1;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    CHECK_THROWS_AS(parse("[sim]\nmeasure_cycles = 0\n"), ScenarioError);
  }

  TEST_CASE("fast profile") {
    Scenario s;
    apply_fast_profile(s);
    CHECK(s.measure_cycles == 1'200'000);
    CHECK(s.warmup_cycles == 6'000'000);
  }

  TEST_CASE("cycles per byte: preset unless overridden") {
    Scenario s;
    s.workload.intensity = Intensity::High;
    CHECK(s.cycles_per_byte() == doctest::Approx(48.0));
    s.workload.cycles_per_byte = 3.0;
    CHECK(s.cycles_per_byte() == 3.0);
  }
}
