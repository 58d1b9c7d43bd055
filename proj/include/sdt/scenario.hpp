#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "sdt/config.hpp"
#include "sdt/daemon.hpp"
#include "sdt/partition.hpp"
#include "sdt/workload.hpp"

namespace sdt {

enum class Topology : std::uint8_t { ColocatedSmt, SplitCore, DedicatedDeliveryCore };
std::string_view to_string(Topology t);
std::optional<Topology> topology_from_string(std::string_view name);

struct WorkloadConfig {
  double rate_gbps = 9.0;  // kMaxRate for back-to-back arrivals
  std::uint32_t pkt_bytes = 64;
  Intensity intensity = Intensity::Medium;
  // Overrides the intensity preset when set.
  std::optional<double> cycles_per_byte;
  std::uint32_t ring_slots = 1024;
  std::uint32_t payload_slots = 512;
  bool processing = true;
  DeliveryParams delivery{};
  ProcessingParams processing_params{};
};

struct PartitionConfig {
  PresetLabel preset = PresetLabel::Baseline;
  // SDT percentage per structure; used when preset is Custom.
  std::array<double, kStructureKinds> sdt_percent{};
};

struct Scenario {
  std::string name = "scenario";
  CoreConfig core{};
  PartitionConfig partition{};
  Topology topology = Topology::ColocatedSmt;
  WorkloadConfig workload{};
  DaemonConfig daemon{};
  bool daemon_enabled = false;
  Cycle warmup_cycles = 6'000'000;
  Cycle measure_cycles = 12'000'000;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the first bad field.
  void validate() const;
  double cycles_per_byte() const;
  PartitionScheme scheme() const;
};

// Desk-scale durations for CI: 1.2 M measured cycles and a 0.1 ms daemon
// period so the daemon still ticks several times. Warm-up stays at 2 ms.
void apply_fast_profile(Scenario& s);

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& file, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Flat key/value file with [core] [partition] [workload] [daemon] [sim]
// sections. Unknown keys and malformed values are rejected with their line.
Scenario parse_scenario(std::istream& in, const std::string& name = "scenario");
Scenario load_scenario(const std::string& path);

}  // namespace sdt
