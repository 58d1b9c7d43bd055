#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdt/core.hpp"
#include "sdt/partition.hpp"
#include "sdt/scenario.hpp"

namespace sdt {

struct ThreadMetrics {
  ThreadId thread = ThreadId::Sdt;
  std::string role;  // delivery, processing or idle
  std::uint64_t committed = 0;
  double ipc = 0.0;
};

struct OccupancyRow {
  StructureKind kind = StructureKind::IQ;
  ThreadId thread = ThreadId::Sdt;
  double mean = 0.0;
  std::uint32_t max = 0;
  std::uint32_t limit = 0;
};

struct CoreMetrics {
  std::uint32_t id = 0;
  std::vector<ThreadMetrics> threads;
  std::vector<OccupancyRow> occupancy;
  ActivityCounters activity;
  PartitionScheme scheme;
};

struct MetricsReport {
  std::string scenario;
  Topology topology = Topology::ColocatedSmt;
  std::uint64_t seed = 0;
  Cycle measured_cycles = 0;
  double clock_ghz = 3.0;

  double offered_gbps = 0.0;
  double throughput_gbps = 0.0;  // processed
  double throughput_pps = 0.0;
  double delivered_gbps = 0.0;
  double delivered_pps = 0.0;

  // Arrival to processing done, over packets completed in the window.
  double p50_cycles = 0.0;
  double p99_cycles = 0.0;
  double p50_us = 0.0;
  double p99_us = 0.0;

  std::uint64_t injected = 0;
  std::uint64_t dropped = 0;
  std::uint64_t delivered = 0;
  std::uint64_t processed = 0;
  std::uint64_t in_flight = 0;

  std::uint64_t l3_accesses = 0;
  std::uint64_t dram_accesses = 0;
  std::uint64_t dma_lines = 0;

  std::vector<CoreMetrics> cores;
  std::vector<RepartitionReceipt> receipts;
  std::optional<PresetLabel> daemon_label;
  std::uint64_t daemon_ticks = 0;
};

nlohmann::json to_json(const ActivityCounters& a);
nlohmann::json to_json(const PartitionScheme& s);
nlohmann::json to_json(const RepartitionReceipt& r);
nlohmann::json to_json(const MetricsReport& r);

// Nearest-rank percentile (q in [0, 1]); 0 for an empty sample.
double percentile(std::vector<double> sample, double q);

}  // namespace sdt
