#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "sdt/core.hpp"
#include "sdt/daemon.hpp"
#include "sdt/memory.hpp"
#include "sdt/metrics.hpp"
#include "sdt/scenario.hpp"
#include "sdt/workload.hpp"

namespace sdt {

struct RunOptions {
  std::ostream* trace = nullptr;
  // Trace only the first cycles of the measured window.
  Cycle trace_cycles = 10'000;
  // Re-applies the current scheme in flush mode at this period (0 = never).
  Cycle periodic_flush = 0;
};

// One node of a scenario: its cores, shared LLC, NIC, rings and generators.
class Simulation {
 public:
  explicit Simulation(const Scenario& scenario, RunOptions options = {});
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Functional warm-up of caches, TLBs and BTB; packet state is then
  // discarded and the measured window starts.
  void warm_up();
  // Detailed simulation. Throws StallAbort on a zero-limit stall.
  void advance(Cycle cycles);
  MetricsReport report() const;

  const Scenario& scenario() const { return scenario_; }
  Core& core(std::size_t i) { return *cores_.at(i); }
  std::size_t num_cores() const { return cores_.size(); }
  MemorySystem& memory() { return *memory_; }
  const PacketLedger& ledger() const;
  const DaemonState& daemon() const { return daemon_; }
  Cycle measured() const { return measured_; }

  // Admitted packets not yet processed, recounted from the packet records.
  std::uint64_t unfinished_packets() const;

 private:
  struct Traffic;
  struct Placement {
    std::size_t core;
    ThreadId thread;
  };

  void start_traffic(std::uint64_t seed);
  void step_cycle();

  Scenario scenario_;
  RunOptions options_;
  std::unique_ptr<MemorySystem> memory_;
  std::vector<std::unique_ptr<Core>> cores_;
  Placement delivery_at_{};
  std::optional<Placement> processing_at_;
  std::unique_ptr<Traffic> traffic_;
  AddressMap map_{};
  DaemonState daemon_{};
  std::uint64_t daemon_mark_bytes_ = 0;
  std::vector<RepartitionReceipt> receipts_;
  Cycle measure_start_ = 0;
  Cycle measured_ = 0;
  std::uint64_t l3_mark_ = 0;
  std::uint64_t dram_mark_ = 0;
  std::uint64_t dma_mark_ = 0;
};

// Warm-up then the measured window.
MetricsReport run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace sdt
