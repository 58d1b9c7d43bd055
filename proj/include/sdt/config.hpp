#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdt {

using Cycle = std::uint64_t;

inline constexpr std::uint32_t kLineBytes = 64;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CacheGeometry {
  std::uint64_t bytes = 0;
  std::uint32_t ways = 1;

  std::uint64_t lines() const { return bytes / kLineBytes; }
  std::uint64_t sets() const { return ways == 0 ? 0 : lines() / ways; }
};

struct FunctionalUnits {
  std::uint32_t int_alu = 6;
  std::uint32_t fp = 2;
  std::uint32_t vec = 2;
  std::uint32_t load_ports = 2;
  std::uint32_t store_ports = 1;
};

// Capacities, latencies and clock of one physical core. Field defaults are
// the full-size ("beefy") configuration.
struct CoreConfig {
  std::uint32_t superscalar_width = 12;

  std::uint32_t iq_entries = 194;
  std::uint32_t lq_entries = 144;
  std::uint32_t sq_entries = 112;
  std::uint32_t rob_entries = 512;

  std::uint32_t int_regs = 448;
  std::uint32_t fp_regs = 256;
  std::uint32_t vec_regs = 400;

  std::uint32_t itlb_entries = 64;
  std::uint32_t dtlb_entries = 64;
  std::uint32_t btb_entries = 8192;

  CacheGeometry l1i{32 * 1024, 8};
  CacheGeometry l1d{64 * 1024, 16};
  CacheGeometry l2{1024 * 1024, 16};
  CacheGeometry l3_slice{2 * 1024 * 1024, 16};

  std::uint32_t l1_latency = 4;
  std::uint32_t l2_latency = 14;
  std::uint32_t l3_latency = 40;
  double dram_latency_ns = 100.0;
  double clock_ghz = 3.0;

  FunctionalUnits units{};

  std::uint32_t mispredict_penalty = 15;
  std::uint32_t flush_refill_penalty = 200;
  std::uint32_t tlb_miss_penalty = 30;
  std::uint32_t btb_miss_bubble = 2;
  std::uint32_t frontend_depth = 3;
  std::uint32_t fp_latency = 4;
  std::uint32_t vec_latency = 3;

  // DPDK memory lives in hugepages; code in base pages.
  std::uint64_t data_page_bytes = 2ull * 1024 * 1024;
  std::uint64_t code_page_bytes = 4096;

  Cycle dram_cycles() const;
  // Cycles per second.
  double clock_hz() const { return clock_ghz * 1e9; }

  // Throws ConfigError listing every violated invariant.
  void validate() const;
};

// Full-size core.
CoreConfig beefy_config();

// Reduced core sufficient for the data-delivery thread. Functional units are
// scaled from the beefy counts by the width ratio.
CoreConfig minimalist_config();

// Functional-unit counts scaled by width / 12 (each class at least 1,
// fp/vec at least 1 so FP work can still make progress).
FunctionalUnits scaled_units(std::uint32_t width);

}  // namespace sdt
