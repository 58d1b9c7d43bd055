#pragma once

#include <cstdint>
#include <vector>

#include "sdt/cache.hpp"
#include "sdt/config.hpp"

namespace sdt {

// Caches and TLBs private to one physical core.
struct PrivateCaches {
  explicit PrivateCaches(const CoreConfig& config);

  Cache l1i;
  Cache l1d;
  Cache l2;
  PartitionedLru itlb;
  PartitionedLru dtlb;
};

// Last-level cache shared by the cores of one node, plus DRAM. NIC DMA lands
// in the LLC and invalidates private copies; committed stores are written
// through so another core's reads find them in the LLC.
class MemorySystem {
 public:
  MemorySystem(const CoreConfig& config, std::uint32_t l3_slices);

  Cache& l3() { return l3_; }
  const Cache& l3() const { return l3_; }

  std::uint32_t l3_latency() const { return l3_base_latency_ + l3_extra_latency_; }
  void set_l3_extra_latency(std::uint32_t cycles) { l3_extra_latency_ = cycles; }
  Cycle dram_cycles() const { return dram_cycles_; }

  void attach(PrivateCaches* caches) { privates_.push_back(caches); }

  void dma_write(std::uint64_t addr, std::uint32_t bytes, Cycle now);
  void write_through(std::uint64_t addr, const PrivateCaches* writer, Cycle now);

  std::uint64_t l3_accesses = 0;
  std::uint64_t dram_accesses = 0;
  std::uint64_t dma_lines = 0;

 private:
  Cache l3_;
  std::uint32_t l3_base_latency_;
  std::uint32_t l3_extra_latency_ = 0;
  Cycle dram_cycles_;
  std::vector<PrivateCaches*> privates_;
};

// Lines covered by [addr, addr + bytes), at least one.
inline std::uint64_t lines_spanned(std::uint64_t addr, std::uint32_t bytes) {
  const std::uint64_t first = addr / kLineBytes;
  const std::uint64_t last = (addr + (bytes == 0 ? 1 : bytes) - 1) / kLineBytes;
  return last - first + 1;
}

}  // namespace sdt
