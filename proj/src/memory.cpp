#include "sdt/memory.hpp"

namespace sdt {

PrivateCaches::PrivateCaches(const CoreConfig& config)
    : l1i(config.l1i),
      l1d(config.l1d),
      l2(config.l2),
      itlb(config.itlb_entries, /*shared_lookup=*/true),
      dtlb(config.dtlb_entries, /*shared_lookup=*/true) {}

MemorySystem::MemorySystem(const CoreConfig& config, std::uint32_t l3_slices)
    : l3_(CacheGeometry{config.l3_slice.bytes * (l3_slices == 0 ? 1 : l3_slices), config.l3_slice.ways}),
      l3_base_latency_(config.l3_latency),
      dram_cycles_(config.dram_cycles()) {}

void MemorySystem::dma_write(std::uint64_t addr, std::uint32_t bytes, Cycle now) {
  const std::uint64_t first = addr / kLineBytes;
  const std::uint64_t n = lines_spanned(addr, bytes);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t a = (first + i) * kLineBytes;
    l3_.fill(a, 0, now);
    for (auto* p : privates_) {
      p->l1d.invalidate(a);
      p->l2.invalidate(a);
    }
  }
  dma_lines += n;
}

void MemorySystem::write_through(std::uint64_t addr, const PrivateCaches* writer, Cycle now) {
  l3_.fill(addr, 0, now);
  if (privates_.size() < 2) return;
  for (auto* p : privates_) {
    if (p == writer) continue;
    p->l1d.invalidate(addr);
    p->l2.invalidate(addr);
  }
}

}  // namespace sdt
