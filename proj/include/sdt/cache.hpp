#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>
#include <vector>

#include "sdt/config.hpp"
#include "sdt/partition.hpp"

namespace sdt {

// Set-associative LRU cache. When way quotas are set, each hardware thread
// may hold at most quota[t] lines per set and replaces only within its own
// lines; lookups see every line regardless of owner.
class Cache {
 public:
  explicit Cache(CacheGeometry geometry);

  const CacheGeometry& geometry() const { return geo_; }

  // Cycle at which the line's data is available, if present. Touches LRU.
  std::optional<Cycle> probe(std::uint64_t addr);
  bool contains(std::uint64_t addr) const;

  // Inserts (or refreshes) the line. Returns false if the owner's quota is 0.
  bool fill(std::uint64_t addr, std::uint8_t owner, Cycle ready);
  void invalidate(std::uint64_t addr);
  void clear();

  void set_way_quota(PerThread<std::uint32_t> quota);
  void clear_way_quota() { partitioned_ = false; }
  bool partitioned() const { return partitioned_; }
  // Evicts the owner's LRU lines wherever a set holds more than its quota.
  void enforce_quota();

  std::uint64_t lines_owned(std::uint8_t owner) const;
  // Largest number of lines `owner` holds in any one set.
  std::uint32_t max_lines_in_a_set(std::uint8_t owner) const;

 private:
  static constexpr std::uint64_t kInvalid = ~0ull;

  std::uint64_t set_of(std::uint64_t line) const { return line & (sets_ - 1); }
  std::size_t slot(std::uint64_t set, std::uint32_t way) const { return set * geo_.ways + way; }

  CacheGeometry geo_;
  std::uint64_t sets_;
  std::vector<std::uint64_t> tag_;
  std::vector<std::uint8_t> owner_;
  std::vector<std::uint64_t> stamp_;
  std::vector<Cycle> ready_;
  std::uint64_t clock_ = 0;
  bool partitioned_ = false;
  PerThread<std::uint32_t> quota_{};
};

// Fully associative, entry-partitioned LRU table keyed by 64-bit tags. Used
// for the TLBs (shared lookup) and the BTB (per-thread lookup).
class PartitionedLru {
 public:
  PartitionedLru(std::uint32_t capacity, bool shared_lookup);

  bool lookup(ThreadId t, std::uint64_t key);
  void insert(ThreadId t, std::uint64_t key);
  void set_limits(std::uint32_t sdt, std::uint32_t main);
  std::uint32_t usage(ThreadId t) const { return static_cast<std::uint32_t>(lru_[idx(t)].size()); }
  std::uint32_t limit(ThreadId t) const { return limit_[idx(t)]; }
  std::uint32_t capacity() const { return capacity_; }
  void clear();

 private:
  void evict_to(ThreadId t, std::uint32_t n);

  std::uint32_t capacity_;
  bool shared_lookup_;
  PerThread<std::uint32_t> limit_{};
  PerThread<std::list<std::uint64_t>> lru_;
  PerThread<std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator>> where_;
};

}  // namespace sdt
