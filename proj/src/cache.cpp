#include "sdt/cache.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdt {

Cache::Cache(CacheGeometry geometry)
    : geo_(geometry),
      sets_(geometry.sets()),
      tag_(geometry.lines(), kInvalid),
      owner_(geometry.lines(), 0),
      stamp_(geometry.lines(), 0),
      ready_(geometry.lines(), 0) {
  if (sets_ == 0) throw ConfigError("cache must have at least one set");
}

std::optional<Cycle> Cache::probe(std::uint64_t addr) {
  const std::uint64_t line = addr / kLineBytes;
  const std::uint64_t set = set_of(line);
  for (std::uint32_t w = 0; w < geo_.ways; ++w) {
    const auto s = slot(set, w);
    if (tag_[s] == line) {
      stamp_[s] = ++clock_;
      return ready_[s];
    }
  }
  return std::nullopt;
}

bool Cache::contains(std::uint64_t addr) const {
  const std::uint64_t line = addr / kLineBytes;
  const std::uint64_t set = set_of(line);
  for (std::uint32_t w = 0; w < geo_.ways; ++w) {
    if (tag_[slot(set, w)] == line) return true;
  }
  return false;
}

bool Cache::fill(std::uint64_t addr, std::uint8_t owner, Cycle ready) {
  const std::uint64_t line = addr / kLineBytes;
  const std::uint64_t set = set_of(line);
  // Refresh in place when already present (ownership stays with the filler).
  for (std::uint32_t w = 0; w < geo_.ways; ++w) {
    const auto s = slot(set, w);
    if (tag_[s] == line) {
      stamp_[s] = ++clock_;
      ready_[s] = std::min(ready_[s], ready);
      return true;
    }
  }
  if (partitioned_ && quota_[owner] == 0) return false;

  std::uint32_t own = 0;
  std::optional<std::uint32_t> free_way;
  std::optional<std::uint32_t> own_lru;
  std::optional<std::uint32_t> other_lru;
  for (std::uint32_t w = 0; w < geo_.ways; ++w) {
    const auto s = slot(set, w);
    if (tag_[s] == kInvalid) {
      if (!free_way) free_way = w;
      continue;
    }
    auto& pick = owner_[s] == owner ? own_lru : other_lru;
    if (owner_[s] == owner) ++own;
    if (!pick || stamp_[s] < stamp_[slot(set, *pick)]) pick = w;
  }

  std::uint32_t victim;
  if (!partitioned_) {
    if (free_way) {
      victim = *free_way;
    } else {
      victim = (own_lru && (!other_lru || stamp_[slot(set, *own_lru)] < stamp_[slot(set, *other_lru)]))
                   ? *own_lru
                   : *other_lru;
    }
  } else if (own >= quota_[owner]) {
    victim = *own_lru;
  } else if (free_way) {
    victim = *free_way;
  } else {
    // Set full while under quota: the other owner is over its share.
    victim = *other_lru;
  }
  const auto s = slot(set, victim);
  tag_[s] = line;
  owner_[s] = owner;
  stamp_[s] = ++clock_;
  ready_[s] = ready;
  return true;
}

void Cache::invalidate(std::uint64_t addr) {
  const std::uint64_t line = addr / kLineBytes;
  const std::uint64_t set = set_of(line);
  for (std::uint32_t w = 0; w < geo_.ways; ++w) {
    const auto s = slot(set, w);
    if (tag_[s] == line) tag_[s] = kInvalid;
  }
}

void Cache::clear() {
  std::fill(tag_.begin(), tag_.end(), kInvalid);
}

void Cache::set_way_quota(PerThread<std::uint32_t> quota) {
  if (static_cast<std::uint64_t>(quota[0]) + quota[1] > geo_.ways) {
    throw std::invalid_argument("way quota exceeds associativity");
  }
  partitioned_ = true;
  quota_ = quota;
}

void Cache::enforce_quota() {
  if (!partitioned_) return;
  for (std::uint64_t set = 0; set < sets_; ++set) {
    for (std::uint8_t owner = 0; owner < kThreads; ++owner) {
      for (;;) {
        std::uint32_t own = 0;
        std::optional<std::uint32_t> lru;
        for (std::uint32_t w = 0; w < geo_.ways; ++w) {
          const auto s = slot(set, w);
          if (tag_[s] == kInvalid || owner_[s] != owner) continue;
          ++own;
          if (!lru || stamp_[s] < stamp_[slot(set, *lru)]) lru = w;
        }
        if (own <= quota_[owner]) break;
        tag_[slot(set, *lru)] = kInvalid;
      }
    }
  }
}

std::uint64_t Cache::lines_owned(std::uint8_t owner) const {
  std::uint64_t n = 0;
  for (std::size_t s = 0; s < tag_.size(); ++s) {
    if (tag_[s] != kInvalid && owner_[s] == owner) ++n;
  }
  return n;
}

std::uint32_t Cache::max_lines_in_a_set(std::uint8_t owner) const {
  std::uint32_t best = 0;
  for (std::uint64_t set = 0; set < sets_; ++set) {
    std::uint32_t n = 0;
    for (std::uint32_t w = 0; w < geo_.ways; ++w) {
      const auto s = slot(set, w);
      if (tag_[s] != kInvalid && owner_[s] == owner) ++n;
    }
    best = std::max(best, n);
  }
  return best;
}

PartitionedLru::PartitionedLru(std::uint32_t capacity, bool shared_lookup)
    : capacity_(capacity), shared_lookup_(shared_lookup), limit_{capacity, 0} {}

bool PartitionedLru::lookup(ThreadId t, std::uint64_t key) {
  auto touch = [&](ThreadId owner) {
    auto& map = where_[idx(owner)];
    auto it = map.find(key);
    if (it == map.end()) return false;
    auto& lru = lru_[idx(owner)];
    lru.splice(lru.begin(), lru, it->second);
    return true;
  };
  if (touch(t)) return true;
  return shared_lookup_ && touch(other(t));
}

void PartitionedLru::insert(ThreadId t, std::uint64_t key) {
  const auto i = idx(t);
  if (limit_[i] == 0 || where_[i].contains(key)) return;
  evict_to(t, limit_[i] - 1);
  lru_[i].push_front(key);
  where_[i].emplace(key, lru_[i].begin());
}

void PartitionedLru::set_limits(std::uint32_t sdt, std::uint32_t main) {
  if (static_cast<std::uint64_t>(sdt) + main > capacity_) {
    throw std::invalid_argument("table limits exceed capacity");
  }
  limit_ = {sdt, main};
  evict_to(ThreadId::Sdt, sdt);
  evict_to(ThreadId::Main, main);
}

void PartitionedLru::evict_to(ThreadId t, std::uint32_t n) {
  const auto i = idx(t);
  while (lru_[i].size() > n) {
    where_[i].erase(lru_[i].back());
    lru_[i].pop_back();
  }
}

void PartitionedLru::clear() {
  for (std::size_t i = 0; i < kThreads; ++i) {
    lru_[i].clear();
    where_[i].clear();
  }
}

}  // namespace sdt
