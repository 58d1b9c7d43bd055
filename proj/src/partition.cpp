#include "sdt/partition.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sdt {

std::string_view to_string(ThreadId t) { return t == ThreadId::Sdt ? "sdt" : "main"; }

namespace {

constexpr std::array<std::string_view, kStructureKinds> kStructureNames{
    "iq", "lq", "sq", "rob", "btb", "int_reg", "fp_reg", "vec_reg", "itlb", "dtlb", "l1d_ways", "l2_ways",
};

}  // namespace

std::string_view to_string(StructureKind k) { return kStructureNames[idx(k)]; }

std::optional<StructureKind> structure_from_string(std::string_view name) {
  for (auto k : kAllStructures) {
    if (kStructureNames[idx(k)] == name) return k;
  }
  return std::nullopt;
}

std::uint32_t capacity_of(const CoreConfig& c, StructureKind kind) {
  switch (kind) {
    case StructureKind::IQ: return c.iq_entries;
    case StructureKind::LQ: return c.lq_entries;
    case StructureKind::SQ: return c.sq_entries;
    case StructureKind::ROB: return c.rob_entries;
    case StructureKind::BTB: return c.btb_entries;
    case StructureKind::IntReg: return c.int_regs;
    case StructureKind::FpReg: return c.fp_regs;
    case StructureKind::VecReg: return c.vec_regs;
    case StructureKind::ITLB: return c.itlb_entries;
    case StructureKind::DTLB: return c.dtlb_entries;
    case StructureKind::L1dWays: return c.l1d.ways;
    case StructureKind::L2Ways: return c.l2.ways;
  }
  return 0;
}

bool delivery_uses(StructureKind kind) {
  return kind != StructureKind::FpReg && kind != StructureKind::VecReg;
}

PartitionedStructure::PartitionedStructure(StructureKind kind, std::uint32_t capacity)
    : kind_(kind), capacity_(capacity) {}

AllocResult PartitionedStructure::try_allocate(ThreadId t, std::uint32_t n) {
  assert(n >= 1);
  if (!can_allocate(t, n)) return AllocResult::Stall;
  usage_[idx(t)] += n;
  return AllocResult::Granted;
}

void PartitionedStructure::release(ThreadId t, std::uint32_t n) {
  assert(usage_[idx(t)] >= n);
  usage_[idx(t)] -= n;
}

void PartitionedStructure::set_limits(std::uint32_t limit_sdt, std::uint32_t limit_main) {
  if (static_cast<std::uint64_t>(limit_sdt) + limit_main > capacity_) {
    throw std::invalid_argument("partition limits exceed capacity of " + std::string(to_string(kind_)));
  }
  limit_ = {limit_sdt, limit_main};
}

std::string_view to_string(PresetLabel l) {
  switch (l) {
    case PresetLabel::Baseline: return "baseline";
    case PresetLabel::HighIntensity: return "high";
    case PresetLabel::MediumIntensity: return "medium";
    case PresetLabel::LowIntensity: return "low";
    case PresetLabel::Custom: return "custom";
  }
  return "custom";
}

std::optional<PresetLabel> preset_from_string(std::string_view name) {
  for (auto l : {PresetLabel::Baseline, PresetLabel::HighIntensity, PresetLabel::MediumIntensity,
                 PresetLabel::LowIntensity, PresetLabel::Custom}) {
    if (to_string(l) == name) return l;
  }
  return std::nullopt;
}

double sdt_share(PresetLabel label) {
  switch (label) {
    case PresetLabel::Baseline: return 0.50;
    case PresetLabel::HighIntensity: return 0.10;
    case PresetLabel::MediumIntensity: return 0.20;
    case PresetLabel::LowIntensity: return 0.40;
    case PresetLabel::Custom: break;
  }
  throw std::invalid_argument("custom label has no preset share");
}

namespace {

ThreadLimits split(std::uint32_t capacity, double share, bool min_one) {
  // Exact for the shares used here (multiples of 1/10 applied to integers).
  auto sdt = static_cast<std::int64_t>(std::floor(capacity * share + 1e-9));
  if (min_one && sdt == 0 && capacity >= 2) sdt = 1;
  return {sdt, static_cast<std::int64_t>(capacity) - sdt};
}

}  // namespace

PartitionScheme preset_scheme(const CoreConfig& config, PresetLabel label) {
  if (label == PresetLabel::Custom) throw std::invalid_argument("preset_scheme: label must not be Custom");
  std::array<double, kStructureKinds> shares;
  shares.fill(sdt_share(label));
  auto s = percentage_scheme(config, shares);
  s.label = label;
  return s;
}

PartitionScheme percentage_scheme(const CoreConfig& config,
                                  const std::array<double, kStructureKinds>& share) {
  PartitionScheme s;
  s.label = PresetLabel::Custom;
  for (auto k : kAllStructures) {
    s[k] = split(capacity_of(config, k), share[idx(k)], delivery_uses(k) && share[idx(k)] > 0.0);
  }
  return s;
}

PartitionScheme single_thread_scheme(const CoreConfig& config, ThreadId owner) {
  PartitionScheme s;
  s.label = PresetLabel::Custom;
  for (auto k : kAllStructures) {
    const std::int64_t cap = capacity_of(config, k);
    s[k] = owner == ThreadId::Sdt ? ThreadLimits{cap, 0} : ThreadLimits{0, cap};
  }
  return s;
}

std::vector<Violation> validate(const PartitionScheme& scheme, const CoreConfig& config) {
  std::vector<Violation> out;
  for (auto k : kAllStructures) {
    const auto& l = scheme[k];
    const std::int64_t cap = capacity_of(config, k);
    if (l.sdt < 0 || l.main < 0) {
      out.push_back({k, "negative limit"});
    } else if (l.sdt + l.main > cap) {
      out.push_back({k, "limits " + std::to_string(l.sdt) + "+" + std::to_string(l.main) +
                            " exceed capacity " + std::to_string(cap)});
    }
  }
  return out;
}

std::string_view to_string(RepartitionMode m) { return m == RepartitionMode::Flush ? "flush" : "drain"; }

}  // namespace sdt
