#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdt/config.hpp"

namespace sdt {

enum class ThreadId : std::uint8_t { Sdt = 0, Main = 1 };
inline constexpr std::size_t kThreads = 2;
inline constexpr std::array<ThreadId, kThreads> kAllThreads{ThreadId::Sdt, ThreadId::Main};

constexpr std::size_t idx(ThreadId t) { return static_cast<std::size_t>(t); }
constexpr ThreadId other(ThreadId t) { return t == ThreadId::Sdt ? ThreadId::Main : ThreadId::Sdt; }
std::string_view to_string(ThreadId t);

template <typename T>
using PerThread = std::array<T, kThreads>;

enum class StructureKind : std::uint8_t {
  IQ,
  LQ,
  SQ,
  ROB,
  BTB,
  IntReg,
  FpReg,
  VecReg,
  ITLB,
  DTLB,
  L1dWays,
  L2Ways,
};
inline constexpr std::size_t kStructureKinds = 12;
inline constexpr std::array<StructureKind, kStructureKinds> kAllStructures{
    StructureKind::IQ,     StructureKind::LQ,     StructureKind::SQ,      StructureKind::ROB,
    StructureKind::BTB,    StructureKind::IntReg, StructureKind::FpReg,   StructureKind::VecReg,
    StructureKind::ITLB,   StructureKind::DTLB,   StructureKind::L1dWays, StructureKind::L2Ways,
};

constexpr std::size_t idx(StructureKind k) { return static_cast<std::size_t>(k); }
std::string_view to_string(StructureKind k);
std::optional<StructureKind> structure_from_string(std::string_view name);

// Capacity of `kind` in `config` (entries, or ways for the cache kinds).
std::uint32_t capacity_of(const CoreConfig& config, StructureKind kind);

// Structures on the delivery thread's op-class path. FP and vector registers
// are not: the delivery workload issues no FP or vector work.
bool delivery_uses(StructureKind kind);

enum class AllocResult : std::uint8_t { Granted, Stall };

// A structure with a limit register and a usage register per hardware thread.
class PartitionedStructure {
 public:
  PartitionedStructure() = default;
  PartitionedStructure(StructureKind kind, std::uint32_t capacity);

  StructureKind kind() const { return kind_; }
  std::uint32_t capacity() const { return capacity_; }
  std::uint32_t limit(ThreadId t) const { return limit_[idx(t)]; }
  std::uint32_t usage(ThreadId t) const { return usage_[idx(t)]; }

  bool can_allocate(ThreadId t, std::uint32_t n) const {
    return usage_[idx(t)] + n <= limit_[idx(t)];
  }
  AllocResult try_allocate(ThreadId t, std::uint32_t n);
  void release(ThreadId t, std::uint32_t n);
  void reset_usage(ThreadId t) { usage_[idx(t)] = 0; }

  // Requires limit_sdt + limit_main <= capacity.
  void set_limits(std::uint32_t limit_sdt, std::uint32_t limit_main);

 private:
  StructureKind kind_ = StructureKind::IQ;
  std::uint32_t capacity_ = 0;
  PerThread<std::uint32_t> limit_{};
  PerThread<std::uint32_t> usage_{};
};

enum class PresetLabel : std::uint8_t { Baseline, HighIntensity, MediumIntensity, LowIntensity, Custom };
std::string_view to_string(PresetLabel l);
std::optional<PresetLabel> preset_from_string(std::string_view name);

// SDT share of each structure for a preset: 50/10/20/40 %.
double sdt_share(PresetLabel label);

struct ThreadLimits {
  std::int64_t sdt = 0;
  std::int64_t main = 0;
  bool operator==(const ThreadLimits&) const = default;
};

struct PartitionScheme {
  PresetLabel label = PresetLabel::Custom;
  std::array<ThreadLimits, kStructureKinds> limits{};

  ThreadLimits& operator[](StructureKind k) { return limits[idx(k)]; }
  const ThreadLimits& operator[](StructureKind k) const { return limits[idx(k)]; }
  bool operator==(const PartitionScheme&) const = default;
};

PartitionScheme preset_scheme(const CoreConfig& config, PresetLabel label);

// Gives `share` of every structure to SDT with the same floor and minimum-1
// rules as the presets. Used for explicit percentage tables.
PartitionScheme percentage_scheme(const CoreConfig& config,
                                  const std::array<double, kStructureKinds>& sdt_share_per_kind);

// Every structure belongs entirely to `owner`; the other thread gets nothing.
PartitionScheme single_thread_scheme(const CoreConfig& config, ThreadId owner);

struct Violation {
  StructureKind kind;
  std::string reason;
};

// Empty when the scheme fits the configuration.
std::vector<Violation> validate(const PartitionScheme& scheme, const CoreConfig& config);

enum class RepartitionMode : std::uint8_t { Flush, Drain };
std::string_view to_string(RepartitionMode m);

struct RepartitionReceipt {
  Cycle applied_at = 0;
  RepartitionMode mode = RepartitionMode::Flush;
  Cycle penalty = 0;
  PresetLabel old_label = PresetLabel::Custom;
  PresetLabel new_label = PresetLabel::Custom;
};

}  // namespace sdt
