#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdt/config.hpp"
#include "sdt/core.hpp"

namespace sdt {

// Components the cost model prices. Sizes are entries for queues, register
// files, BTB and TLBs; bytes for caches; width for rename/bypass; unit count
// for functional units; 1 for the fixed blocks.
enum class CostKind : std::uint8_t {
  IQ,
  LQ,
  SQ,
  ROB,
  IntReg,
  FpReg,
  VecReg,
  BTB,
  ITLB,
  DTLB,
  L1i,
  L1d,
  L2,
  L3,
  Rename,
  IntUnits,
  FpUnits,
  VecUnits,
  LoadPorts,
  StorePorts,
  Frontend,
  ThreadState,
  LimitRegisters,
};
inline constexpr std::size_t kCostKinds = 23;
std::string_view to_string(CostKind k);

struct StructureCost {
  CostKind kind = CostKind::IQ;
  double size = 0.0;
  double area = 0.0;
  double static_power = 0.0;
  double energy_per_access = 0.0;
};

// Coefficient table; see data/cost_coefficients.txt for the keys.
class CostModel {
 public:
  static CostModel defaults();
  static CostModel load(const std::string& path);
  // Parses `key = value` lines; '#' starts a comment.
  static CostModel parse(std::istream& in, const std::string& name);

  double coef(const std::string& key) const;
  void set(const std::string& key, double value) { coef_[key] = value; }

  // Throws std::invalid_argument for a negative size.
  StructureCost structure_cost(CostKind kind, double size) const;

 private:
  std::map<std::string, double, std::less<>> coef_;
};

// Access counts per cycle, by priced component, from a simulated core.
struct ActivityRates {
  std::array<double, kCostKinds> per_cycle{};
  double dram_per_cycle = 0.0;
};
ActivityRates activity_rates(const ActivityCounters& a);
// Element-wise mean.
ActivityRates mean_rates(const std::vector<ActivityRates>& rates);

struct CoreCost {
  std::vector<StructureCost> structures;
  double area = 0.0;
  double static_power = 0.0;
  double dynamic_power = 0.0;
  double power() const { return static_power + dynamic_power; }
};

struct CmpCost {
  std::uint32_t n_cores = 0;
  bool sdt_enabled = false;
  std::vector<CoreCost> per_core;
  double area = 0.0;
  double static_power = 0.0;
  double dynamic_power = 0.0;
  double power() const { return static_power + dynamic_power; }
};

// Area and static power of one core (with its L3 slice). With SDT enabled
// the core carries a second thread's architectural state and the limit and
// usage registers.
CoreCost core_cost(const CostModel& model, const CoreConfig& config, bool sdt_enabled,
                   const ActivityRates* activity = nullptr);

// Core i uses activity[i % activity.size()]; no activity means static power only.
CmpCost cmp_cost(const CostModel& model, std::uint32_t n_cores, const CoreConfig& config, bool sdt_enabled,
                 const std::vector<ActivityRates>& activity = {});

struct Savings {
  double area_pct = 0.0;
  double power_pct = 0.0;
};
// Throws std::invalid_argument unless the baseline totals are positive.
Savings savings(const CmpCost& baseline, const CmpCost& variant);

// Area share of the partitionable structures that `sdt_limits` hand to SDT,
// in percent of the area of those structures.
double weighted_sdt_share(const CostModel& model, const CoreConfig& config, const PartitionScheme& scheme);

nlohmann::json to_json(const CoreCost& c);
nlohmann::json to_json(const CmpCost& c);

}  // namespace sdt
