#include "sdt/power_area.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdt {

std::string_view to_string(CostKind k) {
  static constexpr std::array<std::string_view, kCostKinds> names{
      "iq",        "lq",        "sq",          "rob",       "int_reg",    "fp_reg",      "vec_reg",  "btb",
      "itlb",      "dtlb",      "l1i",         "l1d",       "l2",         "l3",          "rename",   "int_units",
      "fp_units",  "vec_units", "load_ports",  "store_ports", "frontend", "thread_state", "limit_registers",
  };
  return names[static_cast<std::size_t>(k)];
}

namespace {

constexpr std::array<CostKind, kCostKinds> kAllCostKinds{
    CostKind::IQ,         CostKind::LQ,        CostKind::SQ,          CostKind::ROB,       CostKind::IntReg,
    CostKind::FpReg,      CostKind::VecReg,    CostKind::BTB,         CostKind::ITLB,      CostKind::DTLB,
    CostKind::L1i,        CostKind::L1d,       CostKind::L2,          CostKind::L3,        CostKind::Rename,
    CostKind::IntUnits,   CostKind::FpUnits,   CostKind::VecUnits,    CostKind::LoadPorts, CostKind::StorePorts,
    CostKind::Frontend,   CostKind::ThreadState, CostKind::LimitRegisters,
};

constexpr std::size_t ci(CostKind k) { return static_cast<std::size_t>(k); }

enum class Scaling { Superlinear, Linear, PerKiB, Square };

Scaling scaling_of(CostKind k) {
  switch (k) {
    case CostKind::IQ:
    case CostKind::LQ:
    case CostKind::SQ:
    case CostKind::ROB:
    case CostKind::IntReg:
    case CostKind::FpReg:
    case CostKind::VecReg: return Scaling::Superlinear;
    case CostKind::L1i:
    case CostKind::L1d:
    case CostKind::L2:
    case CostKind::L3: return Scaling::PerKiB;
    case CostKind::Rename: return Scaling::Square;
    default: return Scaling::Linear;
  }
}

}  // namespace

CostModel CostModel::defaults() { return load(std::string(SDT_DATA_DIR) + "/cost_coefficients.txt"); }

CostModel CostModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cost coefficients " + path);
  return parse(in, path);
}

CostModel CostModel::parse(std::istream& in, const std::string& name) {
  CostModel m;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) throw std::runtime_error(name + ":" + std::to_string(n) + ": expected key = value");
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    std::istringstream vs(line.substr(eq + 1));
    double v = 0.0;
    if (!(vs >> v) || v < 0.0) throw std::runtime_error(name + ":" + std::to_string(n) + ": bad value for " + key);
    m.coef_[key] = v;
  }
  return m;
}

double CostModel::coef(const std::string& key) const {
  const auto it = coef_.find(key);
  if (it == coef_.end()) throw std::out_of_range("missing cost coefficient " + key);
  return it->second;
}

StructureCost CostModel::structure_cost(CostKind kind, double size) const {
  if (size < 0.0 || std::isnan(size)) throw std::invalid_argument("structure size must be >= 0");
  const std::string name(to_string(kind));
  StructureCost c;
  c.kind = kind;
  c.size = size;
  const double a = coef("area." + name);
  switch (scaling_of(kind)) {
    case Scaling::Superlinear: c.area = a * std::pow(size, coef("area.queue_exponent")); break;
    case Scaling::PerKiB: c.area = a * size / 1024.0; break;
    case Scaling::Square: c.area = a * size * size; break;
    case Scaling::Linear: c.area = a * size; break;
  }
  c.static_power = coef("static.per_area") * c.area;
  // Access energy grows with the square root of the array (wire length).
  c.energy_per_access = coef("energy." + name) * std::sqrt(c.area);
  return c;
}

ActivityRates activity_rates(const ActivityCounters& a) {
  ActivityRates r;
  if (a.cycles == 0) return r;
  const double cyc = static_cast<double>(a.cycles);
  auto set = [&](CostKind k, double count) { r.per_cycle[ci(k)] = count / cyc; };
  set(CostKind::IQ, static_cast<double>(a.dispatched + a.issued));
  set(CostKind::LQ, static_cast<double>(a.loads));
  set(CostKind::SQ, static_cast<double>(a.stores));
  set(CostKind::ROB, static_cast<double>(a.dispatched + a.committed));
  set(CostKind::IntReg, static_cast<double>(a.reg_reads + a.reg_writes));
  set(CostKind::FpReg, 2.0 * static_cast<double>(a.fp_ops));
  set(CostKind::VecReg, 2.0 * static_cast<double>(a.vec_ops));
  set(CostKind::BTB, static_cast<double>(a.btb_accesses));
  set(CostKind::ITLB, static_cast<double>(a.itlb_accesses));
  set(CostKind::DTLB, static_cast<double>(a.dtlb_accesses));
  set(CostKind::L1i, static_cast<double>(a.l1i_accesses));
  set(CostKind::L1d, static_cast<double>(a.l1d_accesses));
  set(CostKind::L2, static_cast<double>(a.l2_accesses));
  set(CostKind::L3, static_cast<double>(a.l3_accesses));
  set(CostKind::Rename, static_cast<double>(a.dispatched));
  set(CostKind::IntUnits, static_cast<double>(a.int_ops + a.branches));
  set(CostKind::FpUnits, static_cast<double>(a.fp_ops));
  set(CostKind::VecUnits, static_cast<double>(a.vec_ops));
  set(CostKind::LoadPorts, static_cast<double>(a.loads));
  set(CostKind::StorePorts, static_cast<double>(a.stores));
  set(CostKind::Frontend, static_cast<double>(a.fetched));
  r.dram_per_cycle = static_cast<double>(a.dram_accesses) / cyc;
  return r;
}

ActivityRates mean_rates(const std::vector<ActivityRates>& rates) {
  ActivityRates m;
  if (rates.empty()) return m;
  for (const auto& r : rates) {
    for (std::size_t i = 0; i < kCostKinds; ++i) m.per_cycle[i] += r.per_cycle[i];
    m.dram_per_cycle += r.dram_per_cycle;
  }
  for (auto& v : m.per_cycle) v /= static_cast<double>(rates.size());
  m.dram_per_cycle /= static_cast<double>(rates.size());
  return m;
}

CoreCost core_cost(const CostModel& model, const CoreConfig& c, bool sdt_enabled, const ActivityRates* activity) {
  std::array<double, kCostKinds> size{};
  size[ci(CostKind::IQ)] = c.iq_entries;
  size[ci(CostKind::LQ)] = c.lq_entries;
  size[ci(CostKind::SQ)] = c.sq_entries;
  size[ci(CostKind::ROB)] = c.rob_entries;
  size[ci(CostKind::IntReg)] = c.int_regs;
  size[ci(CostKind::FpReg)] = c.fp_regs;
  size[ci(CostKind::VecReg)] = c.vec_regs;
  size[ci(CostKind::BTB)] = c.btb_entries;
  size[ci(CostKind::ITLB)] = c.itlb_entries;
  size[ci(CostKind::DTLB)] = c.dtlb_entries;
  size[ci(CostKind::L1i)] = static_cast<double>(c.l1i.bytes);
  size[ci(CostKind::L1d)] = static_cast<double>(c.l1d.bytes);
  size[ci(CostKind::L2)] = static_cast<double>(c.l2.bytes);
  size[ci(CostKind::L3)] = static_cast<double>(c.l3_slice.bytes);
  size[ci(CostKind::Rename)] = c.superscalar_width;
  size[ci(CostKind::IntUnits)] = c.units.int_alu;
  size[ci(CostKind::FpUnits)] = c.units.fp;
  size[ci(CostKind::VecUnits)] = c.units.vec;
  size[ci(CostKind::LoadPorts)] = c.units.load_ports;
  size[ci(CostKind::StorePorts)] = c.units.store_ports;
  size[ci(CostKind::Frontend)] = 1;
  size[ci(CostKind::ThreadState)] = sdt_enabled ? 2 : 1;
  size[ci(CostKind::LimitRegisters)] = sdt_enabled ? static_cast<double>(kStructureKinds) : 0.0;

  CoreCost out;
  const double clock_hz = c.clock_hz();
  for (auto k : kAllCostKinds) {
    auto sc = model.structure_cost(k, size[ci(k)]);
    out.area += sc.area;
    out.static_power += sc.static_power;
    if (activity) out.dynamic_power += sc.energy_per_access * 1e-12 * activity->per_cycle[ci(k)] * clock_hz;
    out.structures.push_back(sc);
  }
  if (activity) out.dynamic_power += model.coef("energy.dram") * 1e-12 * activity->dram_per_cycle * clock_hz;
  return out;
}

CmpCost cmp_cost(const CostModel& model, std::uint32_t n_cores, const CoreConfig& config, bool sdt_enabled,
                 const std::vector<ActivityRates>& activity) {
  if (n_cores < 1) throw std::invalid_argument("cmp_cost needs at least one core");
  CmpCost out;
  out.n_cores = n_cores;
  out.sdt_enabled = sdt_enabled;
  for (std::uint32_t i = 0; i < n_cores; ++i) {
    const ActivityRates* a = activity.empty() ? nullptr : &activity[i % activity.size()];
    out.per_core.push_back(core_cost(model, config, sdt_enabled, a));
    out.area += out.per_core.back().area;
    out.static_power += out.per_core.back().static_power;
    out.dynamic_power += out.per_core.back().dynamic_power;
  }
  return out;
}

Savings savings(const CmpCost& baseline, const CmpCost& variant) {
  if (!(baseline.area > 0.0) || !(baseline.power() > 0.0)) {
    throw std::invalid_argument("savings need a baseline with positive area and power");
  }
  return {(baseline.area - variant.area) / baseline.area * 100.0,
          (baseline.power() - variant.power()) / baseline.power() * 100.0};
}

double weighted_sdt_share(const CostModel& model, const CoreConfig& config, const PartitionScheme& scheme) {
  const auto full = core_cost(model, config, false);
  auto area_of = [&](CostKind k) { return full.structures[ci(k)].area; };
  auto cost_kind = [](StructureKind k) {
    switch (k) {
      case StructureKind::IQ: return CostKind::IQ;
      case StructureKind::LQ: return CostKind::LQ;
      case StructureKind::SQ: return CostKind::SQ;
      case StructureKind::ROB: return CostKind::ROB;
      case StructureKind::BTB: return CostKind::BTB;
      case StructureKind::IntReg: return CostKind::IntReg;
      case StructureKind::FpReg: return CostKind::FpReg;
      case StructureKind::VecReg: return CostKind::VecReg;
      case StructureKind::ITLB: return CostKind::ITLB;
      case StructureKind::DTLB: return CostKind::DTLB;
      case StructureKind::L1dWays: return CostKind::L1d;
      case StructureKind::L2Ways: return CostKind::L2;
    }
    return CostKind::IQ;
  };
  double total = 0.0;
  double sdt = 0.0;
  for (auto k : kAllStructures) {
    const double cap = capacity_of(config, k);
    if (cap <= 0) continue;
    const double a = area_of(cost_kind(k));
    total += a;
    sdt += a * static_cast<double>(scheme[k].sdt) / cap;
  }
  return total > 0 ? sdt / total * 100.0 : 0.0;
}

nlohmann::json to_json(const CoreCost& c) {
  nlohmann::json j;
  j["area"] = c.area;
  j["static_power"] = c.static_power;
  j["dynamic_power"] = c.dynamic_power;
  for (const auto& s : c.structures) {
    j["structures"].push_back({{"kind", std::string(to_string(s.kind))},
                               {"size", s.size},
                               {"area", s.area},
                               {"static_power", s.static_power},
                               {"energy_per_access_pj", s.energy_per_access}});
  }
  return j;
}

nlohmann::json to_json(const CmpCost& c) {
  nlohmann::json j;
  j["cores"] = c.n_cores;
  j["sdt"] = c.sdt_enabled;
  j["area"] = c.area;
  j["static_power"] = c.static_power;
  j["dynamic_power"] = c.dynamic_power;
  j["power"] = c.power();
  if (!c.per_core.empty()) j["core0"] = to_json(c.per_core.front());
  return j;
}

}  // namespace sdt
