#include "sdt/config.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace sdt {

Cycle CoreConfig::dram_cycles() const {
  return static_cast<Cycle>(std::llround(dram_latency_ns * clock_ghz));
}

namespace {

void check_cache(const char* name, const CacheGeometry& c, std::vector<std::string>& errs) {
  if (c.ways == 0) {
    errs.push_back(std::string(name) + ": associativity must be >= 1");
    return;
  }
  if (c.bytes == 0 || c.bytes % kLineBytes != 0 || !std::has_single_bit(c.lines())) {
    errs.push_back(std::string(name) + ": size must be a power-of-two number of 64 B lines");
    return;
  }
  if (c.lines() % c.ways != 0 || !std::has_single_bit(c.sets())) {
    errs.push_back(std::string(name) + ": lines/ways must be a power of two");
  }
}

}  // namespace

void CoreConfig::validate() const {
  std::vector<std::string> errs;
  auto need = [&](const char* name, std::uint64_t v) {
    if (v < 1) errs.push_back(std::string(name) + " must be >= 1");
  };
  need("superscalar_width", superscalar_width);
  need("iq_entries", iq_entries);
  need("lq_entries", lq_entries);
  need("sq_entries", sq_entries);
  need("rob_entries", rob_entries);
  need("int_regs", int_regs);
  need("itlb_entries", itlb_entries);
  need("dtlb_entries", dtlb_entries);
  need("btb_entries", btb_entries);
  need("units.int_alu", units.int_alu);
  need("units.load_ports", units.load_ports);
  need("units.store_ports", units.store_ports);
  need("l1_latency", l1_latency);
  check_cache("l1i", l1i, errs);
  check_cache("l1d", l1d, errs);
  check_cache("l2", l2, errs);
  check_cache("l3_slice", l3_slice, errs);
  if (!(clock_ghz > 0.0)) errs.push_back("clock_ghz must be > 0");
  if (dram_latency_ns < 0.0) errs.push_back("dram_latency_ns must be >= 0");
  if (!std::has_single_bit(data_page_bytes) || !std::has_single_bit(code_page_bytes)) {
    errs.push_back("page sizes must be powers of two");
  }
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid core configuration:";
  for (const auto& e : errs) os << "\n  " << e;
  throw ConfigError(os.str());
}

FunctionalUnits scaled_units(std::uint32_t width) {
  auto scale = [width](std::uint32_t beefy) {
    const long v = std::lround(static_cast<double>(beefy) * width / 12.0);
    return static_cast<std::uint32_t>(v < 1 ? 1 : v);
  };
  FunctionalUnits u;
  u.int_alu = scale(6);
  u.fp = scale(2);
  u.vec = scale(2);
  u.load_ports = scale(2);
  u.store_ports = scale(1);
  return u;
}

CoreConfig beefy_config() { return CoreConfig{}; }

CoreConfig minimalist_config() {
  CoreConfig c;
  c.superscalar_width = 3;
  c.iq_entries = 32;
  c.lq_entries = 32;
  c.sq_entries = 32;
  c.int_regs = 92;
  c.fp_regs = 0;
  c.vec_regs = 46;
  c.itlb_entries = 3;
  c.dtlb_entries = 10;
  c.btb_entries = 256;
  c.rob_entries = 128;
  c.l1i = {4 * 1024, 8};
  c.l1d = {16 * 1024, 16};
  c.l2 = {512 * 1024, 16};
  c.l3_slice = {256 * 1024, 16};
  c.units = scaled_units(c.superscalar_width);
  return c;
}

}  // namespace sdt
