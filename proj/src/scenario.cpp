#include "sdt/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace sdt {

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::ColocatedSmt: return "colocated_smt";
    case Topology::SplitCore: return "split_core";
    case Topology::DedicatedDeliveryCore: return "dedicated_delivery_core";
  }
  return "?";
}

std::optional<Topology> topology_from_string(std::string_view name) {
  for (auto t : {Topology::ColocatedSmt, Topology::SplitCore, Topology::DedicatedDeliveryCore}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

double Scenario::cycles_per_byte() const {
  if (workload.cycles_per_byte) return *workload.cycles_per_byte;
  return intensity_preset(workload.intensity, core.clock_ghz).cycles_per_byte;
}

PartitionScheme Scenario::scheme() const {
  if (partition.preset != PresetLabel::Custom) return preset_scheme(core, partition.preset);
  std::array<double, kStructureKinds> share{};
  for (std::size_t i = 0; i < kStructureKinds; ++i) share[i] = partition.sdt_percent[i] / 100.0;
  return percentage_scheme(core, share);
}

void Scenario::validate() const {
  core.validate();
  if (measure_cycles == 0) throw ConfigError("sim.measure_cycles must be > 0");
  if (workload.rate_gbps < 0.0 || std::isnan(workload.rate_gbps)) throw ConfigError("workload.rate_gbps must be >= 0");
  if (workload.pkt_bytes == 0) throw ConfigError("workload.pkt_bytes must be >= 1");
  if (workload.pkt_bytes > AddressMap::kBufferStride - AddressMap::kHeadroom) {
    throw ConfigError("workload.pkt_bytes does not fit a packet buffer");
  }
  if (workload.ring_slots == 0) throw ConfigError("workload.ring_slots must be >= 1");
  if (workload.payload_slots == 0) throw ConfigError("workload.payload_slots must be >= 1");
  if (cycles_per_byte() < 0.0) throw ConfigError("workload.cycles_per_byte must be >= 0");
  if (workload.delivery.ops_per_packet < kDeliveryFixedOps + 2) {
    throw ConfigError("workload.delivery_ops_per_packet must be >= " + std::to_string(kDeliveryFixedOps + 2));
  }
  if (!(workload.delivery.chain_fraction >= 0.0 && workload.delivery.chain_fraction <= 1.0)) {
    throw ConfigError("workload.delivery_chain_fraction must be in [0, 1]");
  }
  for (double p : partition.sdt_percent) {
    if (p < 0.0 || p > 100.0) throw ConfigError("partition percentages must be in [0, 100]");
  }
  if (daemon_enabled) daemon.validate();
  const auto v = sdt::validate(scheme(), core);
  if (!v.empty()) throw ConfigError("partition: " + std::string(to_string(v.front().kind)) + " " + v.front().reason);
}

void apply_fast_profile(Scenario& s) {
  s.measure_cycles = 1'200'000;
  s.daemon.period_ms = 0.1;
}

ScenarioError::ScenarioError(const std::string& file, int line, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

struct Value {
  std::string text;  // raw, unquoted for strings
  bool quoted = false;
  std::vector<std::string> items;  // for arrays
  bool array = false;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

struct Entry {
  std::string section;
  std::string key;
  Value value;
  int line;
};

class Reader {
 public:
  Reader(const std::string& file, const Entry& e) : file_(file), e_(e) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ScenarioError(file_, e_.line, qualified() + ": " + what);
  }
  std::string qualified() const { return e_.section.empty() ? e_.key : e_.section + "." + e_.key; }

  double number(const std::string& text) const {
    std::string t;
    for (char c : text) {
      if (c != '_') t += c;
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) fail("expected a number, got '" + text + "'");
    return v;
  }
  double number() const {
    if (e_.value.quoted || e_.value.array) fail("expected a number");
    return number(e_.value.text);
  }
  std::uint64_t integer(std::uint64_t min = 0) const {
    const double v = number();
    if (v != std::floor(v) || v < static_cast<double>(min) || v > 9.0e15) {
      fail("expected an integer >= " + std::to_string(min));
    }
    return static_cast<std::uint64_t>(v);
  }
  std::uint32_t u32(std::uint32_t min = 0) const {
    const auto v = integer(min);
    if (v > 0xffffffffull) fail("value too large");
    return static_cast<std::uint32_t>(v);
  }
  std::string string() const {
    if (!e_.value.quoted) fail("expected a quoted string");
    return e_.value.text;
  }
  // Quoted or bare word.
  std::string word() const {
    if (e_.value.array) fail("expected a string");
    return e_.value.text;
  }
  bool boolean() const {
    if (e_.value.text == "true" && !e_.value.quoted) return true;
    if (e_.value.text == "false" && !e_.value.quoted) return false;
    fail("expected true or false");
  }
  std::vector<double> numbers() const {
    if (!e_.value.array) fail("expected an array like [a, b]");
    std::vector<double> out;
    for (const auto& i : e_.value.items) out.push_back(number(i));
    return out;
  }

 private:
  const std::string& file_;
  const Entry& e_;
};

Value parse_value(const std::string& raw, const std::string& file, int line) {
  Value v;
  if (raw.empty()) throw ScenarioError(file, line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ScenarioError(file, line, "unterminated string");
    v.text = raw.substr(1, raw.size() - 2);
    v.quoted = true;
  } else if (raw.front() == '[') {
    if (raw.back() != ']') throw ScenarioError(file, line, "unterminated array");
    v.array = true;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) v.items.push_back(item);
    }
  } else {
    v.text = raw;
  }
  return v;
}

using Handler = std::function<void(Scenario&, const Reader&)>;
using Table = std::map<std::string, Handler, std::less<>>;

Table core_keys() {
  Table t;
  auto u32 = [&t](const char* key, std::uint32_t CoreConfig::*field, std::uint32_t min) {
    t[key] = [field, min](Scenario& s, const Reader& r) { s.core.*field = r.u32(min); };
  };
  u32("superscalar_width", &CoreConfig::superscalar_width, 1);
  u32("iq_entries", &CoreConfig::iq_entries, 1);
  u32("lq_entries", &CoreConfig::lq_entries, 1);
  u32("sq_entries", &CoreConfig::sq_entries, 1);
  u32("rob_entries", &CoreConfig::rob_entries, 1);
  u32("int_regs", &CoreConfig::int_regs, 1);
  u32("fp_regs", &CoreConfig::fp_regs, 0);
  u32("vec_regs", &CoreConfig::vec_regs, 0);
  u32("itlb_entries", &CoreConfig::itlb_entries, 1);
  u32("dtlb_entries", &CoreConfig::dtlb_entries, 1);
  u32("btb_entries", &CoreConfig::btb_entries, 1);
  u32("l1_latency", &CoreConfig::l1_latency, 1);
  u32("l2_latency", &CoreConfig::l2_latency, 0);
  u32("l3_latency", &CoreConfig::l3_latency, 0);
  u32("mispredict_penalty", &CoreConfig::mispredict_penalty, 0);
  u32("flush_refill_penalty", &CoreConfig::flush_refill_penalty, 0);
  u32("tlb_miss_penalty", &CoreConfig::tlb_miss_penalty, 0);
  auto cache = [&t](const std::string& name, CacheGeometry CoreConfig::*field) {
    t[name + "_bytes"] = [field](Scenario& s, const Reader& r) { (s.core.*field).bytes = r.integer(1); };
    t[name + "_ways"] = [field](Scenario& s, const Reader& r) { (s.core.*field).ways = r.u32(1); };
  };
  cache("l1i", &CoreConfig::l1i);
  cache("l1d", &CoreConfig::l1d);
  cache("l2", &CoreConfig::l2);
  cache("l3_slice", &CoreConfig::l3_slice);
  auto unit = [&t](const char* key, std::uint32_t FunctionalUnits::*field, std::uint32_t min) {
    t[key] = [field, min](Scenario& s, const Reader& r) { s.core.units.*field = r.u32(min); };
  };
  unit("int_units", &FunctionalUnits::int_alu, 1);
  unit("fp_units", &FunctionalUnits::fp, 0);
  unit("vec_units", &FunctionalUnits::vec, 0);
  unit("load_ports", &FunctionalUnits::load_ports, 1);
  unit("store_ports", &FunctionalUnits::store_ports, 1);
  t["dram_latency_ns"] = [](Scenario& s, const Reader& r) { s.core.dram_latency_ns = r.number(); };
  t["clock_ghz"] = [](Scenario& s, const Reader& r) { s.core.clock_ghz = r.number(); };
  return t;
}

PresetLabel preset_of(const Reader& r) {
  const auto p = preset_from_string(r.word());
  if (!p) r.fail("unknown preset '" + r.word() + "' (baseline, high, medium, low)");
  return *p;
}

Table partition_keys() {
  Table t;
  t["preset"] = [](Scenario& s, const Reader& r) { s.partition.preset = preset_of(r); };
  for (auto k : kAllStructures) {
    t[std::string(to_string(k))] = [k](Scenario& s, const Reader& r) {
      s.partition.preset = PresetLabel::Custom;
      s.partition.sdt_percent[idx(k)] = r.number();
    };
  }
  return t;
}

Table workload_keys() {
  Table t;
  t["rate_gbps"] = [](Scenario& s, const Reader& r) {
    const auto w = r.word();
    s.workload.rate_gbps = (w == "max" || w == "inf") ? kMaxRate : r.number();
  };
  t["pkt_bytes"] = [](Scenario& s, const Reader& r) { s.workload.pkt_bytes = r.u32(1); };
  t["intensity"] = [](Scenario& s, const Reader& r) {
    const auto i = intensity_from_string(r.word());
    if (!i) r.fail("unknown intensity '" + r.word() + "' (low, medium, high)");
    s.workload.intensity = *i;
  };
  t["cycles_per_byte"] = [](Scenario& s, const Reader& r) { s.workload.cycles_per_byte = r.number(); };
  t["ring_slots"] = [](Scenario& s, const Reader& r) { s.workload.ring_slots = r.u32(1); };
  t["payload_slots"] = [](Scenario& s, const Reader& r) { s.workload.payload_slots = r.u32(1); };
  t["processing"] = [](Scenario& s, const Reader& r) { s.workload.processing = r.boolean(); };
  t["delivery_ops_per_packet"] = [](Scenario& s, const Reader& r) {
    s.workload.delivery.ops_per_packet = r.u32(kDeliveryFixedOps + 2);
  };
  t["delivery_chain_fraction"] = [](Scenario& s, const Reader& r) { s.workload.delivery.chain_fraction = r.number(); };
  t["prefetch_distance"] = [](Scenario& s, const Reader& r) { s.workload.delivery.prefetch_distance = r.u32(0); };
  t["delivery_branch_accuracy"] = [](Scenario& s, const Reader& r) {
    s.workload.delivery.branch_accuracy = r.number();
  };
  t["processing_ilp"] = [](Scenario& s, const Reader& r) { s.workload.processing_params.ilp = r.u32(1); };
  t["processing_branch_accuracy"] = [](Scenario& s, const Reader& r) {
    s.workload.processing_params.branch_accuracy = r.number();
  };
  t["app_state_bytes"] = [](Scenario& s, const Reader& r) { s.workload.processing_params.app_state_bytes = r.integer(); };
  t["topology"] = [](Scenario& s, const Reader& r) {
    const auto tp = topology_from_string(r.word());
    if (!tp) r.fail("unknown topology '" + r.word() + "'");
    s.topology = *tp;
  };
  return t;
}

RepartitionMode mode_of(const Reader& r) {
  const auto w = r.word();
  if (w == "flush") return RepartitionMode::Flush;
  if (w == "drain") return RepartitionMode::Drain;
  r.fail("mode must be flush or drain");
}

Table daemon_keys() {
  Table t;
  t["enabled"] = [](Scenario& s, const Reader& r) { s.daemon_enabled = r.boolean(); };
  t["period_ms"] = [](Scenario& s, const Reader& r) { s.daemon.period_ms = r.number(); };
  t["thresholds"] = [](Scenario& s, const Reader& r) {
    const auto v = r.numbers();
    if (v.size() != 2) r.fail("expected [low_floor, high_ceiling]");
    s.daemon.low_floor_gbps = v[0];
    s.daemon.high_ceiling_gbps = v[1];
  };
  t["low_floor_gbps"] = [](Scenario& s, const Reader& r) { s.daemon.low_floor_gbps = r.number(); };
  t["high_ceiling_gbps"] = [](Scenario& s, const Reader& r) { s.daemon.high_ceiling_gbps = r.number(); };
  t["ewma_alpha"] = [](Scenario& s, const Reader& r) { s.daemon.ewma_alpha = r.number(); };
  t["hysteresis_margin"] = [](Scenario& s, const Reader& r) { s.daemon.hysteresis_gbps = r.number(); };
  t["line_rate_gbps"] = [](Scenario& s, const Reader& r) { s.daemon.line_rate_gbps = r.number(); };
  t["mode"] = [](Scenario& s, const Reader& r) { s.daemon.mode = mode_of(r); };
  return t;
}

Table sim_keys() {
  Table t;
  t["warmup_cycles"] = [](Scenario& s, const Reader& r) { s.warmup_cycles = r.integer(); };
  t["measure_cycles"] = [](Scenario& s, const Reader& r) { s.measure_cycles = r.integer(1); };
  t["seed"] = [](Scenario& s, const Reader& r) { s.seed = r.integer(); };
  t["topology"] = workload_keys()["topology"];
  return t;
}

Table top_keys() {
  Table t;
  t["name"] = [](Scenario& s, const Reader& r) { s.name = r.word(); };
  t["partition"] = [](Scenario& s, const Reader& r) { s.partition.preset = preset_of(r); };
  t["topology"] = workload_keys()["topology"];
  t["seed"] = sim_keys()["seed"];
  return t;
}

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& name) {
  std::vector<Entry> entries;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(strip_comment(raw));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ScenarioError(name, line, "malformed section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (section != "core" && section != "partition" && section != "workload" && section != "daemon" &&
          section != "sim") {
        throw ScenarioError(name, line, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ScenarioError(name, line, "expected key = value");
    Entry e;
    e.section = section;
    e.key = trim(std::string_view(text).substr(0, eq));
    e.value = parse_value(trim(std::string_view(text).substr(eq + 1)), name, line);
    e.line = line;
    if (e.key.empty()) throw ScenarioError(name, line, "empty key");
    entries.push_back(std::move(e));
  }

  Scenario s;
  s.name = name;
  // A core preset resets every core field, so it applies before overrides.
  for (const auto& e : entries) {
    if (e.section == "core" && e.key == "preset") {
      Reader r(name, e);
      const auto w = r.word();
      if (w == "beefy") {
        s.core = beefy_config();
      } else if (w == "minimalist") {
        s.core = minimalist_config();
      } else {
        r.fail("core preset must be beefy or minimalist");
      }
    }
  }
  const std::map<std::string, Table, std::less<>> tables{
      {"", top_keys()},           {"core", core_keys()},     {"partition", partition_keys()},
      {"workload", workload_keys()}, {"daemon", daemon_keys()}, {"sim", sim_keys()},
  };
  for (const auto& e : entries) {
    if (e.section == "core" && e.key == "preset") continue;
    const auto& table = tables.at(e.section);
    const auto it = table.find(e.key);
    Reader r(name, e);
    if (it == table.end()) r.fail("unknown key");
    it->second(s, r);
  }
  try {
    s.validate();
  } catch (const ConfigError& err) {
    throw ScenarioError(name, 0, err.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, 0, "cannot open file");
  return parse_scenario(in, path);
}

}  // namespace sdt
