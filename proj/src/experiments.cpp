#include "sdt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>

#include "sdt/rng.hpp"

namespace sdt {

namespace {

// Calls fn(i) for i in [0, n), on OpenMP threads when `parallel`. Every
// index runs; the lowest-index exception is rethrown afterwards.
void for_each_index(std::size_t n, bool parallel, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const ThreadMetrics* role_thread(const CoreMetrics& c, std::string_view role) {
  for (const auto& t : c.threads) {
    if (t.role == role) return &t;
  }
  return nullptr;
}

}  // namespace

std::vector<MetricsReport> run_batch(const std::vector<Scenario>& scenarios, bool parallel) {
  std::vector<MetricsReport> out(scenarios.size());
  for_each_index(scenarios.size(), parallel, [&](std::size_t i) { out[i] = run(scenarios[i]); });
  return out;
}

const std::vector<std::string_view>& sweep_parameters() {
  static const std::vector<std::string_view> names{
      "iq",     "lq",    "sq",    "rob",   "btb",     "int_reg",  "fp_reg",    "vec_reg",    "itlb",
      "dtlb",   "l1i_kb", "l1d_kb", "l2_kb", "l3_kb",  "width",    "int_units", "fp_units",   "vec_units",
      "load_ports", "store_ports",
  };
  return names;
}

Scenario with_parameter(const Scenario& base, std::string_view param, std::uint64_t value) {
  Scenario s = base;
  auto& c = s.core;
  const auto v32 = static_cast<std::uint32_t>(value);
  if (param == "iq") c.iq_entries = v32;
  else if (param == "lq") c.lq_entries = v32;
  else if (param == "sq") c.sq_entries = v32;
  else if (param == "rob") c.rob_entries = v32;
  else if (param == "btb") c.btb_entries = v32;
  else if (param == "int_reg") c.int_regs = v32;
  else if (param == "fp_reg") c.fp_regs = v32;
  else if (param == "vec_reg") c.vec_regs = v32;
  else if (param == "itlb") c.itlb_entries = v32;
  else if (param == "dtlb") c.dtlb_entries = v32;
  else if (param == "l1i_kb") c.l1i.bytes = value * 1024;
  else if (param == "l1d_kb") c.l1d.bytes = value * 1024;
  else if (param == "l2_kb") c.l2.bytes = value * 1024;
  else if (param == "l3_kb") c.l3_slice.bytes = value * 1024;
  else if (param == "width") {
    c.superscalar_width = v32;
    c.units = scaled_units(v32);
  } else if (param == "int_units") c.units.int_alu = v32;
  else if (param == "fp_units") c.units.fp = v32;
  else if (param == "vec_units") c.units.vec = v32;
  else if (param == "load_ports") c.units.load_ports = v32;
  else if (param == "store_ports") c.units.store_ports = v32;
  else throw ConfigError("unknown sweep parameter '" + std::string(param) + "'");
  s.name = base.name + "/" + std::string(param) + "=" + std::to_string(value);
  return s;
}

std::uint64_t parameter_value(const CoreConfig& c, std::string_view param) {
  if (param == "iq") return c.iq_entries;
  if (param == "lq") return c.lq_entries;
  if (param == "sq") return c.sq_entries;
  if (param == "rob") return c.rob_entries;
  if (param == "btb") return c.btb_entries;
  if (param == "int_reg") return c.int_regs;
  if (param == "fp_reg") return c.fp_regs;
  if (param == "vec_reg") return c.vec_regs;
  if (param == "itlb") return c.itlb_entries;
  if (param == "dtlb") return c.dtlb_entries;
  if (param == "l1i_kb") return c.l1i.bytes / 1024;
  if (param == "l1d_kb") return c.l1d.bytes / 1024;
  if (param == "l2_kb") return c.l2.bytes / 1024;
  if (param == "l3_kb") return c.l3_slice.bytes / 1024;
  if (param == "width") return c.superscalar_width;
  if (param == "int_units") return c.units.int_alu;
  if (param == "fp_units") return c.units.fp;
  if (param == "vec_units") return c.units.vec;
  if (param == "load_ports") return c.units.load_ports;
  if (param == "store_ports") return c.units.store_ports;
  throw ConfigError("unknown sweep parameter '" + std::string(param) + "'");
}

std::vector<SweepRow> sweep(const Scenario& base, std::string_view param, const std::vector<std::uint64_t>& sizes,
                            bool parallel) {
  if (sizes.empty()) throw ConfigError("sweep needs at least one size");
  std::vector<Scenario> points;
  for (auto size : sizes) {
    points.push_back(with_parameter(base, param, size));
    points.back().validate();
  }
  const auto reports = run_batch(points, parallel);
  double best = 0.0;
  for (const auto& r : reports) best = std::max(best, r.throughput_pps);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    SweepRow row;
    row.size = sizes[i];
    row.throughput_gbps = reports[i].throughput_gbps;
    row.throughput_pps = reports[i].throughput_pps;
    row.p99_cycles = reports[i].p99_cycles;
    row.ratio_to_max = best > 0 ? reports[i].throughput_pps / best : 0.0;
    row.above_90 = row.ratio_to_max >= 0.9;
    rows.push_back(row);
  }
  return rows;
}

std::uint32_t llc_extra_latency(std::uint32_t cores, double load) {
  const double rho = std::clamp(load, 0.0, 0.95);
  const double wait = rho / (2.0 * (1.0 - rho));
  return cores / 4 + static_cast<std::uint32_t>(std::lround(wait));
}

std::vector<ScaleRow> scale(const Scenario& base, const std::vector<std::uint32_t>& core_counts,
                            const ScaleOptions& options) {
  if (core_counts.empty()) throw ConfigError("scale needs at least one core count");
  if (options.epoch_cycles == 0) throw ConfigError("epoch_cycles must be > 0");
  for (auto n : core_counts) {
    if (n < 1) throw ConfigError("core counts must be >= 1");
  }
  Scenario node = base;
  node.topology = Topology::DedicatedDeliveryCore;
  node.workload.processing = false;
  node.workload.rate_gbps = kMaxRate;
  node.daemon_enabled = false;
  node.validate();

  std::vector<ScaleRow> rows;
  for (auto n : core_counts) {
    std::vector<std::unique_ptr<Simulation>> sims(n);
    for_each_index(n, options.parallel, [&](std::size_t i) {
      Scenario s = node;
      if (i > 0) s.seed = mix64(node.seed, i);
      sims[i] = std::make_unique<Simulation>(s);
      sims[i]->warm_up();
    });

    std::vector<std::uint64_t> mark(n);
    auto llc_traffic = [&](std::size_t i) { return sims[i]->memory().l3_accesses + sims[i]->memory().dma_lines; };
    for (std::size_t i = 0; i < n; ++i) mark[i] = llc_traffic(i);

    std::uint32_t extra = options.contention ? llc_extra_latency(n, 0.0) : 0;
    double extra_sum = 0.0;
    Cycle done = 0;
    while (done < node.measure_cycles) {
      const Cycle step = std::min(options.epoch_cycles, node.measure_cycles - done);
      for (auto& s : sims) s->memory().set_l3_extra_latency(extra);
      for_each_index(n, options.parallel, [&](std::size_t i) { sims[i]->advance(step); });
      extra_sum += static_cast<double>(extra) * static_cast<double>(step);
      done += step;
      // Every node's lines interleave over all n slices.
      std::uint64_t traffic = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto now = llc_traffic(i);
        traffic += now - mark[i];
        mark[i] = now;
      }
      if (options.contention) extra = llc_extra_latency(n, static_cast<double>(traffic) / step / n);
    }

    ScaleRow row;
    row.cores = n;
    for (auto& s : sims) {
      const auto r = s->report();
      row.aggregate_gbps += r.throughput_gbps;
      row.aggregate_pps += r.throughput_pps;
    }
    row.mean_extra_l3_latency = extra_sum / static_cast<double>(node.measure_cycles);
    rows.push_back(row);
  }
  const double per_core = rows.front().aggregate_pps / rows.front().cores;
  for (auto& r : rows) r.speedup = per_core > 0 ? r.aggregate_pps / per_core : 0.0;
  return rows;
}

std::vector<IntensityRow> intensity_study(const Scenario& base, const std::vector<Intensity>& presets,
                                          const CostModel& model, bool parallel) {
  std::vector<Scenario> points;
  for (auto in : presets) {
    Scenario c = base;
    c.workload.intensity = in;
    c.workload.cycles_per_byte.reset();
    c.workload.processing = true;
    c.workload.rate_gbps = intensity_preset(in, base.core.clock_ghz).target_gbps;
    c.topology = Topology::ColocatedSmt;
    c.daemon_enabled = true;
    c.name = base.name + "/" + std::string(to_string(in)) + "/colocated";
    Scenario r = c;
    r.topology = Topology::SplitCore;
    r.daemon_enabled = false;
    r.name = base.name + "/" + std::string(to_string(in)) + "/split";
    points.push_back(c);
    points.push_back(r);
  }
  const auto reports = run_batch(points, parallel);

  std::vector<IntensityRow> rows;
  for (std::size_t i = 0; i < presets.size(); ++i) {
    IntensityRow row;
    row.intensity = presets[i];
    row.offered_gbps = points[2 * i].workload.rate_gbps;
    row.colocated = reports[2 * i];
    row.reference = reports[2 * i + 1];
    row.label = row.colocated.daemon_label.value_or(PresetLabel::Baseline);
    const auto& scheme = row.colocated.cores.front().scheme;
    for (auto k : kAllStructures) {
      const double cap = capacity_of(base.core, k);
      row.sdt_share_pct[idx(k)] = cap > 0 ? 100.0 * static_cast<double>(scheme[k].sdt) / cap : 0.0;
    }
    row.weighted_share_pct = weighted_sdt_share(model, base.core, scheme);
    row.colocated_gbps = row.colocated.throughput_gbps;
    row.reference_gbps = row.reference.throughput_gbps;
    row.ratio = row.reference.throughput_pps > 0 ? row.colocated.throughput_pps / row.reference.throughput_pps : 0.0;
    row.meets_90 = row.ratio >= 0.9;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::vector<ActivityRates> cmp_activity(CmpSpec spec, const std::vector<IntensityRow>& runs) {
  if (runs.empty()) return {};
  if (spec.sdt) {
    std::vector<ActivityRates> colocated;
    for (const auto& r : runs) colocated.push_back(activity_rates(r.colocated.cores.front().activity));
    return {mean_rates(colocated)};
  }
  std::vector<ActivityRates> delivery;
  std::vector<ActivityRates> processing;
  for (const auto& r : runs) {
    for (const auto& c : r.reference.cores) {
      if (role_thread(c, "delivery")) delivery.push_back(activity_rates(c.activity));
      if (role_thread(c, "processing")) processing.push_back(activity_rates(c.activity));
    }
  }
  std::vector<ActivityRates> out;
  if (!delivery.empty()) out.push_back(mean_rates(delivery));
  if (!processing.empty()) out.push_back(mean_rates(processing));
  return out;
}

}  // namespace

CostStudy cost_from_runs(const CostModel& model, const CoreConfig& config, CmpSpec variant, CmpSpec baseline,
                         const std::vector<IntensityRow>& runs) {
  CostStudy out;
  out.variant = variant;
  out.baseline = baseline;
  out.variant_cost = cmp_cost(model, variant.cores, config, variant.sdt, cmp_activity(variant, runs));
  out.baseline_cost = cmp_cost(model, baseline.cores, config, baseline.sdt, cmp_activity(baseline, runs));
  out.savings = savings(out.baseline_cost, out.variant_cost);
  const double plain = core_cost(model, config, false).area;
  out.sdt_increment_pct = (core_cost(model, config, true).area - plain) / plain * 100.0;
  return out;
}

FlushOverhead flush_overhead(const Scenario& base, Cycle period, Cycle window) {
  if (period == 0 || window == 0) throw ConfigError("flush period and window must be > 0");
  Scenario s = base;
  s.topology = Topology::DedicatedDeliveryCore;
  s.workload.processing = false;
  s.workload.rate_gbps = kMaxRate;
  s.daemon_enabled = false;
  s.measure_cycles = window;
  s.validate();

  std::array<MetricsReport, 2> reports;
  for_each_index(2, true, [&](std::size_t i) {
    RunOptions opt;
    if (i == 1) opt.periodic_flush = period;
    reports[i] = run(s, opt);
  });
  auto ops = [](const MetricsReport& r) {
    const auto* t = role_thread(r.cores.front(), "delivery");
    return t ? t->committed : 0;
  };
  FlushOverhead f;
  f.period = period;
  f.window = window;
  f.flushes = reports[1].receipts.size();
  f.base_ops = ops(reports[0]);
  f.flushed_ops = ops(reports[1]);
  f.base_pps = reports[0].throughput_pps;
  f.flushed_pps = reports[1].throughput_pps;
  f.loss_pct = f.base_ops > 0
                   ? (static_cast<double>(f.base_ops) - static_cast<double>(f.flushed_ops)) / f.base_ops * 100.0
                   : 0.0;
  return f;
}

Table to_table(const std::vector<SweepRow>& rows) {
  Table t{{"size", "throughput_gbps", "throughput_pps", "p99_cycles", "ratio_to_max", "above_90pct"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.size), fmt(r.throughput_gbps), fmt(r.throughput_pps), fmt(r.p99_cycles),
                      fmt(r.ratio_to_max), r.above_90 ? "1" : "0"});
  }
  return t;
}

Table to_table(const std::vector<ScaleRow>& rows) {
  Table t{{"cores", "aggregate_gbps", "aggregate_pps", "speedup", "extra_l3_latency"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.cores), fmt(r.aggregate_gbps), fmt(r.aggregate_pps), fmt(r.speedup),
                      fmt(r.mean_extra_l3_latency)});
  }
  return t;
}

Table to_table(const std::vector<IntensityRow>& rows) {
  Table t{{"intensity", "offered_gbps", "label", "weighted_sdt_share_pct"}, {}};
  for (auto k : kAllStructures) t.header.push_back("sdt_" + std::string(to_string(k)) + "_pct");
  for (const auto* h : {"colocated_gbps", "reference_gbps", "ratio", "meets_90pct", "colocated_p99_us",
                        "reference_p99_us"}) {
    t.header.emplace_back(h);
  }
  for (const auto& r : rows) {
    std::vector<std::string> row{std::string(to_string(r.intensity)), fmt(r.offered_gbps),
                                 std::string(to_string(r.label)), fmt(r.weighted_share_pct)};
    for (double v : r.sdt_share_pct) row.push_back(fmt(v));
    row.push_back(fmt(r.colocated_gbps));
    row.push_back(fmt(r.reference_gbps));
    row.push_back(fmt(r.ratio));
    row.push_back(r.meets_90 ? "1" : "0");
    row.push_back(fmt(r.colocated.p99_us));
    row.push_back(fmt(r.reference.p99_us));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(std::ostream& out, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

void write_dat(std::ostream& out, const Table& t) {
  out << '#';
  for (const auto& h : t.header) out << ' ' << h;
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? " " : "") << r[i];
    out << '\n';
  }
}

void write_table(const std::string& stem, const Table& t) {
  std::ofstream csv(stem + ".csv");
  std::ofstream dat(stem + ".dat");
  if (!csv || !dat) throw std::runtime_error("cannot write " + stem + ".csv/.dat");
  write_csv(csv, t);
  write_dat(dat, t);
}

nlohmann::json to_json(const IntensityRow& r) {
  nlohmann::json shares;
  for (auto k : kAllStructures) shares[std::string(to_string(k))] = r.sdt_share_pct[idx(k)];
  return {{"intensity", std::string(to_string(r.intensity))},
          {"offered_gbps", r.offered_gbps},
          {"label", std::string(to_string(r.label))},
          {"sdt_share_pct", shares},
          {"weighted_sdt_share_pct", r.weighted_share_pct},
          {"colocated_gbps", r.colocated_gbps},
          {"reference_gbps", r.reference_gbps},
          {"ratio", r.ratio},
          {"meets_90pct", r.meets_90},
          {"colocated", to_json(r.colocated)},
          {"reference", to_json(r.reference)}};
}

nlohmann::json to_json(const CostStudy& c) {
  return {{"variant", to_json(c.variant_cost)},
          {"baseline", to_json(c.baseline_cost)},
          {"area_savings_pct", c.savings.area_pct},
          {"power_savings_pct", c.savings.power_pct},
          {"sdt_increment_pct", c.sdt_increment_pct}};
}

nlohmann::json to_json(const FlushOverhead& f) {
  return {{"period_cycles", f.period},  {"window_cycles", f.window}, {"flushes", f.flushes},
          {"base_ops", f.base_ops},     {"flushed_ops", f.flushed_ops}, {"base_pps", f.base_pps},
          {"flushed_pps", f.flushed_pps}, {"loss_pct", f.loss_pct}};
}

}  // namespace sdt
