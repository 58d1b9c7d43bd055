#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdt/power_area.hpp"
#include "sdt/simulation.hpp"

namespace sdt {

// Runs every scenario; design points are independent, so the parallel
// version returns exactly what the serial one does. The first failure (by
// index) is rethrown after all points finish.
std::vector<MetricsReport> run_batch(const std::vector<Scenario>& scenarios, bool parallel = true);

// ---------------------------------------------------------------------------
// Sensitivity sweeps.

// Parameter names accepted by with_parameter: the partitioned structures'
// entry counts (iq, lq, sq, rob, btb, int_reg, fp_reg, vec_reg, itlb, dtlb),
// cache sizes in KiB (l1i_kb, l1d_kb, l2_kb, l3_kb), superscalar width
// (functional units rescale with it) and unit counts (int_units, fp_units,
// vec_units, load_ports, store_ports).
const std::vector<std::string_view>& sweep_parameters();

// Copy of `base` with one core parameter changed. Throws ConfigError for an
// unknown parameter.
Scenario with_parameter(const Scenario& base, std::string_view param, std::uint64_t value);

// Current value of a sweep parameter, in with_parameter's units.
std::uint64_t parameter_value(const CoreConfig& config, std::string_view param);

struct SweepRow {
  std::uint64_t size = 0;
  double throughput_gbps = 0.0;
  double throughput_pps = 0.0;
  double p99_cycles = 0.0;
  double ratio_to_max = 0.0;
  bool above_90 = false;
};

// One run per size, in the order given. Throws ConfigError if `sizes` is
// empty or any point fails validation (before anything runs).
std::vector<SweepRow> sweep(const Scenario& base, std::string_view param, const std::vector<std::uint64_t>& sizes,
                            bool parallel = true);

// ---------------------------------------------------------------------------
// Delivery scaling over N cores, each with its own NIC queue and LLC slice.

struct ScaleOptions {
  // Adds the shared-LLC latency model between epochs.
  bool contention = true;
  bool parallel = true;
  Cycle epoch_cycles = 100'000;
};

struct ScaleRow {
  std::uint32_t cores = 0;
  double aggregate_gbps = 0.0;
  double aggregate_pps = 0.0;
  double speedup = 0.0;  // over the first row's per-core throughput
  double mean_extra_l3_latency = 0.0;
};

// Extra LLC cycles for `cores` cores whose slices see `load` accesses per
// cycle each: ring hops (cores / 4) plus the M/D/1 queueing delay
// rho / (2 (1 - rho)) with rho clamped to 0.95, rounded to the nearest cycle.
std::uint32_t llc_extra_latency(std::uint32_t cores, double load);

// Each node runs the base scenario's delivery path on a dedicated core at
// max rate. Node i > 0 uses seed mix64(seed, i).
std::vector<ScaleRow> scale(const Scenario& base, const std::vector<std::uint32_t>& core_counts,
                            const ScaleOptions& options = {});

// ---------------------------------------------------------------------------
// Intensity study: co-located SDT + MAIN under the daemon against delivery
// and processing on two dedicated cores.

struct IntensityRow {
  Intensity intensity = Intensity::Medium;
  double offered_gbps = 0.0;
  PresetLabel label = PresetLabel::Baseline;
  std::array<double, kStructureKinds> sdt_share_pct{};
  double weighted_share_pct = 0.0;
  double colocated_gbps = 0.0;
  double reference_gbps = 0.0;
  double ratio = 0.0;
  bool meets_90 = false;
  MetricsReport colocated;
  MetricsReport reference;
};

// Bounds on the area-weighted SDT share across presets.
inline constexpr double kShareBandLow = 3.6;
inline constexpr double kShareBandHigh = 35.3;

std::vector<IntensityRow> intensity_study(const Scenario& base, const std::vector<Intensity>& presets,
                                          const CostModel& model, bool parallel = true);

// ---------------------------------------------------------------------------
// CMP cost comparison.

struct CmpSpec {
  std::uint32_t cores = 0;
  bool sdt = false;
};

struct CostStudy {
  CmpSpec variant;
  CmpSpec baseline;
  CmpCost variant_cost;
  CmpCost baseline_cost;
  Savings savings;
  // SDT additions on one core, in percent of its area.
  double sdt_increment_pct = 0.0;
};

// Activity from intensity-study runs, averaged over the presets: SDT cores
// use the co-located core's rates; single-thread cores alternate between the
// split reference's delivery and processing cores.
CostStudy cost_from_runs(const CostModel& model, const CoreConfig& config, CmpSpec variant, CmpSpec baseline,
                         const std::vector<IntensityRow>& runs);

// ---------------------------------------------------------------------------
// Throughput cost of periodic flush re-partitions on max-rate delivery.

struct FlushOverhead {
  Cycle period = 0;
  Cycle window = 0;
  std::uint64_t flushes = 0;
  std::uint64_t base_ops = 0;
  std::uint64_t flushed_ops = 0;
  double base_pps = 0.0;
  double flushed_pps = 0.0;
  // Committed-op loss, in percent.
  double loss_pct = 0.0;
};

FlushOverhead flush_overhead(const Scenario& base, Cycle period, Cycle window);

// ---------------------------------------------------------------------------
// Output.

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table to_table(const std::vector<SweepRow>& rows);
Table to_table(const std::vector<ScaleRow>& rows);
Table to_table(const std::vector<IntensityRow>& rows);

void write_csv(std::ostream& out, const Table& t);
// Whitespace-separated with a '#' header, for gnuplot.
void write_dat(std::ostream& out, const Table& t);
// Writes <stem>.csv and <stem>.dat.
void write_table(const std::string& stem, const Table& t);

nlohmann::json to_json(const IntensityRow& r);
nlohmann::json to_json(const CostStudy& c);
nlohmann::json to_json(const FlushOverhead& f);

}  // namespace sdt
