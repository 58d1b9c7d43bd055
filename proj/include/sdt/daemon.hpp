#pragma once

#include <optional>

#include "sdt/core.hpp"
#include "sdt/partition.hpp"
#include "sdt/strp.hpp"

namespace sdt {

struct DaemonConfig {
  double period_ms = 1.0;
  // Load at or above low_floor selects the Low-intensity preset, below
  // high_ceiling the High-intensity preset, Medium in between.
  double low_floor_gbps = 6.0;
  double high_ceiling_gbps = 1.0;
  double ewma_alpha = 0.5;
  double hysteresis_gbps = 0.25;
  RepartitionMode mode = RepartitionMode::Flush;
  // Observations are clamped to the NIC line rate.
  double line_rate_gbps = 100.0;

  void validate() const;
  Cycle period_cycles(double clock_ghz) const;
};

struct DaemonState {
  double ewma_load = 0.0;
  bool primed = false;
  PresetLabel current_label = PresetLabel::Baseline;
  Cycle last_tick = 0;
  std::uint64_t ticks = 0;
  std::uint64_t strps = 0;
};

struct WindowMetrics {
  std::uint64_t delivered_bytes = 0;
  Cycle cycles = 0;
  double clock_ghz = 3.0;
};

// Bits delivered per second over the window, before any clamping.
double window_load_gbps(const WindowMetrics& w);

// Folds the window's load (clamped to line rate) into the EWMA; the first
// observation initializes it. Returns the new EWMA.
double observe(DaemonState& state, const WindowMetrics& w, const DaemonConfig& config);

// Class for `load` with no history.
PresetLabel classify(double load_gbps, const DaemonConfig& config);

// Class for `load` given the current label: leaving a class requires
// crossing its boundary by the hysteresis margin.
PresetLabel select_class(double load_gbps, const DaemonState& state, const DaemonConfig& config);

// One daemon period: observe, select, and issue an STRP only on a change.
std::optional<RepartitionReceipt> daemon_tick(DaemonState& state, Core& core, const WindowMetrics& w,
                                              const DaemonConfig& config);

}  // namespace sdt
