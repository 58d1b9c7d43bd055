#include "sdt/daemon.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace sdt {

void DaemonConfig::validate() const {
  if (!(period_ms > 0.0)) throw ConfigError("daemon.period_ms must be > 0");
  if (!(high_ceiling_gbps < low_floor_gbps)) throw ConfigError("daemon thresholds need high_ceiling < low_floor");
  if (!(ewma_alpha > 0.0 && ewma_alpha <= 1.0)) throw ConfigError("daemon.ewma_alpha must be in (0, 1]");
  if (hysteresis_gbps < 0.0) throw ConfigError("daemon.hysteresis must be >= 0");
  if (!(line_rate_gbps > 0.0)) throw ConfigError("daemon.line_rate_gbps must be > 0");
}

Cycle DaemonConfig::period_cycles(double clock_ghz) const {
  return static_cast<Cycle>(std::llround(period_ms * 1e-3 * clock_ghz * 1e9));
}

double window_load_gbps(const WindowMetrics& w) {
  if (w.cycles == 0) return 0.0;
  const double seconds = static_cast<double>(w.cycles) / (w.clock_ghz * 1e9);
  return static_cast<double>(w.delivered_bytes) * 8.0 / seconds / 1e9;
}

double observe(DaemonState& state, const WindowMetrics& w, const DaemonConfig& config) {
  const double load = std::min(window_load_gbps(w), config.line_rate_gbps);
  if (!state.primed) {
    state.ewma_load = load;
    state.primed = true;
  } else {
    state.ewma_load = config.ewma_alpha * load + (1.0 - config.ewma_alpha) * state.ewma_load;
  }
  return state.ewma_load;
}

namespace {

// Ordered by SDT share.
constexpr std::array<PresetLabel, 3> kClasses{PresetLabel::HighIntensity, PresetLabel::MediumIntensity,
                                              PresetLabel::LowIntensity};

int rank(PresetLabel l) {
  for (int i = 0; i < 3; ++i) {
    if (kClasses[i] == l) return i;
  }
  return -1;
}

}  // namespace

PresetLabel classify(double load, const DaemonConfig& c) {
  if (load >= c.low_floor_gbps) return PresetLabel::LowIntensity;
  if (load >= c.high_ceiling_gbps) return PresetLabel::MediumIntensity;
  return PresetLabel::HighIntensity;
}

PresetLabel select_class(double load, const DaemonState& state, const DaemonConfig& c) {
  int at = rank(state.current_label);
  if (at < 0) return classify(load, c);
  const std::array<double, 2> boundary{c.high_ceiling_gbps, c.low_floor_gbps};
  const double m = c.hysteresis_gbps;
  while (at < 2 && load >= boundary[at] + m) ++at;
  while (at > 0 && load < boundary[at - 1] - m) --at;
  return kClasses[at];
}

std::optional<RepartitionReceipt> daemon_tick(DaemonState& state, Core& core, const WindowMetrics& w,
                                              const DaemonConfig& config) {
  const double load = observe(state, w, config);
  state.last_tick = core.now();
  ++state.ticks;
  const PresetLabel next = select_class(load, state, config);
  if (next == state.current_label) return std::nullopt;
  auto receipt = apply_strp(core, preset_scheme(core.config(), next), config.mode);
  state.current_label = next;
  ++state.strps;
  return receipt;
}

}  // namespace sdt
