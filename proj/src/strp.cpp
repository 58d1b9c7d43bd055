#include "sdt/strp.hpp"

namespace sdt {

RepartitionReceipt apply_strp(Core& core, const PartitionScheme& scheme, RepartitionMode mode) {
  const auto violations = validate(scheme, core.config());
  if (!violations.empty()) {
    std::string msg = "STRP rejected:";
    for (const auto& v : violations) msg += " " + std::string(to_string(v.kind)) + " (" + v.reason + ")";
    throw InvalidScheme(msg);
  }
  RepartitionReceipt r;
  r.mode = mode;
  r.old_label = core.scheme().label;
  r.new_label = scheme.label;
  r.penalty = mode == RepartitionMode::Flush ? core.flush() : core.drain();
  core.set_scheme(scheme);
  r.applied_at = core.now();
  return r;
}

RepartitionReceipt apply_strp(Core& core, StructureKind kind, ThreadLimits limits, RepartitionMode mode) {
  PartitionScheme s = core.scheme();
  s[kind] = limits;
  s.label = PresetLabel::Custom;
  return apply_strp(core, s, mode);
}

}  // namespace sdt
