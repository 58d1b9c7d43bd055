#include "sdt/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace sdt {

double percentile(std::vector<double> sample, double q) {
  if (sample.empty()) return 0.0;
  const auto n = sample.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(rank - 1), sample.end());
  return sample[rank - 1];
}

nlohmann::json to_json(const ActivityCounters& a) {
  return {
      {"cycles", a.cycles},
      {"fetched", a.fetched},
      {"dispatched", a.dispatched},
      {"issued", a.issued},
      {"committed", a.committed},
      {"int_ops", a.int_ops},
      {"fp_ops", a.fp_ops},
      {"vec_ops", a.vec_ops},
      {"loads", a.loads},
      {"stores", a.stores},
      {"branches", a.branches},
      {"reg_reads", a.reg_reads},
      {"reg_writes", a.reg_writes},
      {"l1i_accesses", a.l1i_accesses},
      {"l1d_accesses", a.l1d_accesses},
      {"l2_accesses", a.l2_accesses},
      {"l3_accesses", a.l3_accesses},
      {"dram_accesses", a.dram_accesses},
      {"itlb_accesses", a.itlb_accesses},
      {"dtlb_accesses", a.dtlb_accesses},
      {"btb_accesses", a.btb_accesses},
      {"flushed_ops", a.flushed_ops},
  };
}

nlohmann::json to_json(const PartitionScheme& s) {
  nlohmann::json j;
  j["label"] = std::string(to_string(s.label));
  for (auto k : kAllStructures) j["limits"][std::string(to_string(k))] = {s[k].sdt, s[k].main};
  return j;
}

nlohmann::json to_json(const RepartitionReceipt& r) {
  return {
      {"applied_at", r.applied_at},
      {"mode", std::string(to_string(r.mode))},
      {"penalty", r.penalty},
      {"old_label", std::string(to_string(r.old_label))},
      {"new_label", std::string(to_string(r.new_label))},
  };
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["topology"] = std::string(to_string(r.topology));
  j["seed"] = r.seed;
  j["measured_cycles"] = r.measured_cycles;
  j["clock_ghz"] = r.clock_ghz;
  j["offered_gbps"] = std::isinf(r.offered_gbps) ? nlohmann::json("max") : nlohmann::json(r.offered_gbps);
  j["throughput_gbps"] = r.throughput_gbps;
  j["throughput_pps"] = r.throughput_pps;
  j["delivered_gbps"] = r.delivered_gbps;
  j["delivered_pps"] = r.delivered_pps;
  j["latency"] = {{"p50_cycles", r.p50_cycles}, {"p99_cycles", r.p99_cycles}, {"p50_us", r.p50_us}, {"p99_us", r.p99_us}};
  j["packets"] = {{"injected", r.injected},   {"dropped", r.dropped},     {"delivered", r.delivered},
                  {"processed", r.processed}, {"in_flight", r.in_flight}};
  j["memory"] = {{"l3_accesses", r.l3_accesses}, {"dram_accesses", r.dram_accesses}, {"dma_lines", r.dma_lines}};
  j["cores"] = nlohmann::json::array();
  for (const auto& c : r.cores) {
    nlohmann::json cj;
    cj["id"] = c.id;
    for (const auto& t : c.threads) {
      cj["threads"].push_back(
          {{"thread", std::string(to_string(t.thread))}, {"role", t.role}, {"committed", t.committed}, {"ipc", t.ipc}});
    }
    for (const auto& o : c.occupancy) {
      cj["occupancy"].push_back({{"structure", std::string(to_string(o.kind))},
                                 {"thread", std::string(to_string(o.thread))},
                                 {"mean", o.mean},
                                 {"max", o.max},
                                 {"limit", o.limit}});
    }
    cj["activity"] = to_json(c.activity);
    cj["scheme"] = to_json(c.scheme);
    j["cores"].push_back(cj);
  }
  j["receipts"] = nlohmann::json::array();
  for (const auto& rc : r.receipts) j["receipts"].push_back(to_json(rc));
  if (r.daemon_label) {
    j["daemon"] = {{"label", std::string(to_string(*r.daemon_label))}, {"ticks", r.daemon_ticks}};
  }
  return j;
}

}  // namespace sdt
