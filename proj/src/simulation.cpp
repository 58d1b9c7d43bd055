#include "sdt/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace sdt {

struct Simulation::Traffic {
  Traffic(const Scenario& s, const AddressMap& map, MemorySystem& memory, Cycle origin, std::uint64_t seed,
          bool with_processing)
      : rx(s.workload.ring_slots),
        payload(s.workload.payload_slots),
        nic(ArrivalProcess(s.workload.rate_gbps, s.workload.pkt_bytes, s.core.clock_ghz, mix64(seed, 1)),
            s.workload.pkt_bytes, rx, ledger, memory, map, origin) {
    DeliveryParams dp = s.workload.delivery;
    dp.seed = mix64(seed, 2);
    delivery = std::make_unique<DeliveryThread>(dp, map, rx, with_processing ? &payload : nullptr, ledger);
    if (with_processing) {
      ProcessingParams pp = s.workload.processing_params;
      pp.pkt_bytes = s.workload.pkt_bytes;
      pp.cycles_per_byte = s.cycles_per_byte();
      pp.seed = mix64(seed, 3);
      processing = std::make_unique<ProcessingThread>(pp, map, payload, ledger);
    }
  }

  DescriptorRing rx;
  PayloadRing payload;
  PacketLedger ledger;
  NicPort nic;
  std::unique_ptr<DeliveryThread> delivery;
  std::unique_ptr<ProcessingThread> processing;
  std::unique_ptr<ShiftedSource> delivery_src;
  std::unique_ptr<ShiftedSource> processing_src;
};

Simulation::Simulation(const Scenario& scenario, RunOptions options)
    : scenario_(scenario), options_(options) {
  scenario_.validate();
  const std::size_t n = scenario_.topology == Topology::SplitCore ? 2 : 1;
  memory_ = std::make_unique<MemorySystem>(scenario_.core, static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    cores_.push_back(std::make_unique<Core>(scenario_.core, *memory_, static_cast<std::uint8_t>(i)));
  }
  switch (scenario_.topology) {
    case Topology::ColocatedSmt:
      cores_[0]->set_scheme(scenario_.scheme());
      delivery_at_ = {0, ThreadId::Sdt};
      if (scenario_.workload.processing) processing_at_ = Placement{0, ThreadId::Main};
      break;
    case Topology::SplitCore:
      cores_[0]->set_scheme(single_thread_scheme(scenario_.core, ThreadId::Sdt));
      cores_[1]->set_scheme(single_thread_scheme(scenario_.core, ThreadId::Main));
      delivery_at_ = {0, ThreadId::Sdt};
      if (scenario_.workload.processing) processing_at_ = Placement{1, ThreadId::Main};
      break;
    case Topology::DedicatedDeliveryCore:
      cores_[0]->set_scheme(single_thread_scheme(scenario_.core, ThreadId::Sdt));
      delivery_at_ = {0, ThreadId::Sdt};
      break;
  }
  daemon_.current_label = cores_[0]->scheme().label;
  cores_[0]->set_pre_cycle_hook([this](Cycle now) {
    if (traffic_) traffic_->nic.tick(now);
  });
  start_traffic(scenario_.seed);
}

Simulation::~Simulation() = default;

const PacketLedger& Simulation::ledger() const { return traffic_->ledger; }

void Simulation::start_traffic(std::uint64_t seed) {
  for (auto& c : cores_) {
    c->bind(ThreadId::Sdt, nullptr);
    c->bind(ThreadId::Main, nullptr);
  }
  auto t = std::make_unique<Traffic>(scenario_, map_, *memory_, cores_[0]->now(), seed, processing_at_.has_value());
  Core& dc = *cores_[delivery_at_.core];
  t->delivery_src = std::make_unique<ShiftedSource>(*t->delivery, dc.next_op_index(delivery_at_.thread));
  dc.bind(delivery_at_.thread, t->delivery_src.get());
  if (processing_at_) {
    Core& pc = *cores_[processing_at_->core];
    t->processing_src = std::make_unique<ShiftedSource>(*t->processing, pc.next_op_index(processing_at_->thread));
    pc.bind(processing_at_->thread, t->processing_src.get());
  }
  traffic_ = std::move(t);
}

void Simulation::warm_up() {
  if (scenario_.warmup_cycles > 0) {
    start_traffic(mix64(scenario_.seed, 0x3a43));
    for (Cycle c = 0; c < scenario_.warmup_cycles; ++c) {
      for (auto& core : cores_) core->warm_functional(1);
    }
  }
  start_traffic(scenario_.seed);
  for (auto& core : cores_) core->reset_stats();
  measure_start_ = cores_[0]->now();
  measured_ = 0;
  l3_mark_ = memory_->l3_accesses;
  dram_mark_ = memory_->dram_accesses;
  dma_mark_ = memory_->dma_lines;
  daemon_mark_bytes_ = 0;
  daemon_.last_tick = measure_start_;
  if (options_.trace) cores_[0]->set_trace(options_.trace);
}

void Simulation::step_cycle() {
  for (auto& core : cores_) {
    core->step();
    if (auto k = core->zero_limit_stall()) {
      throw StallAbort("core " + std::to_string(core->id()) + ": a thread stalled " +
                       std::to_string(Core::kZeroLimitWarnCycles) + " cycles on " + std::string(to_string(*k)) +
                       ", whose limit is 0");
    }
  }
  const Cycle now = cores_[0]->now();
  if (options_.trace && now - measure_start_ >= options_.trace_cycles) {
    cores_[0]->set_trace(nullptr);
    options_.trace = nullptr;
  }
  if (options_.periodic_flush > 0 && (now - measure_start_) % options_.periodic_flush == 0) {
    receipts_.push_back(apply_strp(*cores_[0], cores_[0]->scheme(), RepartitionMode::Flush));
  }
  if (scenario_.daemon_enabled && scenario_.topology == Topology::ColocatedSmt) {
    const Cycle period = scenario_.daemon.period_cycles(scenario_.core.clock_ghz);
    if (now - daemon_.last_tick >= period) {
      const std::uint64_t bytes = traffic_->ledger.delivered_bytes();
      WindowMetrics w{bytes - daemon_mark_bytes_, now - daemon_.last_tick, scenario_.core.clock_ghz};
      daemon_mark_bytes_ = bytes;
      if (auto r = daemon_tick(daemon_, *cores_[0], w, scenario_.daemon)) {
        receipts_.push_back(*r);
        // A drain steps the core; the window restarts after the STRP.
        daemon_.last_tick = cores_[0]->now();
        daemon_mark_bytes_ = traffic_->ledger.delivered_bytes();
        for (std::size_t i = 1; i < cores_.size(); ++i) {
          while (cores_[i]->now() < cores_[0]->now()) cores_[i]->step();
        }
      }
    }
  }
}

void Simulation::advance(Cycle cycles) {
  const Cycle end = cores_[0]->now() + cycles;
  while (cores_[0]->now() < end) step_cycle();
  measured_ = cores_[0]->now() - measure_start_;
}

std::uint64_t Simulation::unfinished_packets() const {
  return static_cast<std::uint64_t>(std::count_if(traffic_->ledger.records().begin(),
                                                  traffic_->ledger.records().end(),
                                                  [](const PacketRecord& r) { return !r.processed; }));
}

MetricsReport Simulation::report() const {
  MetricsReport r;
  const auto& s = scenario_;
  const auto& ledger = traffic_->ledger;
  r.scenario = s.name;
  r.topology = s.topology;
  r.seed = s.seed;
  r.measured_cycles = measured_;
  r.clock_ghz = s.core.clock_ghz;
  r.offered_gbps = s.workload.rate_gbps;
  const double seconds = measured_ / (s.core.clock_ghz * 1e9);
  if (seconds > 0) {
    r.throughput_gbps = ledger.processed_bytes() * 8.0 / seconds / 1e9;
    r.throughput_pps = ledger.processed() / seconds;
    r.delivered_gbps = ledger.delivered_bytes() * 8.0 / seconds / 1e9;
    r.delivered_pps = ledger.delivered() / seconds;
  }
  std::vector<double> sojourn;
  for (const auto& p : ledger.records()) {
    if (p.processed) sojourn.push_back(static_cast<double>(p.processing_done_cycle - p.arrival_cycle));
  }
  r.p50_cycles = percentile(sojourn, 0.50);
  r.p99_cycles = percentile(sojourn, 0.99);
  r.p50_us = r.p50_cycles / (s.core.clock_ghz * 1e3);
  r.p99_us = r.p99_cycles / (s.core.clock_ghz * 1e3);
  r.injected = ledger.injected();
  r.dropped = ledger.dropped();
  r.delivered = ledger.delivered();
  r.processed = ledger.processed();
  r.in_flight = ledger.in_flight();
  r.l3_accesses = memory_->l3_accesses - l3_mark_;
  r.dram_accesses = memory_->dram_accesses - dram_mark_;
  r.dma_lines = memory_->dma_lines - dma_mark_;

  for (const auto& c : cores_) {
    CoreMetrics cm;
    cm.id = c->id();
    cm.activity = c->activity();
    cm.scheme = c->scheme();
    const double cyc = static_cast<double>(std::max<Cycle>(1, c->stats_cycles()));
    for (auto t : kAllThreads) {
      ThreadMetrics tm;
      tm.thread = t;
      tm.role = "idle";
      if (delivery_at_.core == c->id() && delivery_at_.thread == t) tm.role = "delivery";
      if (processing_at_ && processing_at_->core == c->id() && processing_at_->thread == t) tm.role = "processing";
      tm.committed = c->committed(t);
      tm.ipc = tm.committed / cyc;
      cm.threads.push_back(tm);
      for (auto k : kAllStructures) {
        const auto& o = c->occupancy(k, t);
        cm.occupancy.push_back({k, t, o.sum / cyc, o.max, c->limit(k, t)});
      }
    }
    r.cores.push_back(std::move(cm));
  }
  r.receipts = receipts_;
  if (s.daemon_enabled && s.topology == Topology::ColocatedSmt) {
    r.daemon_label = daemon_.current_label;
    r.daemon_ticks = daemon_.ticks;
  }
  return r;
}

MetricsReport run(const Scenario& scenario, const RunOptions& options) {
  Simulation sim(scenario, options);
  sim.warm_up();
  sim.advance(scenario.measure_cycles);
  return sim.report();
}

}  // namespace sdt
