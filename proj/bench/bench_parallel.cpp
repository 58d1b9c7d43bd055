#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "sdt/experiments.hpp"

using namespace sdt;

namespace {

double timed(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scenario point(std::uint64_t seed, Topology topology) {
  Scenario s;
  s.name = "bench" + std::to_string(seed);
  s.seed = seed;
  s.topology = topology;
  s.workload.processing = topology != Topology::DedicatedDeliveryCore;
  s.warmup_cycles = 20'000;
  s.measure_cycles = 200'000;
  return s;
}

std::string dump(const std::vector<MetricsReport>& reports) {
  std::string out;
  for (const auto& r : reports) out += to_json(r).dump();
  return out;
}

std::string dump(const std::vector<ScaleRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%u %a %a %a %a\n", r.cores, r.aggregate_gbps, r.aggregate_pps, r.speedup,
                  r.mean_extra_l3_latency);
    out += buf;
  }
  return out;
}

}  // namespace

// Serial reference against the OpenMP kernels; exits non-zero unless the
// outputs are bit-identical.
int main() {
  std::printf("threads %d\n", omp_get_max_threads());
  bool identical = true;

  std::vector<Scenario> batch;
  for (std::uint64_t i = 0; i < 8; ++i) {
    batch.push_back(point(i + 1, i % 2 ? Topology::ColocatedSmt : Topology::SplitCore));
  }
  std::vector<MetricsReport> serial, parallel;
  const double ts = timed([&] { serial = run_batch(batch, false); });
  const double tp = timed([&] { parallel = run_batch(batch, true); });
  const bool same_batch = dump(serial) == dump(parallel);
  identical = identical && same_batch;
  std::printf("run_batch  %zu points  serial %.2f s  parallel %.2f s  speedup %.2f  %s\n", batch.size(), ts, tp,
              ts / tp, same_batch ? "identical" : "DIFFERENT");

  const Scenario node = point(1, Topology::DedicatedDeliveryCore);
  const std::vector<std::uint32_t> counts{1, 2, 4};
  std::vector<ScaleRow> scale_serial, scale_parallel;
  ScaleOptions opt;
  opt.parallel = false;
  const double ss = timed([&] { scale_serial = scale(node, counts, opt); });
  opt.parallel = true;
  const double sp = timed([&] { scale_parallel = scale(node, counts, opt); });
  const bool same_scale = dump(scale_serial) == dump(scale_parallel);
  identical = identical && same_scale;
  std::printf("scale      N=1,2,4    serial %.2f s  parallel %.2f s  speedup %.2f  %s\n", ss, sp, ss / sp,
              same_scale ? "identical" : "DIFFERENT");

  return identical ? 0 : 1;
}
