#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sdt/experiments.hpp"
#include "sdt/strp.hpp"

namespace fs = std::filesystem;
using namespace sdt;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  bool fast = false;
  std::string out;
  bool trace = false;
  std::string scenario_file;
  bool serial = false;
};

Scenario base_scenario(const Common& c, const Scenario& fallback) {
  Scenario s = c.scenario_file.empty() ? fallback : load_scenario(c.scenario_file);
  if (c.fast) apply_fast_profile(s);
  if (c.seed) s.seed = *c.seed;
  s.validate();
  return s;
}

Scenario delivery_only() {
  Scenario s;
  s.name = "delivery";
  s.topology = Topology::DedicatedDeliveryCore;
  s.workload.rate_gbps = kMaxRate;
  s.workload.processing = false;
  return s;
}

std::string out_path(const Common& c, const std::string& file) {
  if (c.out.empty()) return {};
  fs::create_directories(c.out);
  return (fs::path(c.out) / file).string();
}

void emit_json(const Common& c, const std::string& file, const nlohmann::json& j) {
  std::cout << j.dump(2) << '\n';
  if (auto p = out_path(c, file); !p.empty()) std::ofstream(p) << j.dump(2) << '\n';
}

void emit_table(const Common& c, const std::string& stem, const Table& t) {
  write_csv(std::cout, t);
  if (auto p = out_path(c, stem); !p.empty()) write_table(p, t);
}

// `cost --cores 20 --sdt vs --cores 40` names two CMPs; give each side's
// options distinct names before CLI11 sees them.
std::vector<std::string> rewrite_cost_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2 || args[1] != "cost") return args;
  std::vector<std::string> out;
  bool after_vs = false;
  for (auto& a : args) {
    if (a == "vs") {
      after_vs = true;
      continue;
    }
    if (a == "--cores" || a == "--sdt") a = (after_vs ? "--baseline-" : "--variant-") + a.substr(2);
    out.push_back(a);
  }
  return out;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "RNG seed");
  app->add_flag("--fast", c.fast, "CI profile: 1.2 M measured cycles");
  app->add_option("--out", c.out, "Directory for CSV/JSON/.dat output");
  app->add_option("--scenario", c.scenario_file, "Base scenario file");
  app->add_flag("--serial", c.serial, "Run design points one at a time");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous data-delivery thread simulator"};
  app.require_subcommand(1);

  Common common;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and print its report");
  std::string run_file;
  run_cmd->add_option("scenario", run_file, "Scenario file")->required();
  run_cmd->add_option("--seed", common.seed, "RNG seed");
  run_cmd->add_flag("--fast", common.fast, "CI profile: 1.2 M measured cycles");
  run_cmd->add_option("--out", common.out, "Directory for report.json and trace.csv");
  run_cmd->add_flag("--trace", common.trace, "Per-cycle trace of the first 10k measured cycles");

  auto* sweep_cmd = app.add_subcommand("sweep", "Delivery throughput across sizes of one structure");
  std::string structure;
  std::vector<std::uint64_t> sizes;
  sweep_cmd->add_option("--structure", structure, "Parameter to sweep")->required();
  sweep_cmd->add_option("--sizes", sizes, "Comma-separated sizes (caches in KiB)")->required()->delimiter(',');
  add_common(sweep_cmd, common);

  auto* scale_cmd = app.add_subcommand("scale", "Aggregate delivery throughput over N cores");
  std::vector<std::uint32_t> counts{1, 2, 4, 8};
  bool no_contention = false;
  scale_cmd->add_option("--cores", counts, "Comma-separated core counts")->delimiter(',');
  scale_cmd->add_flag("--no-contention", no_contention, "Disable the shared-LLC latency model");
  add_common(scale_cmd, common);

  auto* intensity_cmd = app.add_subcommand("intensity", "Co-located SDT vs two dedicated cores per intensity");
  add_common(intensity_cmd, common);

  auto* cost_cmd = app.add_subcommand("cost", "Area and power of two CMPs: cost --cores 20 --sdt vs --cores 40");
  CmpSpec variant{20, true};
  CmpSpec baseline{40, false};
  std::string coefficients;
  cost_cmd->add_option("--variant-cores", variant.cores)->check(CLI::PositiveNumber);
  cost_cmd->add_flag("--variant-sdt", variant.sdt);
  cost_cmd->add_option("--baseline-cores", baseline.cores)->check(CLI::PositiveNumber);
  cost_cmd->add_flag("--baseline-sdt", baseline.sdt);
  cost_cmd->add_option("--coefficients", coefficients, "Cost coefficient file");
  add_common(cost_cmd, common);

  auto args = rewrite_cost_args(argc, argv);
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const bool parallel = !common.serial;
    if (*run_cmd) {
      Scenario s = load_scenario(run_file);
      if (common.fast) apply_fast_profile(s);
      if (common.seed) s.seed = *common.seed;
      s.validate();
      RunOptions opt;
      std::ofstream trace;
      if (common.trace) {
        const auto p = out_path(common, "trace.csv");
        if (p.empty()) {
          opt.trace = &std::cerr;
        } else {
          trace.open(p);
          opt.trace = &trace;
        }
      }
      emit_json(common, "report.json", to_json(run(s, opt)));
    } else if (*sweep_cmd) {
      const auto rows = sweep(base_scenario(common, delivery_only()), structure, sizes, parallel);
      emit_table(common, "sweep_" + structure, to_table(rows));
    } else if (*scale_cmd) {
      ScaleOptions opt;
      opt.contention = !no_contention;
      opt.parallel = parallel;
      emit_table(common, "scale", to_table(scale(base_scenario(common, delivery_only()), counts, opt)));
    } else if (*intensity_cmd) {
      const Scenario base = base_scenario(common, Scenario{});
      const auto rows = intensity_study(base, {Intensity::Low, Intensity::Medium, Intensity::High},
                                        CostModel::defaults(), parallel);
      emit_table(common, "intensity", to_table(rows));
      if (auto p = out_path(common, "intensity.json"); !p.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) j.push_back(to_json(r));
        std::ofstream(p) << j.dump(2) << '\n';
      }
    } else if (*cost_cmd) {
      const Scenario base = base_scenario(common, Scenario{});
      const auto model = coefficients.empty() ? CostModel::defaults() : CostModel::load(coefficients);
      const auto rows = intensity_study(base, {Intensity::Low, Intensity::Medium, Intensity::High}, model, parallel);
      emit_json(common, "cost.json", to_json(cost_from_runs(model, base.core, variant, baseline, rows)));
    }
  } catch (const StallAbort& e) {
    std::cerr << "stall abort: " << e.what() << '\n';
    return 3;
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const InvalidScheme& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
