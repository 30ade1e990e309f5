#include <algorithm>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "mpsim/scenario.hpp"

namespace {

void print_summary(const mpsim::RunSummary& s) {
  std::printf("total_bytes: %llu\n", static_cast<unsigned long long>(s.total_bytes));
  std::printf("handover_count: %d\n", s.handover_count);
  std::printf("max_delivery_gap_s: %.3f\n", s.max_delivery_gap_s);
  for (const auto& p : s.phases) {
    std::printf("phase [%.1f, %.1f) total %.3f Mbps |", p.start_s, p.end_s,
                p.mean_total_mbps);
    for (const auto& [id, v] : p.mean_bitrate_mbps) {
      std::printf(" subflow %d: %.3f Mbps", id, v);
    }
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mpsim: multipath-TCP-over-one-radio scenario simulator"};
  app.require_subcommand(1);

  std::string config_path, builtin, out_dir, in_dir;
  uint64_t seed = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "Run a scenario and write CSV metrics");
  auto* copt = run->add_option("--config", config_path, "Scenario config (JSON)");
  auto* bopt = run->add_option("--builtin", builtin, "Builtin scenario: baseline|delay200");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the config seed")
      ->each([&](const std::string&) { seed_set = true; });
  copt->excludes(bopt);

  CLI::App* summ = app.add_subcommand("summarize", "Summarize a previous run directory");
  summ->add_option("--in", in_dir, "Directory with metrics.csv and events.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      mpsim::ScenarioConfig cfg;
      if (!builtin.empty()) {
        cfg = mpsim::builtin_scenario(builtin);
      } else if (!config_path.empty()) {
        cfg = mpsim::load_config(config_path);
      } else {
        std::fprintf(stderr, "error: run needs --config or --builtin\n");
        return 2;
      }
      if (seed_set) cfg.seed = seed;
      mpsim::RunResult result = mpsim::run_scenario(cfg);
      mpsim::write_run_outputs(result, out_dir);
      print_summary(result.summary);
      std::printf("wrote %s/metrics.csv, events.csv, summary.json\n", out_dir.c_str());
    } else if (summ->parsed()) {
      auto metrics = mpsim::read_metrics_csv(in_dir + "/metrics.csv");
      auto events = mpsim::read_events_csv(in_dir + "/events.csv");
      double duration = 0, bin = 1.0;
      for (const auto& r : metrics) {
        if (r.bin_start_s > metrics.front().bin_start_s) {
          bin = r.bin_start_s - metrics.front().bin_start_s;
          break;
        }
      }
      for (const auto& r : metrics) duration = std::max(duration, r.bin_start_s + bin);
      print_summary(mpsim::summarize(metrics, events, duration, bin));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
