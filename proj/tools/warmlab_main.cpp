#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "warmlab/harness.hpp"

namespace {

// Splits "1,2,3" into seed values.
std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string tok = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warmlab: schedule comparisons, invariant verification, hard "
               "instances, and certificate fits over the analytic test "
               "suite"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds_csv;
  long long t_override = -1;
  double eps_override = -1.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seeds", seeds_csv, "comma-separated seed list");
    sub->add_option("--t", t_override, "iteration budget T");
    sub->add_option("--eps", eps_override, "stationarity threshold");
  };

  CLI::App* cmd_compare =
      app.add_subcommand("compare", "run schedules and report speedups");
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "run the invariant-checking suite");
  CLI::App* cmd_adversary =
      app.add_subcommand("adversary", "build and measure a hard instance");
  CLI::App* cmd_fit =
      app.add_subcommand("fit", "fit a certificate from a trajectory");
  for (CLI::App* sub : {cmd_compare, cmd_verify, cmd_adversary, cmd_fit}) {
    add_common(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    warmlab::ExperimentConfig config = warmlab::load_config(config_path);
    if (app.got_subcommand(cmd_compare)) config.kind = "compare";
    if (app.got_subcommand(cmd_verify)) config.kind = "verify";
    if (app.got_subcommand(cmd_adversary)) config.kind = "adversary";
    if (app.got_subcommand(cmd_fit)) config.kind = "fit";

    if (!out_dir.empty()) {
      config.out_dir = out_dir;
    } else if (const char* env = std::getenv("WARMLAB_OUT")) {
      if (config.out_dir == "out") config.out_dir = env;
    }
    if (!seeds_csv.empty()) config.seeds = parse_seed_list(seeds_csv);
    if (t_override >= 0) {
      config.big_t = t_override;
      for (warmlab::ScheduleConfig& s : config.schedules) {
        s.spec.horizon = t_override;
      }
    }
    if (eps_override >= 0.0) config.eps_stop = eps_override;

    const int status = warmlab::run_experiment(config);
    if (status != 0) {
      std::cerr << "checks failed (see " << config.out_dir << ")\n";
    }
    return status;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
