#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warmlab/adversary.hpp"
#include "warmlab/objectives.hpp"
#include "warmlab/optimize.hpp"
#include "warmlab/schedules.hpp"

namespace warmlab {

struct ScheduleConfig {
  std::string label;
  ScheduleSpec spec;
};

/// One experiment: an objective, schedules to run, run budgets, a noise
/// model with seeds, and an output directory. `kind` selects compare,
/// verify, adversary, or fit behavior.
struct ExperimentConfig {
  std::string kind;
  std::string objective_name;
  std::map<std::string, double> objective_params;
  std::optional<ParamVector> w0;
  std::vector<ScheduleConfig> schedules;
  long long big_t = 1000;
  double eps_stop = 0.0;
  NoiseSpec noise;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  std::map<std::string, double> tolerances;
  long long record_every = 1;  // CSV row thinning for long runs

  // verify budgets
  long long verify_samples = 100000;
  long long verify_pairs = 10000;
  long long verify_fd_points = 100;
  long long verify_hp_seeds = 100;
  double corrupt_krho_factor = 1.0;       // negative control hook
  std::string corrupt_objective;

  // adversary experiment
  std::vector<double> adv_etas;
  double adv_k1 = 1.0;
  double adv_delta = 1.0;
  double adv_eps = 0.1;
  long long adv_t_max = 100000;

  // fit experiment
  int fit_estimator_n = 6;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);

struct ScheduleOutcome {
  std::string label;
  bool censored = true;
  double iterations_to_eps = 0.0;  // median across seeds
  double min_grad_sq = 0.0;        // median across seeds
  double delta_avg_rho = 0.0;      // median across seeds
  long long diverged_runs = 0;
  double wall_ms = 0.0;  // not serialized; outputs stay deterministic
};

struct ComparisonReport {
  struct Ratio {
    std::string numerator;
    std::string denominator;
    bool valid = false;  // both runs reached eps_stop
    double value = 0.0;
  };
  std::vector<ScheduleOutcome> per_schedule;
  std::vector<Ratio> ratios;
};

/// Runs every (schedule, seed) pair, aggregates medians across seeds, and
/// fills pairwise iteration ratios (numerator/denominator), valid only when
/// both sides reached eps_stop. Independent runs may execute concurrently;
/// aggregation is keyed and order-independent.
ComparisonReport compare_schedules(const Objective& obj,
                                   const std::vector<ScheduleConfig>& schedules,
                                   const ParamVector& w0, long long big_t,
                                   double eps_stop, const NoiseSpec& noise,
                                   const std::vector<std::uint64_t>& seeds,
                                   std::vector<Trajectory>* trajectories = nullptr);

std::string comparison_report_csv(const ComparisonReport& report);

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  std::string detail;
};

/// Runs the invariant-checking suite at the configured budgets; per-check
/// pass/fail with the worst observed violation.
std::vector<CheckResult> verify_suite(const ExperimentConfig& config);

std::string checks_csv(const std::vector<CheckResult>& checks);

/// Executes the configured experiment and writes its CSV outputs. Returns
/// the process exit status: 0 success, 1 check failure.
/// Configuration errors throw std::invalid_argument (exit status 2 at the
/// CLI).
int run_experiment(const ExperimentConfig& config);

}  // namespace warmlab
