#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "warmlab/core.hpp"
#include "warmlab/objectives.hpp"
#include "warmlab/rng.hpp"
#include "warmlab/schedules.hpp"

namespace warmlab {

/// Gradient-noise model. Every draw satisfies its support bound surely:
/// BoundedSphere keeps ||n|| <= sigma, ABC keeps
/// ||n||^2 <= A (f-f*) + B ||grad||^2 + sigma^2, and SubGaussianABC is
/// Gaussian with per-coordinate scale sqrt(c V / (2 d)) where V is the ABC
/// envelope, giving the tail P(||n|| >= t) <= 2 exp(-t^2 / (c V)).
struct NoiseSpec {
  enum class Kind { None, BoundedSphere, ABC, SubGaussianABC };
  Kind kind = Kind::None;
  double sigma = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;  // SubGaussianABC tail constant
  std::uint64_t seed = 0;
};

/// Draws noise vectors from a NoiseSpec. Consecutive draws form antithetic
/// pairs: the second draw reuses the first draw's direction and radius
/// fraction with the sign flipped, rescaled to the current envelope, so at a
/// fixed evaluation point pair sums are exactly zero while the per-draw
/// support bound always holds.
class NoiseSampler {
 public:
  NoiseSampler(const NoiseSpec& spec, std::size_t dim);

  std::vector<double> sample(const std::vector<double>& grad_w, double gap);

 private:
  NoiseSpec spec_;
  std::size_t dim_;
  CounterRng rng_;
  bool have_pending_ = false;
  double pending_u_ = 0.0;
  std::vector<double> pending_dir_;
};

/// One-shot draw matching the sampler above.
std::vector<double> sample_noise(const NoiseSpec& spec,
                                 const std::vector<double>& grad_w, double gap,
                                 NoiseSampler& state);

struct TrajectoryPoint {
  long long t;
  double eta;
  double f;
  double gap;
  double grad_norm;
  std::optional<double> est_smoothness;
};

/// Per-iteration record of a run plus summary statistics. The point list
/// holds one row per visited iterate (executed steps + 1) unless the run was
/// requested summary-only.
struct Trajectory {
  std::vector<TrajectoryPoint> points;
  ParamVector final_iterate;
  long long steps = 0;  // executed iterations
  bool diverged = false;
  long long diverged_at = -1;

  double min_grad_sq = std::numeric_limits<double>::infinity();
  std::optional<long long> iterations_to_eps;  // first t with ||grad|| <= eps
  double delta_avg_rho = 0.0;  // sum of gap_t^rho over executed steps, / steps
  double max_gap = 0.0;
  double sum_eta = 0.0;
  std::optional<double> initial_distance_to_minimizer;
};

struct RunOptions {
  bool record_points = true;
  bool record_est_smoothness = false;
  int estimator_n = 6;
};

/// w_{t+1} = w_t - eta_t grad f(w_t) until t = T or ||grad|| <= eps_stop.
/// Requires a deterministic (GD or baseline) schedule.
Trajectory run_gd(const Objective& obj, const ParamVector& w0,
                  const ScheduleSpec& schedule, long long big_t,
                  double eps_stop, const RunOptions& options = {});

/// w_{t+1} = w_t - eta_t (grad f(w_t) + n_t). A None noise spec reproduces
/// run_gd exactly; identical seeds give bit-identical trajectories.
Trajectory run_sgd(const Objective& obj, const ParamVector& w0,
                   const ScheduleSpec& schedule, const NoiseSpec& noise,
                   long long big_t, double eps_stop,
                   const RunOptions& options = {});

}  // namespace warmlab
