#include "warmlab/optimize.hpp"

#include <cmath>
#include <stdexcept>

#include "warmlab/smoothness.hpp"

namespace warmlab {

NoiseSampler::NoiseSampler(const NoiseSpec& spec, std::size_t dim)
    : spec_(spec), dim_(dim), rng_(mix64(spec.seed)) {
  if (!(spec.sigma >= 0.0) || !(spec.a >= 0.0) || !(spec.b >= 0.0)) {
    throw std::invalid_argument("NoiseSampler: sigma, A, B must be >= 0");
  }
  if (spec.kind == NoiseSpec::Kind::SubGaussianABC && !(spec.c > 0.0)) {
    throw std::invalid_argument("NoiseSampler: c must be > 0");
  }
}

std::vector<double> NoiseSampler::sample(const std::vector<double>& grad_w,
                                         double gap) {
  if (spec_.kind == NoiseSpec::Kind::None) {
    return std::vector<double>(dim_, 0.0);
  }
  const double envelope2 = spec_.a * std::max(gap, 0.0) +
                           spec_.b * dot(grad_w, grad_w) +
                           spec_.sigma * spec_.sigma;

  if (spec_.kind == NoiseSpec::Kind::SubGaussianABC) {
    const double per_coord =
        std::sqrt(spec_.c * envelope2 / (2.0 * static_cast<double>(dim_)));
    std::vector<double> n(dim_);
    if (have_pending_) {
      for (std::size_t i = 0; i < dim_; ++i) {
        n[i] = -pending_dir_[i] * per_coord;
      }
      have_pending_ = false;
    } else {
      pending_dir_.resize(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        pending_dir_[i] = rng_.next_gaussian();
        n[i] = pending_dir_[i] * per_coord;
      }
      have_pending_ = true;
    }
    return n;
  }

  // Spherical uniform-radius noise; the radius is the hard support bound.
  const double radius = spec_.kind == NoiseSpec::Kind::BoundedSphere
                            ? spec_.sigma
                            : std::sqrt(envelope2);
  std::vector<double> n(dim_);
  if (have_pending_) {
    for (std::size_t i = 0; i < dim_; ++i) {
      n[i] = -pending_u_ * radius * pending_dir_[i];
    }
    have_pending_ = false;
  } else {
    pending_u_ = rng_.next_unit();
    pending_dir_ = rng_.next_unit_sphere(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      n[i] = pending_u_ * radius * pending_dir_[i];
    }
    have_pending_ = true;
  }
  return n;
}

std::vector<double> sample_noise(const NoiseSpec& spec,
                                 const std::vector<double>& grad_w, double gap,
                                 NoiseSampler& state) {
  (void)spec;
  return state.sample(grad_w, gap);
}

namespace {

Trajectory run_loop(const Objective& obj, const ParamVector& w0,
                    const ScheduleSpec& schedule, const NoiseSpec& noise,
                    long long big_t, double eps_stop,
                    const RunOptions& options) {
  if (w0.dim() != obj.dim()) {
    throw std::invalid_argument("run: start dimension mismatch");
  }
  if (big_t < 0) throw std::invalid_argument("run: T must be >= 0");
  if (!(eps_stop >= 0.0)) {
    throw std::invalid_argument("run: eps_stop must be >= 0");
  }

  const SmoothnessCertificate& cert = obj.certificate();
  const bool with_noise = noise.kind != NoiseSpec::Kind::None;
  NoiseSampler sampler(noise, obj.dim());

  Trajectory traj;
  traj.final_iterate = w0;
  if (obj.known_minimizer()) {
    traj.initial_distance_to_minimizer =
        distance(w0.coords(), obj.known_minimizer()->coords());
  }
  if (options.record_points) {
    traj.points.reserve(
        static_cast<std::size_t>(std::min<long long>(big_t, 1 << 20)) + 1);
  }

  std::vector<double> w = w0.coords();
  std::vector<double> g(obj.dim());
  const double gap0 = obj.value_raw(w) - cert.f_star;
  double sum_gap_rho = 0.0;

  for (long long t = 0;; ++t) {
    const double f = obj.value_raw(w);
    obj.gradient_raw(w, g);
    const double gn = norm(g);
    if (!std::isfinite(f) || !std::isfinite(gn) || !all_finite(w)) {
      traj.diverged = true;
      traj.diverged_at = t;
      break;
    }
    const double gap = f - cert.f_star;
    traj.final_iterate = ParamVector(w);
    traj.min_grad_sq = std::min(traj.min_grad_sq, gn * gn);
    traj.max_gap = std::max(traj.max_gap, gap);

    // The cosine baseline is only defined for t < horizon; clamp so the
    // terminal row still records a rate.
    long long t_rate = t;
    if (schedule.kind == ScheduleKind::LinearWarmupCosine &&
        schedule.horizon > 0 && t >= schedule.horizon) {
      t_rate = schedule.horizon - 1;
    }
    const double eta =
        schedule_rate(schedule, cert, std::max(gap, 0.0), gap0, t_rate);
    if (options.record_points) {
      traj.points.push_back({t, eta, f, gap, gn, std::nullopt});
    }
    if (!traj.iterations_to_eps && gn <= eps_stop) {
      traj.iterations_to_eps = t;
      break;
    }
    if (t >= big_t) break;

    sum_gap_rho += std::pow(std::max(gap, 0.0), cert.rho);
    traj.sum_eta += eta;
    ++traj.steps;

    std::vector<double> prev;
    if (options.record_points && options.record_est_smoothness) prev = w;

    if (with_noise) {
      const std::vector<double> n = sampler.sample(g, std::max(gap, 0.0));
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] -= eta * (g[i] + n[i]);
      }
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * g[i];
    }

    if (options.record_points && options.record_est_smoothness &&
        all_finite(w)) {
      std::vector<double> d(w.size());
      bool nonzero = false;
      for (std::size_t i = 0; i < w.size(); ++i) {
        d[i] = w[i] - prev[i];
        nonzero = nonzero || d[i] != 0.0;
      }
      if (nonzero) {
        traj.points.back().est_smoothness = estimate_local_smoothness(
            obj, ParamVector(prev), ParamVector(d), options.estimator_n);
      }
    }
  }

  traj.delta_avg_rho =
      traj.steps > 0
          ? sum_gap_rho / static_cast<double>(traj.steps)
          : std::pow(std::max(gap0, 0.0), cert.rho);
  return traj;
}

}  // namespace

Trajectory run_gd(const Objective& obj, const ParamVector& w0,
                  const ScheduleSpec& schedule, long long big_t,
                  double eps_stop, const RunOptions& options) {
  if (!schedule_is_gd(schedule.kind)) {
    throw std::invalid_argument(
        "run_gd: schedule must be a GD variant or baseline");
  }
  return run_loop(obj, w0, schedule, NoiseSpec{}, big_t, eps_stop, options);
}

Trajectory run_sgd(const Objective& obj, const ParamVector& w0,
                   const ScheduleSpec& schedule, const NoiseSpec& noise,
                   long long big_t, double eps_stop,
                   const RunOptions& options) {
  if (schedule_is_stochastic(schedule.kind) &&
      noise.kind == NoiseSpec::Kind::None) {
    throw std::invalid_argument(
        "run_sgd: SGD schedules require a noise model");
  }
  return run_loop(obj, w0, schedule, noise, big_t, eps_stop, options);
}

}  // namespace warmlab
