#pragma once

#include <string>

#include "warmlab/core.hpp"

namespace warmlab {

enum class ScheduleKind {
  GDWarmup,
  GDConstant,
  ConvexGDWarmup,
  ConvexGDConstant,
  SGDBoundedAdaptive,
  SGDBoundedConstant,
  ABCAdaptive,
  ABCConstant,
  FixedConstant,
  LinearWarmupCosine,
};

/// A learning-rate rule. The theorem-derived variants are pure functions of
/// (certificate, gap, parameters); the baselines depend on the iteration
/// index only.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::GDWarmup;
  double sigma = 0.0;          // noise scale
  double noise_a = 0.0;        // A of the ABC bound
  double noise_b = 0.0;        // B of the ABC bound
  long long horizon = 0;       // T for the SGD rates and baselines
  double delta = 0.0;          // failure probability
  double eta_peak = 0.0;       // baselines
  long long warmup_steps = 0;  // T_w for LinearWarmupCosine
  double scale = 1.0;          // tuning multiplier applied on top of the rule
};

/// (1/(4 sqrt(2)+4)) min{1/K0, (1/(3^rho Krho)) gap^-rho}. Degenerate
/// clauses (zero denominators) count as +inf inside the min.
double gd_warmup_rate(const SmoothnessCertificate& cert, double gap);

/// The same rule frozen at the initial gap.
double gd_constant_rate(const SmoothnessCertificate& cert, double gap0);

/// Convex variant: half the prefactor, 1/(8 sqrt(2)+8).
double gd_convex_rate(const SmoothnessCertificate& cert, double gap);

/// Five-clause adaptive rate for bounded noise.
double sgd_bounded_adaptive_rate(const SmoothnessCertificate& cert,
                                 double gap_t, double sigma, long long big_t,
                                 double delta, double gap0);

/// Six-clause constant rate for bounded noise; r, L, G frozen at 4*gap0.
double sgd_bounded_constant_rate(const SmoothnessCertificate& cert,
                                 double gap0, double sigma, long long big_t,
                                 double delta);

/// Five-clause adaptive rate under the ABC noise bound.
double sgd_abc_adaptive_rate(const SmoothnessCertificate& cert, double gap_t,
                             double a, double b, double sigma, long long big_t,
                             double delta, double gap0);

/// Seven-clause constant rate under the ABC noise bound; r, L, G frozen at
/// 8*gap0.
double sgd_abc_constant_rate(const SmoothnessCertificate& cert, double gap0,
                             double a, double b, double sigma, long long big_t,
                             double delta);

/// FixedConstant and LinearWarmupCosine baselines.
double baseline_rate(const ScheduleSpec& spec, long long t);

/// Dispatches to the rule named by spec.kind and applies spec.scale.
double schedule_rate(const ScheduleSpec& spec,
                     const SmoothnessCertificate& cert, double gap_t,
                     double gap0, long long t);

bool schedule_is_stochastic(ScheduleKind kind);
bool schedule_is_gd(ScheduleKind kind);

const std::string& schedule_name(ScheduleKind kind);
ScheduleKind schedule_kind_from_name(const std::string& name);

}  // namespace warmlab
