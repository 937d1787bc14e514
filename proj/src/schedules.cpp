#include "warmlab/schedules.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "warmlab/smoothness.hpp"

namespace warmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// a / b with the degenerate-clause convention: a zero or infinite hazard in
// the denominator means the clause imposes no bound.
double clause_div(double a, double b) {
  if (!(b > 0.0) || std::isinf(b)) return kInf;
  return a / b;
}

double finish(double rate, const char* who) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument(std::string(who) +
                                ": no clause yields a positive finite rate "
                                "(degenerate certificate or parameters)");
  }
  return rate;
}

// sqrt(K0 gap + Krho 3^rho gap^{rho+1}), the G quantity of the SGD rates.
double g_quantity(const SmoothnessCertificate& cert, double gap) {
  return std::sqrt(cert.k0 * gap + cert.krho * std::pow(3.0, cert.rho) *
                                       std::pow(gap, cert.rho + 1.0));
}

// min{1/K0, 1/(Krho (3 gap)^rho)} without the prefactor.
double base_min(const SmoothnessCertificate& cert, double gap) {
  const double c1 = clause_div(1.0, cert.k0);
  const double c2 =
      clause_div(1.0, cert.krho * std::pow(3.0 * gap, cert.rho));
  return std::min(c1, c2);
}

void check_noise_params(double sigma, long long big_t, double delta,
                        const char* who) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument(std::string(who) + ": sigma must be >= 0");
  }
  if (big_t < 1) {
    throw std::invalid_argument(std::string(who) + ": T must be >= 1");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument(std::string(who) + ": delta must be in (0,1)");
  }
}

}  // namespace

double gd_warmup_rate(const SmoothnessCertificate& cert, double gap) {
  cert.validate();
  if (!(gap >= 0.0)) {
    throw std::invalid_argument("gd_warmup_rate: gap must be >= 0");
  }
  if (cert.k0 == 0.0 && cert.krho == 0.0) {
    throw std::invalid_argument("gd_warmup_rate: K0 and Krho both zero");
  }
  const double pref = 1.0 / (4.0 * std::sqrt(2.0) + 4.0);
  return finish(pref * base_min(cert, gap), "gd_warmup_rate");
}

double gd_constant_rate(const SmoothnessCertificate& cert, double gap0) {
  if (!(gap0 >= 0.0)) {
    throw std::invalid_argument("gd_constant_rate: gap must be >= 0");
  }
  return gd_warmup_rate(cert, gap0);
}

double gd_convex_rate(const SmoothnessCertificate& cert, double gap) {
  return 0.5 * gd_warmup_rate(cert, gap);
}

double sgd_bounded_adaptive_rate(const SmoothnessCertificate& cert,
                                 double gap_t, double sigma, long long big_t,
                                 double delta, double gap0) {
  cert.validate();
  check_noise_params(sigma, big_t, delta, "sgd_bounded_adaptive_rate");
  if (!(sigma > 0.0)) {
    throw std::invalid_argument(
        "sgd_bounded_adaptive_rate: sigma is zero; use the GD rates");
  }
  if (!(gap_t >= 0.0) || !(gap0 >= 0.0)) {
    throw std::invalid_argument("sgd_bounded_adaptive_rate: gaps must be >= 0");
  }
  const double pref = 1.0 / (8.0 * (std::sqrt(2.0) + 1.0));
  const double r = radius_r(cert, gap_t);
  const double l = local_L(cert, gap_t);
  const double g = g_quantity(cert, gap_t);
  const double log_inv_delta = std::log(1.0 / delta);
  const std::array<double, 5> clauses = {
      clause_div(pref, cert.k0),
      clause_div(pref, cert.krho * std::pow(3.0 * gap_t, cert.rho)),
      std::isinf(r) ? kInf : r / (2.0 * sigma),
      clause_div(std::sqrt(gap0),
                 std::sqrt(sigma * sigma * static_cast<double>(big_t) * l)),
      clause_div(gap0, 2.0 * sigma * g *
                           std::sqrt(static_cast<double>(big_t) *
                                     log_inv_delta)),
  };
  return finish(*std::min_element(clauses.begin(), clauses.end()),
                "sgd_bounded_adaptive_rate");
}

double sgd_bounded_constant_rate(const SmoothnessCertificate& cert,
                                 double gap0, double sigma, long long big_t,
                                 double delta) {
  cert.validate();
  check_noise_params(sigma, big_t, delta, "sgd_bounded_constant_rate");
  if (!(sigma > 0.0)) {
    throw std::invalid_argument(
        "sgd_bounded_constant_rate: sigma is zero; use the GD rates");
  }
  if (!(gap0 >= 0.0)) {
    throw std::invalid_argument("sgd_bounded_constant_rate: gap must be >= 0");
  }
  const double pref = 1.0 / (8.0 * (std::sqrt(2.0) + 1.0));
  const double gap_c = 4.0 * gap0;
  const double r = radius_r(cert, gap_c);
  const double l = local_L(cert, gap_c);
  const double g = g_quantity(cert, gap_c);
  const double c2 = lemma_constants(cert).c2;
  const double log_inv_delta = std::log(1.0 / delta);
  // alpha = (G + L C2)(1 + sqrt(2 log(1/delta))); an infinite C2 makes the
  // hazard bounded elsewhere, so the alpha clause drops out of the min.
  const double alpha =
      std::isinf(c2) ? kInf
                     : (g + l * c2) * (1.0 + std::sqrt(2.0 * log_inv_delta));
  const std::array<double, 6> clauses = {
      clause_div(pref, cert.k0),
      clause_div(pref, cert.krho * std::pow(3.0 * gap_c, cert.rho)),
      std::isinf(r) ? kInf : r / (2.0 * sigma),
      clause_div(std::sqrt(gap0),
                 std::sqrt(sigma * sigma * static_cast<double>(big_t) * l)),
      clause_div(gap0, sigma * g *
                           std::sqrt(2.0 * static_cast<double>(big_t) *
                                     log_inv_delta)),
      std::isinf(alpha) ? kInf : clause_div(gap0, sigma * alpha),
  };
  return finish(*std::min_element(clauses.begin(), clauses.end()),
                "sgd_bounded_constant_rate");
}

namespace {

// Shared clause set of the ABC rates, evaluated at gap (adaptive: current
// gap; constant: the frozen 4x/8x multiple). `constant` switches the two
// tail clauses between their adaptive and constant forms.
double abc_rate(const SmoothnessCertificate& cert, double gap, double a,
                double b, double sigma, long long big_t, double delta,
                double gap0, bool constant, const char* who) {
  cert.validate();
  check_noise_params(sigma, big_t, delta, who);
  if (!(a >= 0.0) || !(b >= 0.0)) {
    throw std::invalid_argument(std::string(who) + ": A and B must be >= 0");
  }
  if (!(gap >= 0.0) || !(gap0 >= 0.0)) {
    throw std::invalid_argument(std::string(who) + ": gaps must be >= 0");
  }
  const double sqrt6 = std::sqrt(6.0);
  const double r = radius_r(cert, gap);
  const double l = local_L(cert, gap);
  const double g = g_quantity(cert, gap);
  const double t = static_cast<double>(big_t);
  const double log_inv_delta = std::log(1.0 / delta);

  const double pref1 = 1.0 / (sqrt6 * (b + 1.0) * (4.0 * std::sqrt(2.0) + 4.0));
  const double clause1 = pref1 * base_min(cert, gap);

  double clause2 = kInf;
  if (a > 0.0) {
    const double pref2 = 1.0 / (std::sqrt(6.0 * a) * (2.0 + std::sqrt(2.0)));
    const double m1 = clause_div(1.0, std::sqrt(cert.k0));
    const double m2 = clause_div(
        1.0, std::sqrt(cert.krho * std::pow(3.0 * gap, cert.rho)));
    clause2 = pref2 * std::min(m1, m2);
  }

  const double clause3 =
      sigma > 0.0 && !std::isinf(r) ? r / (sqrt6 * sigma) : kInf;

  const double var = a * gap + b * g * g + sigma * sigma;
  const double clause4 =
      constant ? clause_div(gap0, std::sqrt(2.0 * g * g * var * t *
                                            log_inv_delta))
               : clause_div(gap0, std::sqrt(4.0 * g * g * var * t *
                                            log_inv_delta));

  const double clause5 =
      clause_div(std::sqrt(gap0), std::sqrt(l * (a * gap + sigma * sigma) * t));

  if (!constant) {
    const std::array<double, 5> clauses = {clause1, clause2, clause3, clause4,
                                           clause5};
    return finish(*std::min_element(clauses.begin(), clauses.end()), who);
  }

  const double c2 = lemma_constants(cert).c2;
  const double alpha =
      std::isinf(c2) ? kInf
                     : (g + l * c2) * (1.0 + std::sqrt(2.0 * log_inv_delta));
  const double clause6 =
      a > 0.0 && !std::isinf(alpha) ? 1.0 / (std::sqrt(a) * alpha) : kInf;
  double clause7 = kInf;
  if (!std::isinf(alpha)) {
    const double inner =
        0.5 * std::sqrt(a) + std::sqrt(b) * (g + c2 * l) + sigma;
    clause7 = clause_div(1.0, alpha * inner);
  }
  const std::array<double, 7> clauses = {clause1, clause2, clause3, clause4,
                                         clause5, clause6, clause7};
  return finish(*std::min_element(clauses.begin(), clauses.end()), who);
}

}  // namespace

double sgd_abc_adaptive_rate(const SmoothnessCertificate& cert, double gap_t,
                             double a, double b, double sigma, long long big_t,
                             double delta, double gap0) {
  return abc_rate(cert, gap_t, a, b, sigma, big_t, delta, gap0, false,
                  "sgd_abc_adaptive_rate");
}

double sgd_abc_constant_rate(const SmoothnessCertificate& cert, double gap0,
                             double a, double b, double sigma, long long big_t,
                             double delta) {
  return abc_rate(cert, 8.0 * gap0, a, b, sigma, big_t, delta, gap0, true,
                  "sgd_abc_constant_rate");
}

double baseline_rate(const ScheduleSpec& spec, long long t) {
  if (spec.kind == ScheduleKind::FixedConstant) {
    if (!(spec.eta_peak > 0.0)) {
      throw std::invalid_argument("baseline_rate: eta_peak must be > 0");
    }
    return spec.eta_peak;
  }
  if (spec.kind != ScheduleKind::LinearWarmupCosine) {
    throw std::invalid_argument("baseline_rate: not a baseline schedule");
  }
  if (!(spec.eta_peak > 0.0)) {
    throw std::invalid_argument("baseline_rate: eta_peak must be > 0");
  }
  if (spec.warmup_steps >= spec.horizon || spec.warmup_steps < 1) {
    throw std::invalid_argument(
        "baseline_rate: need 1 <= warmup_steps < horizon");
  }
  if (t < 0 || t >= spec.horizon) {
    throw std::invalid_argument("baseline_rate: t outside [0, T)");
  }
  if (t < spec.warmup_steps) {
    // (t+1)/T_w so the very first step is nonzero.
    return spec.eta_peak * static_cast<double>(t + 1) /
           static_cast<double>(spec.warmup_steps);
  }
  const double progress = static_cast<double>(t - spec.warmup_steps) /
                          static_cast<double>(spec.horizon - spec.warmup_steps);
  return spec.eta_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double schedule_rate(const ScheduleSpec& spec,
                     const SmoothnessCertificate& cert, double gap_t,
                     double gap0, long long t) {
  double eta;
  switch (spec.kind) {
    case ScheduleKind::GDWarmup:
      eta = gd_warmup_rate(cert, gap_t);
      break;
    case ScheduleKind::GDConstant:
      eta = gd_constant_rate(cert, gap0);
      break;
    case ScheduleKind::ConvexGDWarmup:
      eta = gd_convex_rate(cert, gap_t);
      break;
    case ScheduleKind::ConvexGDConstant:
      eta = gd_convex_rate(cert, gap0);
      break;
    case ScheduleKind::SGDBoundedAdaptive:
      eta = sgd_bounded_adaptive_rate(cert, gap_t, spec.sigma, spec.horizon,
                                      spec.delta, gap0);
      break;
    case ScheduleKind::SGDBoundedConstant:
      eta = sgd_bounded_constant_rate(cert, gap0, spec.sigma, spec.horizon,
                                      spec.delta);
      break;
    case ScheduleKind::ABCAdaptive:
      eta = sgd_abc_adaptive_rate(cert, gap_t, spec.noise_a, spec.noise_b,
                                  spec.sigma, spec.horizon, spec.delta, gap0);
      break;
    case ScheduleKind::ABCConstant:
      eta = sgd_abc_constant_rate(cert, gap0, spec.noise_a, spec.noise_b,
                                  spec.sigma, spec.horizon, spec.delta);
      break;
    case ScheduleKind::FixedConstant:
    case ScheduleKind::LinearWarmupCosine:
      eta = baseline_rate(spec, t);
      break;
    default:
      throw std::invalid_argument("schedule_rate: unknown schedule kind");
  }
  if (!(spec.scale > 0.0)) {
    throw std::invalid_argument("schedule_rate: scale must be > 0");
  }
  return eta * spec.scale;
}

bool schedule_is_stochastic(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::SGDBoundedAdaptive:
    case ScheduleKind::SGDBoundedConstant:
    case ScheduleKind::ABCAdaptive:
    case ScheduleKind::ABCConstant:
      return true;
    default:
      return false;
  }
}

bool schedule_is_gd(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::GDWarmup:
    case ScheduleKind::GDConstant:
    case ScheduleKind::ConvexGDWarmup:
    case ScheduleKind::ConvexGDConstant:
    case ScheduleKind::FixedConstant:
    case ScheduleKind::LinearWarmupCosine:
      return true;
    default:
      return false;
  }
}

namespace {
const std::pair<ScheduleKind, const char*> kScheduleNames[] = {
    {ScheduleKind::GDWarmup, "gd_warmup"},
    {ScheduleKind::GDConstant, "gd_constant"},
    {ScheduleKind::ConvexGDWarmup, "convex_gd_warmup"},
    {ScheduleKind::ConvexGDConstant, "convex_gd_constant"},
    {ScheduleKind::SGDBoundedAdaptive, "sgd_bounded_adaptive"},
    {ScheduleKind::SGDBoundedConstant, "sgd_bounded_constant"},
    {ScheduleKind::ABCAdaptive, "sgd_abc_adaptive"},
    {ScheduleKind::ABCConstant, "sgd_abc_constant"},
    {ScheduleKind::FixedConstant, "fixed_constant"},
    {ScheduleKind::LinearWarmupCosine, "linear_warmup_cosine"},
};
}  // namespace

const std::string& schedule_name(ScheduleKind kind) {
  static const std::map<ScheduleKind, std::string> names = [] {
    std::map<ScheduleKind, std::string> m;
    for (const auto& [k, n] : kScheduleNames) m[k] = n;
    return m;
  }();
  return names.at(kind);
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
  for (const auto& [k, n] : kScheduleNames) {
    if (name == n) return k;
  }
  throw std::invalid_argument("unknown schedule '" + name + "'");
}

}  // namespace warmlab
