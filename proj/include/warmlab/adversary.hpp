#pragma once

#include <optional>
#include <string>
#include <vector>

#include "warmlab/core.hpp"
#include "warmlab/objectives.hpp"

namespace warmlab {

/// One sine segment of the hard-instance chain, spanning exactly one period
/// on (x_left, x_right]:
///   f(x) = a sin(b (x - x_right) + phase) + d.
/// The global phase offset of the paper's parameterization is
/// c = phase - b x_right; the piece-local form keeps the argument small.
struct TrigPiece {
  double a;
  double b;
  double phase;
  double d;
  double x_right;

  double c() const { return phase - b * x_right; }
};

/// A piecewise 1-D hard function built for a non-increasing learning-rate
/// sequence. Case 1 is the linear/quartic well, case 2 the pure sine chain
/// with an exponential-polynomial tail, case 3 sine chain + quartic link +
/// well. Immutable after construction; evaluation is pure.
struct AdversaryInstance {
  int case_id = 0;
  double k1 = 0.0;
  double delta = 0.0;
  double eps = 0.0;
  long long tau = -1;  // case 3 only

  std::vector<double> etas;       // defining sequence
  std::vector<double> junctions;  // x_0 > x_1 > ... (chain junctions)
  std::vector<TrigPiece> trig;    // piece t lives on (x_{t+1}, x_t]

  // Case 3 quartic link g(y) = gbar((y - x_{tau+1})/span) on
  // (x_{tau+1}, x_tau], with gbar(z) = a z^4 + b z^3 + c z^2 + d z + e.
  double link_a = 0.0, link_b = 0.0, link_c = 0.0, link_d = 0.0,
         link_e = 0.0;
  double link_A = 0.0, link_B = 0.0, link_C = 0.0, link_D = 0.0;
  double link_left = 0.0, link_right = 0.0;

  double x0 = 0.0;         // chain start (cases 2 and 3)
  double y0 = 0.0;         // start of the well's linear branch (cases 1 and 3)
  double w0 = 0.0;         // initial iterate
  double tail_base = 0.0;  // additive offset of the tail beyond x0
  double g_at_x_tau = 0.0;

  double f_star = 0.0;
  SmoothnessCertificate certificate;  // (1, eps sqrt(K1), 4 pi K1)

  double value(double x) const;
  double deriv(double x) const;
  double second_deriv(double x) const;
};

/// Splits a non-increasing positive sequence against the threshold
/// 2/(K1 delta): case 1 all at or below, case 2 all above, case 3 mixed with
/// tau the last index above. Returns (case_id, tau); tau is -1 for cases
/// 1 and 2. Rejects empty, non-positive, or increasing sequences.
std::pair<int, long long> classify_schedule(const std::vector<double>& etas,
                                            double k1, double delta);

/// Builds the hard instance for the given sequence. Case 3 additionally
/// requires eps <= 2 sqrt(K1) delta / 5, eps <= 1/(2 eta_tau sqrt(K1)) and
/// eta_tau K1 delta > 6; the (2, 6] range has no construction and is
/// rejected with a distinct message.
AdversaryInstance build_instance(const std::vector<double>& etas, double k1,
                                 double delta, double eps);

/// Builds the case-2 sine chain unconditionally. The junction identities
/// (value delta, slope sqrt(K1) delta, curvature K1 delta, iterates landing
/// on junctions) hold for any positive sequence; the (1, eps sqrt(K1),
/// 4 pi K1) certificate is only guaranteed when every rate exceeds
/// 2/(K1 delta).
AdversaryInstance build_case2_chain(const std::vector<double>& etas, double k1,
                                    double delta, double eps);

/// Adapts an instance to the common objective contract.
ObjectiveHandle instance_objective(const AdversaryInstance& inst);

struct CountResult {
  std::optional<long long> count;  // empty when censored at t_max
  std::vector<double> iterates;
  std::vector<double> values;
  std::vector<double> grad_abs;
};

/// Runs GD from the instance start with the given sequence (extended past
/// its end by repeating the last entry) and reports the first t with
/// |f'(w_t)| <= eps, or censored.
CountResult count_iterations_to_stationarity(const AdversaryInstance& inst,
                                             const std::vector<double>& etas,
                                             long long t_max);

struct InstanceReport {
  double max_junction_value_mismatch = 0.0;  // relative
  double max_junction_d1_mismatch = 0.0;
  double max_junction_d2_mismatch = 0.0;
  // max over samples of (|f''| - K0 - Krho (f - f*)) / (1 + |f|)
  double certificate_violation = 0.0;
  // same check with K0 tripled; the well's curvature at its minimum is
  // 3 eps sqrt(K1), so this variant is the one the construction meets
  double certificate_violation_k0_3x = 0.0;
  double g_min_margin = 0.0;  // min g - delta over the link (case 3)
  double g_d2_margin = 0.0;   // K1 delta - max |g''| over the link (case 3)
  double w0_gap = 0.0;        // f(w0) - f*, must be <= 8 delta

  bool junctions_ok = false;
  bool certificate_ok = false;
  bool link_ok = false;
  bool gap_ok = false;
};

/// Verifies junction matching, the certificate inequality over a sample
/// grid, the case-3 link bounds, and the initial-gap bound. Violations are
/// reported, never thrown.
InstanceReport verify_instance(const AdversaryInstance& inst,
                               long long samples = 100000);

/// Human-readable diagnostic dump (junctions and coefficients); not a
/// compatibility surface.
std::string instance_dump(const AdversaryInstance& inst);

}  // namespace warmlab
