#pragma once

#include <utility>
#include <vector>

#include "warmlab/core.hpp"
#include "warmlab/objectives.hpp"

namespace warmlab {

/// The pair (C1, C2) controlling the descent-lemma radius. Either entry is
/// +inf in the degenerate cases (Krho = 0, or K0 = 0 with rho > 1).
struct LemmaConstants {
  double c1;
  double c2;
};

/// C1 = 1 / ((2+sqrt(2)) sqrt(3^rho Krho)),
/// C2 = (1/(2 sqrt(3)+sqrt(6))) K0^{1/(2 rho)-1/2} / Krho^{1/(2 rho)}.
/// Degenerate corners: Krho = 0 gives (+inf, +inf); K0 = 0 gives C2 = +inf
/// for rho > 1, C2 = 0 for rho < 1, and an exact factor 1 for rho = 1.
LemmaConstants lemma_constants(const SmoothnessCertificate& cert);

/// r(gap) = min{C1 * gap^{-(rho-1)/2}, C2}.
double radius_r(const SmoothnessCertificate& cert, double gap);

/// L(gap) = 2 K0 + Krho (2 gap)^rho.
double local_L(const SmoothnessCertificate& cert, double gap);

/// Gradient-norm bound 2 sqrt(K0 gap + Krho 3^rho gap^{rho+1}).
double grad_bound(const SmoothnessCertificate& cert, double gap);

/// Converts a gradient-norm certificate ||H|| <= L0 + Lrho ||g||^rho with
/// 0 <= rho < 2 into a gap certificate with exponent rho/(2-rho):
/// K0 = 2 L0 and Krho = Lrho^{2/(2-rho)} * 2^{rho (rho+2)/(2-rho)}.
SmoothnessCertificate convert_rho_l_smooth(double rho, double l0, double lrho,
                                           double f_star);

/// Empirical local smoothness at w along direction d: the largest secant
/// slope ||grad f(w + (i/n) d) - grad f(w)|| / ||(i/n) d|| over i = 1..n.
/// grad f(w) is evaluated once and shared across the n secants.
double estimate_local_smoothness(const Objective& obj, const ParamVector& w,
                                 const ParamVector& d, int n);

struct FitResult {
  double rho_hat;
  double k0_hat;
  double krho_hat;
  double residual;  // RMS of log(L) - log(k0 + krho gap^rho) over the pairs
};

/// Recovers certificate parameters from (gap, smoothness) measurements:
/// grid search rho in {0.00, 0.01, ..., 4.00}, nonnegative least squares in
/// (K0, Krho) on the linear model, selection by RMS log-space residual.
/// Ties resolve to the smallest rho. Requires at least 8 pairs with positive
/// entries and gaps spanning at least one decade.
FitResult fit_certificate(const std::vector<std::pair<double, double>>& pairs,
                          double f_star);

SmoothnessCertificate certificate_from_fit(const FitResult& fit,
                                           double f_star);

/// Residual of the local descent inequality,
///   f(y) - f(x) - <grad f(x), y-x> - (L(gap)/2) ||y-x||^2,
/// which is <= 0 up to rounding whenever ||y-x|| <= r(gap). Throws when the
/// radius precondition is violated.
double check_descent(const Objective& obj, const ParamVector& x,
                     const ParamVector& y);

/// Left-minus-right of the cocoercivity inequality
///   (1/L(x)) ||grad f(x) - grad f(y)||^2 <= f(x) - f(y) - <grad f(y), x-y>
/// for convex objectives; <= 0 up to rounding when ||y-x|| <= r(x)/2.
/// Throws on non-convex objectives.
double check_cocoercivity(const Objective& obj, const ParamVector& x,
                          const ParamVector& y);

}  // namespace warmlab
