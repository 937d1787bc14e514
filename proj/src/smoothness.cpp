#include "warmlab/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace warmlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LemmaConstants lemma_constants(const SmoothnessCertificate& cert) {
  cert.validate();
  if (cert.krho == 0.0) return {kInf, kInf};

  const double c1 = 1.0 / ((2.0 + std::sqrt(2.0)) *
                           std::sqrt(std::pow(3.0, cert.rho) * cert.krho));

  double k0_factor;
  if (cert.k0 == 0.0) {
    if (cert.rho > 1.0) {
      k0_factor = kInf;
    } else if (cert.rho < 1.0) {
      k0_factor = 0.0;
    } else {
      k0_factor = 1.0;
    }
  } else if (cert.rho == 0.0) {
    // Limit of K0^{1/(2 rho) - 1/2} as rho -> 0+.
    k0_factor = cert.k0 > 1.0 ? kInf : (cert.k0 < 1.0 ? 0.0 : 1.0);
  } else {
    k0_factor = std::pow(cert.k0, 1.0 / (2.0 * cert.rho) - 0.5);
  }
  const double krho_root =
      cert.rho == 0.0 ? (cert.krho > 1.0 ? kInf : (cert.krho < 1.0 ? 0.0 : 1.0))
                      : std::pow(cert.krho, 1.0 / (2.0 * cert.rho));
  double c2;
  if (std::isinf(k0_factor)) {
    c2 = kInf;
  } else if (std::isinf(krho_root)) {
    c2 = 0.0;
  } else {
    c2 = k0_factor / ((2.0 * std::sqrt(3.0) + std::sqrt(6.0)) * krho_root);
  }
  return {c1, c2};
}

double radius_r(const SmoothnessCertificate& cert, double gap) {
  if (!(gap >= 0.0)) throw std::invalid_argument("radius_r: gap must be >= 0");
  const LemmaConstants c = lemma_constants(cert);
  if (std::isinf(c.c1) && std::isinf(c.c2)) return kInf;
  const double first =
      std::isinf(c.c1) ? kInf
                       : c.c1 * std::pow(gap, -(cert.rho - 1.0) / 2.0);
  return std::min(first, c.c2);
}

double local_L(const SmoothnessCertificate& cert, double gap) {
  if (!(gap >= 0.0)) throw std::invalid_argument("local_L: gap must be >= 0");
  return 2.0 * cert.k0 + cert.krho * std::pow(2.0 * gap, cert.rho);
}

double grad_bound(const SmoothnessCertificate& cert, double gap) {
  if (!(gap >= 0.0)) {
    throw std::invalid_argument("grad_bound: gap must be >= 0");
  }
  return 2.0 * std::sqrt(cert.k0 * gap + cert.krho * std::pow(3.0, cert.rho) *
                                             std::pow(gap, cert.rho + 1.0));
}

SmoothnessCertificate convert_rho_l_smooth(double rho, double l0, double lrho,
                                           double f_star) {
  if (!(rho >= 0.0) || rho >= 2.0) {
    throw std::invalid_argument("convert_rho_l_smooth: need 0 <= rho < 2");
  }
  if (!(l0 >= 0.0) || !(lrho >= 0.0)) {
    throw std::invalid_argument("convert_rho_l_smooth: need L0, Lrho >= 0");
  }
  const double alpha = rho / (2.0 - rho);
  const double k_alpha = std::pow(lrho, 2.0 / (2.0 - rho)) *
                         std::pow(2.0, rho * (rho + 2.0) / (2.0 - rho));
  SmoothnessCertificate out{alpha, 2.0 * l0, k_alpha, f_star};
  out.validate();
  return out;
}

double estimate_local_smoothness(const Objective& obj, const ParamVector& w,
                                 const ParamVector& d, int n) {
  if (n < 1) {
    throw std::invalid_argument("estimate_local_smoothness: need n >= 1");
  }
  const double dn = norm(d.coords());
  if (!(dn > 0.0)) {
    throw std::invalid_argument(
        "estimate_local_smoothness: zero direction vector");
  }
  const std::vector<double>& wc = w.coords();
  std::vector<double> g0(wc.size()), g(wc.size()), p(wc.size());
  obj.gradient_raw(wc, g0);
  double best = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double gamma = static_cast<double>(i) / n;
    for (std::size_t k = 0; k < wc.size(); ++k) {
      p[k] = wc[k] + gamma * d[k];
    }
    obj.gradient_raw(p, g);
    for (std::size_t k = 0; k < wc.size(); ++k) g[k] -= g0[k];
    best = std::max(best, norm(g) / (gamma * dn));
  }
  return best;
}

namespace {

// Nonnegative least squares for y ~ k0 + k1 x with two variables: solve
// unconstrained, then fall back to the axis-constrained candidates.
struct Nnls2 {
  double k0, k1, sse;
};

Nnls2 nnls2(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double nn = static_cast<double>(n);
  auto sse_of = [&](double k0, double k1) {
    return syy + nn * k0 * k0 + k1 * k1 * sxx + 2.0 * k0 * k1 * sx -
           2.0 * k0 * sy - 2.0 * k1 * sxy;
  };
  const double det = nn * sxx - sx * sx;
  Nnls2 best{0.0, 0.0, sse_of(0.0, 0.0)};
  auto consider = [&](double k0, double k1) {
    if (k0 < 0.0 || k1 < 0.0) return;
    const double s = sse_of(k0, k1);
    if (s < best.sse) best = {k0, k1, s};
  };
  if (det > 0.0) {
    consider((sy * sxx - sx * sxy) / det, (nn * sxy - sx * sy) / det);
  }
  consider(std::max(0.0, sy / nn), 0.0);
  if (sxx > 0.0) consider(0.0, std::max(0.0, sxy / sxx));
  return best;
}

}  // namespace

FitResult fit_certificate(const std::vector<std::pair<double, double>>& pairs,
                          double f_star) {
  if (!std::isfinite(f_star)) {
    throw std::invalid_argument("fit_certificate: f_star must be finite");
  }
  if (pairs.size() < 8) {
    throw std::invalid_argument("fit_certificate: need at least 8 pairs");
  }
  double gmin = kInf, gmax = 0.0;
  for (const auto& [gap, smooth] : pairs) {
    if (!(gap > 0.0) || !(smooth > 0.0)) {
      throw std::invalid_argument(
          "fit_certificate: gaps and smoothness values must be positive");
    }
    gmin = std::min(gmin, gap);
    gmax = std::max(gmax, gap);
  }
  if (gmax < 10.0 * gmin) {
    throw std::invalid_argument(
        "fit_certificate: gaps must span at least one decade");
  }

  const std::size_t n = pairs.size();
  std::vector<double> x(n), y(n), logy(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = pairs[i].second;
    logy[i] = std::log(y[i]);
  }

  FitResult best{0.0, 0.0, 0.0, kInf};
  for (int step = 0; step <= 400; ++step) {
    const double rho = 0.01 * step;
    for (std::size_t i = 0; i < n; ++i) x[i] = std::pow(pairs[i].first, rho);
    const Nnls2 fit = nnls2(x, y);
    double ss = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = fit.k0 + fit.k1 * x[i];
      if (!(m > 0.0)) {
        ok = false;
        break;
      }
      const double r = logy[i] - std::log(m);
      ss += r * r;
    }
    if (!ok) continue;
    const double rms = std::sqrt(ss / static_cast<double>(n));
    if (rms < best.residual) best = {rho, fit.k0, fit.k1, rms};
  }
  if (std::isinf(best.residual)) {
    throw std::runtime_error("fit_certificate: no admissible model found");
  }
  return best;
}

SmoothnessCertificate certificate_from_fit(const FitResult& fit,
                                           double f_star) {
  SmoothnessCertificate cert{fit.rho_hat, fit.k0_hat, fit.krho_hat, f_star};
  cert.validate();
  return cert;
}

double check_descent(const Objective& obj, const ParamVector& x,
                     const ParamVector& y) {
  const SmoothnessCertificate& cert = obj.certificate();
  const double fx = obj.value(x);
  const double gap = fx - cert.f_star;
  const double dist = distance(x.coords(), y.coords());
  const double r = radius_r(cert, std::max(gap, 0.0));
  if (dist > r * (1.0 + 1e-12)) {
    throw std::domain_error("check_descent: ||y-x|| exceeds r(gap)");
  }
  const ParamVector gx = obj.gradient(x);
  std::vector<double> diff(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) diff[i] = y[i] - x[i];
  const double l = local_L(cert, std::max(gap, 0.0));
  return obj.value(y) - fx - dot(gx.coords(), diff) -
         0.5 * l * dist * dist;
}

double check_cocoercivity(const Objective& obj, const ParamVector& x,
                          const ParamVector& y) {
  if (!obj.convex()) {
    throw std::invalid_argument(
        "check_cocoercivity: objective must be convex");
  }
  const SmoothnessCertificate& cert = obj.certificate();
  const double gap = std::max(obj.value(x) - cert.f_star, 0.0);
  const double l = local_L(cert, gap);
  const ParamVector gx = obj.gradient(x);
  const ParamVector gy = obj.gradient(y);
  std::vector<double> gd(x.dim()), xd(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    gd[i] = gx[i] - gy[i];
    xd[i] = x[i] - y[i];
  }
  const double lhs = dot(gd, gd) / l;
  const double rhs = obj.value(x) - obj.value(y) - dot(gy.coords(), xd);
  return lhs - rhs;
}

}  // namespace warmlab
