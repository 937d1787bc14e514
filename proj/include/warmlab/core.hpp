#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace warmlab {

/// A point in parameter space. Coordinates are finite by construction and
/// the dimension never changes after construction.
class ParamVector {
 public:
  ParamVector() = default;

  explicit ParamVector(std::vector<double> coords) : c_(std::move(coords)) {
    for (double v : c_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("ParamVector: non-finite coordinate");
      }
    }
  }

  ParamVector(std::initializer_list<double> coords)
      : ParamVector(std::vector<double>(coords)) {}

  std::size_t dim() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  const std::vector<double>& coords() const { return c_; }

  bool operator==(const ParamVector& o) const { return c_ == o.c_; }

 private:
  std::vector<double> c_;
};

/// The tuple (rho, K0, Krho, f*) bounding local smoothness by
/// K0 + Krho * (f(w) - f*)^rho.
struct SmoothnessCertificate {
  double rho = 0.0;
  double k0 = 0.0;
  double krho = 0.0;
  double f_star = 0.0;

  void validate() const {
    if (!(rho >= 0.0) || !(k0 >= 0.0) || !(krho >= 0.0) ||
        !std::isfinite(f_star)) {
      throw std::invalid_argument(
          "SmoothnessCertificate: need rho, K0, Krho >= 0 and finite f*");
    }
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& a) {
  return std::sqrt(dot(a, a));
}

inline double distance(const std::vector<double>& a,
                       const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(const std::vector<double>& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace warmlab
