#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "warmlab/core.hpp"

namespace warmlab {

/// Axis-aligned region used by the sampling-based invariant checks.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// A differentiable test function with exact gradient, exact Hessian
/// spectral norm, and a smoothness certificate. Handles are immutable and
/// all evaluations are pure.
class Objective {
 public:
  virtual ~Objective() = default;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  const SmoothnessCertificate& certificate() const { return cert_; }
  bool convex() const { return convex_; }
  const std::optional<ParamVector>& known_minimizer() const {
    return minimizer_;
  }
  const Box& sampling_box() const { return box_; }
  const ParamVector& default_start() const { return default_start_; }

  double value(const ParamVector& w) const {
    check_dim(w.dim());
    return value_raw(w.coords());
  }

  ParamVector gradient(const ParamVector& w) const {
    check_dim(w.dim());
    std::vector<double> g(dim_);
    gradient_raw(w.coords(), g);
    return ParamVector(std::move(g));
  }

  /// Spectral norm of the exact Hessian. At a piecewise junction the piece
  /// dispatch is half-open; the suite's junctions match to second order so
  /// both one-sided values agree.
  double hessian_norm(const ParamVector& w) const {
    check_dim(w.dim());
    return hessian_norm_raw(w.coords());
  }

  // Unchecked hot-path entry points for the optimization loops.
  virtual double value_raw(const std::vector<double>& w) const = 0;
  virtual void gradient_raw(const std::vector<double>& w,
                            std::vector<double>& out) const = 0;
  virtual double hessian_norm_raw(const std::vector<double>& w) const = 0;

  /// First-coordinate values where piecewise definitions meet; empty for
  /// globally analytic objectives.
  virtual std::vector<double> junction_points() const { return {}; }

 protected:
  Objective(std::string name, std::size_t dim, SmoothnessCertificate cert,
            bool convex, std::optional<ParamVector> minimizer, Box box,
            ParamVector default_start)
      : name_(std::move(name)),
        dim_(dim),
        cert_(cert),
        convex_(convex),
        minimizer_(std::move(minimizer)),
        box_(std::move(box)),
        default_start_(std::move(default_start)) {
    cert_.validate();
  }

  void check_dim(std::size_t d) const {
    if (d != dim_) {
      throw std::invalid_argument(name_ + ": expected dimension " +
                                  std::to_string(dim_) + ", got " +
                                  std::to_string(d));
    }
  }

 private:
  std::string name_;
  std::size_t dim_;
  SmoothnessCertificate cert_;
  bool convex_;
  std::optional<ParamVector> minimizer_;
  Box box_;
  ParamVector default_start_;
};

using ObjectiveHandle = std::shared_ptr<const Objective>;

/// Factory over the analytic test-function suite.
///
/// Known names and parameters:
///   quadratic     L > 0 (curvature), dim in {1..4} (default 1)
///   exponential   -
///   trig_linear   -
///   river_valley  K1 > 0, Delta0 > e
///   ffn_loss      -
///   rnn_loss      -
///   two_cosh      -
ObjectiveHandle make_objective(const std::string& name,
                               const std::map<std::string, double>& params = {});

/// The seven families with canonical parameters (quadratic L=5 dim=1,
/// river_valley K1=10 Delta0=1000).
std::vector<ObjectiveHandle> default_suite();

}  // namespace warmlab
