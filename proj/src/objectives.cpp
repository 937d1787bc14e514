#include "warmlab/objectives.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <set>
#include <stdexcept>

namespace warmlab {

namespace {

// 1/(1+e^{-x}) without overflow for any x.
double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1+e^{-x}).
double softplus_neg(double x) {
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

double spectral_norm_2x2(double h11, double h12, double h22) {
  const double m = 0.5 * (h11 + h22);
  const double r = std::sqrt(0.25 * (h11 - h22) * (h11 - h22) + h12 * h12);
  return std::max(std::abs(m + r), std::abs(m - r));
}

double spectral_norm_4x4(const Eigen::Matrix4d& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(h,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Box cube(std::size_t dim, double lo, double hi) {
  return Box{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

double require_param(const std::map<std::string, double>& params,
                     const std::string& objective, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw std::invalid_argument(objective + ": missing parameter '" + key +
                                "'");
  }
  return it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    const std::string& objective,
                    const std::set<std::string>& known) {
  for (const auto& [k, v] : params) {
    if (!known.count(k)) {
      throw std::invalid_argument(objective + ": unknown parameter '" + k +
                                  "'");
    }
  }
}

class Quadratic final : public Objective {
 public:
  Quadratic(double l, std::size_t dim)
      // Constant Hessian: rho=0 convention with Krho=0, K0=L.
      : Objective("quadratic", dim, {0.0, l, 0.0, 0.0}, true,
                  ParamVector(std::vector<double>(dim, 0.0)),
                  cube(dim, -5.0, 5.0),
                  ParamVector(std::vector<double>(dim, 3.0))),
        l_(l) {}

  double value_raw(const std::vector<double>& w) const override {
    return 0.5 * l_ * dot(w, w);
  }
  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = l_ * w[i];
  }
  double hessian_norm_raw(const std::vector<double>&) const override {
    return l_;
  }

 private:
  double l_;
};

class Exponential final : public Objective {
 public:
  Exponential()
      : Objective("exponential", 1, {1.0, 0.0, 1.0, 0.0}, true, std::nullopt,
                  cube(1, -5.0, 5.0), ParamVector{std::log(100.0)}) {}

  double value_raw(const std::vector<double>& w) const override {
    return std::exp(w[0]);
  }
  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    out[0] = std::exp(w[0]);
  }
  double hessian_norm_raw(const std::vector<double>& w) const override {
    return std::exp(w[0]);
  }
};

// 2x + x sin x on [0, inf), 2(e^x - 1) on (-inf, 0). C^2 at the junction.
// The infimum -2 is approached as x -> -inf and never attained.
class TrigLinear final : public Objective {
 public:
  TrigLinear()
      : Objective("trig_linear", 1, {1.0, 2.0, 1.0, -2.0}, false,
                  std::nullopt, cube(1, -5.0, 5.0), ParamVector{10.0}) {}

  double value_raw(const std::vector<double>& w) const override {
    const double x = w[0];
    if (x >= 0.0) return 2.0 * x + x * std::sin(x);
    return 2.0 * std::expm1(x);
  }
  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    const double x = w[0];
    out[0] = x >= 0.0 ? 2.0 + std::sin(x) + x * std::cos(x)
                      : 2.0 * std::exp(x);
  }
  double hessian_norm_raw(const std::vector<double>& w) const override {
    const double x = w[0];
    return x >= 0.0 ? std::abs(2.0 * std::cos(x) - x * std::sin(x))
                    : 2.0 * std::exp(x);
  }
  std::vector<double> junction_points() const override { return {0.0}; }
};

// f(x,y) = h(x) + (K1/2) y^2 with the three-piece h: exponential walls and
// a quadratic floor, C^2 at x = +-1/sqrt(K1).
class RiverValley final : public Objective {
 public:
  RiverValley(double k1, double delta0)
      : Objective("river_valley", 2, {1.0, k1, k1, 0.0}, true,
                  ParamVector{0.0, 0.0},
                  Box{{-3.0 / std::sqrt(k1), -3.0},
                      {std::log(delta0) / std::sqrt(k1) + 1.0, 3.0}},
                  ParamVector{std::log(delta0) / std::sqrt(k1), 2.0}),
        k1_(k1),
        rk_(std::sqrt(k1)) {}

  double value_raw(const std::vector<double>& w) const override {
    return h(w[0]) + 0.5 * k1_ * w[1] * w[1];
  }
  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    out[0] = h1(w[0]);
    out[1] = k1_ * w[1];
  }
  double hessian_norm_raw(const std::vector<double>& w) const override {
    return std::max(h2(w[0]), k1_);
  }
  std::vector<double> junction_points() const override {
    return {-1.0 / rk_, 1.0 / rk_};
  }

 private:
  double h(double x) const {
    if (x < -1.0 / rk_) return std::exp(-rk_ * x - 1.0) - 0.5;
    if (x > 1.0 / rk_) return std::exp(rk_ * x - 1.0) - 0.5;
    return 0.5 * k1_ * x * x;
  }
  double h1(double x) const {
    if (x < -1.0 / rk_) return -rk_ * std::exp(-rk_ * x - 1.0);
    if (x > 1.0 / rk_) return rk_ * std::exp(rk_ * x - 1.0);
    return k1_ * x;
  }
  double h2(double x) const {
    if (x < -1.0 / rk_) return k1_ * std::exp(-rk_ * x - 1.0);
    if (x > 1.0 / rk_) return k1_ * std::exp(rk_ * x - 1.0);
    return k1_;
  }

  double k1_;
  double rk_;
};

// Binary cross-entropy of a four-weight product network plus 0.5*||w||^2:
//   f(w) = 0.5 log 2 + 0.5 log(1+e^{-p}) + 0.5 ||w||^2,   p = w1 w2 w3 w4.
// Minimum log 2 at the origin.
class FfnLoss final : public Objective {
 public:
  FfnLoss()
      : Objective("ffn_loss", 4, {3.0, 16.0, 24.0, std::log(2.0)}, false,
                  ParamVector{0.0, 0.0, 0.0, 0.0}, cube(4, -5.0, 5.0),
                  ParamVector{0.5, 0.5, 0.5, 0.5}) {}

  double value_raw(const std::vector<double>& w) const override {
    const double p = w[0] * w[1] * w[2] * w[3];
    return 0.5 * std::log(2.0) + 0.5 * softplus_neg(p) + 0.5 * dot(w, w);
  }

  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    const double p = w[0] * w[1] * w[2] * w[3];
    const double s = -0.5 * sigmoid(-p);
    double gp[4];
    partial_products(w, gp);
    for (int i = 0; i < 4; ++i) out[i] = s * gp[i] + w[i];
  }

  double hessian_norm_raw(const std::vector<double>& w) const override {
    const double p = w[0] * w[1] * w[2] * w[3];
    const double s = -0.5 * sigmoid(-p);
    const double q = 0.5 * sigmoid(p) * sigmoid(-p);
    double gp[4];
    partial_products(w, gp);
    Eigen::Matrix4d h;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        double v = q * gp[i] * gp[j];
        if (i == j) {
          v += 1.0;
        } else {
          // d^2 p / dw_i dw_j = product of the remaining two coordinates
          double prod = 1.0;
          for (int k = 0; k < 4; ++k) {
            if (k != i && k != j) prod *= w[k];
          }
          v += s * prod;
        }
        h(i, j) = v;
      }
    }
    return spectral_norm_4x4(h);
  }

 private:
  static void partial_products(const std::vector<double>& w, double gp[4]) {
    gp[0] = w[1] * w[2] * w[3];
    gp[1] = w[0] * w[2] * w[3];
    gp[2] = w[0] * w[1] * w[3];
    gp[3] = w[0] * w[1] * w[2];
  }
};

// Recurrent-cell cross-entropy with ridge term:
//   f(w) = 0.5 (log 2 + log(1+e^{-p}) + w1^2 + w2^2),   p = w1^3 w2.
// Minimum log 2 at the origin.
class RnnLoss final : public Objective {
 public:
  RnnLoss()
      : Objective("rnn_loss", 2, {3.0, 34.0, 40.0, std::log(2.0)}, false,
                  ParamVector{0.0, 0.0}, cube(2, -5.0, 5.0),
                  ParamVector{0.5, 0.5}) {}

  double value_raw(const std::vector<double>& w) const override {
    const double p = w[0] * w[0] * w[0] * w[1];
    return 0.5 * (std::log(2.0) + softplus_neg(p) + w[0] * w[0] +
                  w[1] * w[1]);
  }

  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    const double w1 = w[0], w2 = w[1];
    const double p = w1 * w1 * w1 * w2;
    const double sm = sigmoid(-p);
    out[0] = -1.5 * w1 * w1 * w2 * sm + w1;
    out[1] = -0.5 * w1 * w1 * w1 * sm + w2;
  }

  double hessian_norm_raw(const std::vector<double>& w) const override {
    const double w1 = w[0], w2 = w[1];
    const double p = w1 * w1 * w1 * w2;
    const double sm = sigmoid(-p);
    const double q = sigmoid(p) * sm;  // e^p / (1+e^p)^2
    const double w1_2 = w1 * w1;
    const double w1_4 = w1_2 * w1_2;
    const double h11 = 4.5 * w1_4 * w2 * w2 * q - 3.0 * w1 * w2 * sm + 1.0;
    const double h12 = 1.5 * w1_4 * w1 * w2 * q - 1.5 * w1_2 * sm;
    const double h22 = 0.5 * w1_4 * w1_2 * q + 1.0;
    return spectral_norm_2x2(h11, h12, h22);
  }
};

class TwoCosh final : public Objective {
 public:
  TwoCosh()
      : Objective("two_cosh", 1, {1.0, 2.0, 1.0, 2.0}, true,
                  ParamVector{0.0}, cube(1, -5.0, 5.0), ParamVector{3.0}) {}

  double value_raw(const std::vector<double>& w) const override {
    return std::exp(w[0]) + std::exp(-w[0]);
  }
  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    out[0] = std::exp(w[0]) - std::exp(-w[0]);
  }
  double hessian_norm_raw(const std::vector<double>& w) const override {
    return std::exp(w[0]) + std::exp(-w[0]);
  }
};

}  // namespace

ObjectiveHandle make_objective(const std::string& name,
                               const std::map<std::string, double>& params) {
  if (name == "quadratic") {
    reject_unknown(params, name, {"L", "dim"});
    const double l = require_param(params, name, "L");
    if (!(l > 0.0)) throw std::invalid_argument("quadratic: L must be > 0");
    double dim = 1.0;
    if (auto it = params.find("dim"); it != params.end()) dim = it->second;
    if (dim != std::floor(dim) || dim < 1.0 || dim > 4.0) {
      throw std::invalid_argument("quadratic: dim must be an integer in 1..4");
    }
    return std::make_shared<Quadratic>(l, static_cast<std::size_t>(dim));
  }
  if (name == "exponential") {
    reject_unknown(params, name, {});
    return std::make_shared<Exponential>();
  }
  if (name == "trig_linear") {
    reject_unknown(params, name, {});
    return std::make_shared<TrigLinear>();
  }
  if (name == "river_valley") {
    reject_unknown(params, name, {"K1", "Delta0"});
    const double k1 = require_param(params, name, "K1");
    const double d0 = require_param(params, name, "Delta0");
    if (!(k1 > 0.0)) {
      throw std::invalid_argument("river_valley: K1 must be > 0");
    }
    if (!(d0 > std::exp(1.0))) {
      throw std::invalid_argument("river_valley: Delta0 must exceed e");
    }
    return std::make_shared<RiverValley>(k1, d0);
  }
  if (name == "ffn_loss") {
    reject_unknown(params, name, {});
    return std::make_shared<FfnLoss>();
  }
  if (name == "rnn_loss") {
    reject_unknown(params, name, {});
    return std::make_shared<RnnLoss>();
  }
  if (name == "two_cosh") {
    reject_unknown(params, name, {});
    return std::make_shared<TwoCosh>();
  }
  throw std::invalid_argument("make_objective: unknown objective '" + name +
                              "'");
}

std::vector<ObjectiveHandle> default_suite() {
  return {
      make_objective("quadratic", {{"L", 5.0}, {"dim", 1.0}}),
      make_objective("exponential"),
      make_objective("trig_linear"),
      make_objective("river_valley", {{"K1", 10.0}, {"Delta0", 1000.0}}),
      make_objective("ffn_loss"),
      make_objective("rnn_loss"),
      make_objective("two_cosh"),
  };
}

}  // namespace warmlab
