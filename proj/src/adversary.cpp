#include "warmlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace warmlab {

namespace {

constexpr double kPi = std::numbers::pi;

struct PieceRef {
  enum class Kind { HLeft, HQuartic, HRight, Trig, Link, Tail };
  Kind kind;
  std::size_t idx = 0;  // trig index
};

struct Eval {
  double v;
  double d1;
  double d2;
};

Eval eval_h(const AdversaryInstance& inst, double x, PieceRef::Kind kind) {
  const double rk = std::sqrt(inst.k1);
  const double c = 1.0 / rk;
  const double eps = inst.eps;
  switch (kind) {
    case PieceRef::Kind::HLeft:
      return {-2.0 * eps * (x + c) + 1.25 * eps * c, -2.0 * eps, 0.0};
    case PieceRef::Kind::HRight:
      return {2.0 * eps * (x - c) + 1.25 * eps * c, 2.0 * eps, 0.0};
    default: {
      const double k32 = inst.k1 * rk;
      const double x2 = x * x;
      return {0.25 * eps * (6.0 * rk * x2 - k32 * x2 * x2),
              0.25 * eps * (12.0 * rk * x - 4.0 * k32 * x2 * x),
              0.25 * eps * (12.0 * rk - 12.0 * k32 * x2)};
    }
  }
}

Eval eval_trig(const TrigPiece& p, double x) {
  const double s = p.b * (x - p.x_right) + p.phase;
  const double sn = std::sin(s);
  const double cs = std::cos(s);
  return {p.a * sn + p.d, p.a * p.b * cs, -p.a * p.b * p.b * sn};
}

Eval eval_link(const AdversaryInstance& inst, double x) {
  const double span = inst.link_right - inst.link_left;
  const double z = (x - inst.link_left) / span;
  const double v = (((inst.link_a * z + inst.link_b) * z + inst.link_c) * z +
                    inst.link_d) *
                       z +
                   inst.link_e;
  const double d1 = ((4.0 * inst.link_a * z + 3.0 * inst.link_b) * z +
                     2.0 * inst.link_c) *
                        z +
                    inst.link_d;
  const double d2 =
      (12.0 * inst.link_a * z + 6.0 * inst.link_b) * z + 2.0 * inst.link_c;
  return {v, d1 / span, d2 / (span * span)};
}

Eval eval_tail(const AdversaryInstance& inst, double x) {
  const double rk = std::sqrt(inst.k1);
  const double u = rk * (x - inst.x0);
  const double e = std::exp(-u);
  const double d = inst.delta;
  return {inst.tail_base + d * (1.0 + 2.0 * u + 2.0 * u * u) * e,
          d * rk * e * (1.0 + 2.0 * u - 2.0 * u * u),
          d * inst.k1 * e * (1.0 - 6.0 * u + 2.0 * u * u)};
}

Eval eval_piece(const AdversaryInstance& inst, PieceRef ref, double x) {
  switch (ref.kind) {
    case PieceRef::Kind::Trig:
      return eval_trig(inst.trig[ref.idx], x);
    case PieceRef::Kind::Link:
      return eval_link(inst, x);
    case PieceRef::Kind::Tail:
      return eval_tail(inst, x);
    default:
      return eval_h(inst, x, ref.kind);
  }
}

PieceRef h_piece_at(double k1, double x) {
  const double c = 1.0 / std::sqrt(k1);
  if (x < -c) return {PieceRef::Kind::HLeft};
  if (x > c) return {PieceRef::Kind::HRight};
  return {PieceRef::Kind::HQuartic};
}

// Dispatch with half-open pieces (x_{t+1}, x_t]. Below the last chain
// junction case 2 continues the final sine; case 3 enters the well.
PieceRef piece_at(const AdversaryInstance& inst, double x) {
  if (inst.case_id == 1) return h_piece_at(inst.k1, x);

  const std::vector<double>& js = inst.junctions;
  if (x > js.front()) return {PieceRef::Kind::Tail};
  if (inst.case_id == 3 && x <= inst.link_left) {
    return h_piece_at(inst.k1, x);
  }
  // first junction strictly below x
  auto it = std::upper_bound(js.begin(), js.end(), x,
                             [](double v, double elem) { return v > elem; });
  const std::size_t k = static_cast<std::size_t>(it - js.begin());
  if (inst.case_id == 2) {
    if (k == js.size()) return {PieceRef::Kind::Trig, inst.trig.size() - 1};
    return {PieceRef::Kind::Trig, k - 1};
  }
  // case 3: piece tau is the link
  const std::size_t piece = k - 1;
  if (piece >= static_cast<std::size_t>(inst.tau)) {
    return {PieceRef::Kind::Link};
  }
  return {PieceRef::Kind::Trig, piece};
}

TrigPiece make_trig_piece(double k1, double delta, double eta, double x_right,
                          double base_value) {
  const double rk = std::sqrt(k1);
  const double alpha = eta * k1 * delta / (2.0 * kPi);
  const double b = 2.0 * kPi / (eta * rk * delta);
  const double a = delta * alpha * std::sqrt(1.0 + alpha * alpha);
  const double phase = std::atan(-alpha);
  const double d = a + base_value -
                   delta * alpha / (alpha + std::sqrt(1.0 + alpha * alpha));
  return {a, b, phase, d, x_right};
}

}  // namespace

double AdversaryInstance::value(double x) const {
  return eval_piece(*this, piece_at(*this, x), x).v;
}
double AdversaryInstance::deriv(double x) const {
  return eval_piece(*this, piece_at(*this, x), x).d1;
}
double AdversaryInstance::second_deriv(double x) const {
  return eval_piece(*this, piece_at(*this, x), x).d2;
}

std::pair<int, long long> classify_schedule(const std::vector<double>& etas,
                                            double k1, double delta) {
  if (etas.empty()) {
    throw std::invalid_argument("classify_schedule: empty sequence");
  }
  if (!(k1 > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("classify_schedule: K1 and delta must be > 0");
  }
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0) || !std::isfinite(etas[i])) {
      throw std::invalid_argument(
          "classify_schedule: rates must be positive and finite");
    }
    if (i > 0 && etas[i] > etas[i - 1]) {
      throw std::invalid_argument(
          "classify_schedule: sequence must be non-increasing");
    }
  }
  const double threshold = 2.0 / (k1 * delta);
  if (etas.front() <= threshold) return {1, -1};
  if (etas.back() > threshold) return {2, -1};
  long long tau = 0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (etas[i] > threshold) tau = static_cast<long long>(i);
  }
  return {3, tau};
}

namespace {

AdversaryInstance instance_shell(int case_id, long long tau,
                                 const std::vector<double>& etas, double k1,
                                 double delta, double eps) {
  AdversaryInstance inst;
  inst.case_id = case_id;
  inst.k1 = k1;
  inst.delta = delta;
  inst.eps = eps;
  inst.tau = tau;
  inst.etas = etas;
  inst.f_star = 0.0;
  inst.certificate = {1.0, eps * std::sqrt(k1), 4.0 * kPi * k1, 0.0};
  return inst;
}

}  // namespace

AdversaryInstance build_case2_chain(const std::vector<double>& etas, double k1,
                                    double delta, double eps) {
  if (etas.empty()) {
    throw std::invalid_argument("build_case2_chain: empty sequence");
  }
  if (!(k1 > 0.0) || !(delta > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument(
        "build_case2_chain: K1, delta, eps must be > 0");
  }
  for (double eta : etas) {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
      throw std::invalid_argument(
          "build_case2_chain: rates must be positive and finite");
    }
  }
  AdversaryInstance inst = instance_shell(2, -1, etas, k1, delta, eps);
  const double rk = std::sqrt(k1);
  inst.x0 = 0.0;
  inst.w0 = 0.0;
  inst.tail_base = 0.0;
  inst.junctions.reserve(etas.size() + 1);
  inst.junctions.push_back(inst.x0);
  double x = inst.x0;
  for (double eta : etas) {
    inst.trig.push_back(make_trig_piece(k1, delta, eta, x, delta));
    x -= eta * rk * delta;
    inst.junctions.push_back(x);
  }
  return inst;
}

AdversaryInstance build_instance(const std::vector<double>& etas, double k1,
                                 double delta, double eps) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("build_instance: eps must be > 0");
  }
  const auto [case_id, tau] = classify_schedule(etas, k1, delta);

  const double rk = std::sqrt(k1);
  const double c = 1.0 / rk;

  if (case_id == 1) {
    AdversaryInstance inst = instance_shell(1, -1, etas, k1, delta, eps);
    inst.w0 = c + delta / eps;
    inst.y0 = inst.w0;
    inst.junctions = {c, -c};
    return inst;
  }

  if (case_id == 2) return build_case2_chain(etas, k1, delta, eps);

  AdversaryInstance inst = instance_shell(3, tau, etas, k1, delta, eps);

  // Case 3.
  const double eta_tau = etas[static_cast<std::size_t>(tau)];
  if (eps > 2.0 * rk * delta / 5.0) {
    throw std::invalid_argument(
        "build_instance: case 3 requires eps <= 2 sqrt(K1) delta / 5");
  }
  if (eps > 1.0 / (2.0 * eta_tau * rk)) {
    throw std::invalid_argument(
        "build_instance: case 3 requires eps <= 1/(2 eta_tau sqrt(K1))");
  }
  if (eta_tau * k1 * delta <= 6.0) {
    throw std::invalid_argument(
        "build_instance: eta_tau K1 delta in (2, 6] has no construction");
  }

  const double span = eta_tau * rk * delta;
  const double big_a = 2.0 * eps * span;
  const double big_b = rk * delta * span;
  const double big_c = 0.0;
  const double big_d = k1 * delta * span * span;
  inst.link_A = big_a;
  inst.link_B = big_b;
  inst.link_C = big_c;
  inst.link_D = big_d;
  inst.link_a = (2.0 * big_a - 2.0 * big_b + big_c + big_d) / 4.0;
  inst.link_b = (-3.0 * big_a + 3.0 * big_b - 2.0 * big_c - big_d) / 3.0;
  inst.link_c = big_c / 2.0;
  inst.link_d = big_a;
  inst.link_e =
      big_d / 12.0 - big_b / 2.0 + 7.0 * delta + 1.25 * eps * c;
  inst.g_at_x_tau = 0.5 * big_a + 7.0 * delta + 1.25 * eps * c;

  // y0 is pinned by value continuity with the well's linear branch,
  // h(y0) = link_e; the offset above the well's 2*delta baseline must come
  // out positive.
  const double m = inst.link_e - 1.25 * eps * c - 2.0 * delta;
  if (!(m > 0.0)) {
    throw std::invalid_argument(
        "build_instance: case 3 junction offset M is not positive");
  }
  inst.y0 = c + (inst.link_e - 1.25 * eps * c) / (2.0 * eps);

  const std::size_t n_chain = static_cast<std::size_t>(tau) + 1;
  inst.junctions.assign(n_chain + 1, 0.0);
  inst.junctions[n_chain] = inst.y0;
  for (std::size_t i = n_chain; i-- > 0;) {
    inst.junctions[i] = inst.junctions[i + 1] + etas[i] * rk * delta;
  }
  inst.x0 = inst.junctions.front();
  inst.w0 = inst.x0;
  inst.link_left = inst.y0;
  inst.link_right = inst.junctions[static_cast<std::size_t>(tau)];
  inst.tail_base = inst.g_at_x_tau - delta;

  for (long long t = 0; t < tau; ++t) {
    inst.trig.push_back(make_trig_piece(
        k1, delta, etas[static_cast<std::size_t>(t)],
        inst.junctions[static_cast<std::size_t>(t)], inst.g_at_x_tau));
  }
  return inst;
}

namespace {

class InstanceObjective final : public Objective {
 public:
  explicit InstanceObjective(AdversaryInstance inst)
      : Objective("adversary_case" + std::to_string(inst.case_id), 1,
                  inst.certificate, false,
                  inst.case_id == 2
                      ? std::optional<ParamVector>()
                      : std::optional<ParamVector>(ParamVector{0.0}),
                  sampling_box_of(inst), ParamVector{inst.w0}),
        inst_(std::move(inst)) {}

  double value_raw(const std::vector<double>& w) const override {
    return inst_.value(w[0]);
  }
  void gradient_raw(const std::vector<double>& w,
                    std::vector<double>& out) const override {
    out[0] = inst_.deriv(w[0]);
  }
  double hessian_norm_raw(const std::vector<double>& w) const override {
    return std::abs(inst_.second_deriv(w[0]));
  }
  std::vector<double> junction_points() const override {
    std::vector<double> js = inst_.junctions;
    if (inst_.case_id == 3) {
      const double c = 1.0 / std::sqrt(inst_.k1);
      js.push_back(c);
      js.push_back(-c);
    }
    return js;
  }

 private:
  static Box sampling_box_of(const AdversaryInstance& inst) {
    const double c = 1.0 / std::sqrt(inst.k1);
    if (inst.case_id == 1) {
      return Box{{-c - 1.0}, {inst.w0 + 1.0}};
    }
    if (inst.case_id == 2) {
      return Box{{inst.junctions.back()}, {inst.x0 + 6.0 * c}};
    }
    return Box{{-c - 1.0}, {inst.x0 + 6.0 * c}};
  }

  AdversaryInstance inst_;
};

}  // namespace

ObjectiveHandle instance_objective(const AdversaryInstance& inst) {
  return std::make_shared<InstanceObjective>(inst);
}

CountResult count_iterations_to_stationarity(const AdversaryInstance& inst,
                                             const std::vector<double>& etas,
                                             long long t_max) {
  if (etas.empty()) {
    throw std::invalid_argument(
        "count_iterations_to_stationarity: empty sequence");
  }
  if (t_max < 1) {
    throw std::invalid_argument(
        "count_iterations_to_stationarity: t_max must be >= 1");
  }
  CountResult res;
  double w = inst.w0;
  for (long long t = 0; t <= t_max; ++t) {
    const double f = inst.value(w);
    const double g = inst.deriv(w);
    res.iterates.push_back(w);
    res.values.push_back(f);
    res.grad_abs.push_back(std::abs(g));
    if (std::abs(g) <= inst.eps) {
      res.count = t;
      return res;
    }
    if (t == t_max) break;
    const std::size_t i = std::min(static_cast<std::size_t>(t),
                                   etas.size() - 1);
    w -= etas[i] * g;
  }
  return res;  // censored
}

namespace {

double rel_mismatch(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

InstanceReport verify_instance(const AdversaryInstance& inst,
                               long long samples) {
  InstanceReport rep;
  const double rk = std::sqrt(inst.k1);
  const double c = 1.0 / rk;

  struct Junction {
    double x;
    PieceRef left;
    PieceRef right;
  };
  std::vector<Junction> junctions;
  if (inst.case_id == 1) {
    junctions.push_back({-c,
                         {PieceRef::Kind::HLeft},
                         {PieceRef::Kind::HQuartic}});
    junctions.push_back({c,
                         {PieceRef::Kind::HQuartic},
                         {PieceRef::Kind::HRight}});
  } else if (inst.case_id == 2) {
    junctions.push_back({inst.x0,
                         {PieceRef::Kind::Trig, 0},
                         {PieceRef::Kind::Tail}});
    for (std::size_t j = 1; j + 1 < inst.junctions.size(); ++j) {
      junctions.push_back({inst.junctions[j],
                           {PieceRef::Kind::Trig, j},
                           {PieceRef::Kind::Trig, j - 1}});
    }
  } else {
    const std::size_t tau = static_cast<std::size_t>(inst.tau);
    junctions.push_back({inst.x0,
                         tau > 0 ? PieceRef{PieceRef::Kind::Trig, 0}
                                 : PieceRef{PieceRef::Kind::Link},
                         {PieceRef::Kind::Tail}});
    for (std::size_t j = 1; j < tau; ++j) {
      junctions.push_back({inst.junctions[j],
                           {PieceRef::Kind::Trig, j},
                           {PieceRef::Kind::Trig, j - 1}});
    }
    if (tau > 0) {
      junctions.push_back({inst.link_right,
                           {PieceRef::Kind::Link},
                           {PieceRef::Kind::Trig, tau - 1}});
    }
    junctions.push_back({inst.y0,
                         {PieceRef::Kind::HRight},
                         {PieceRef::Kind::Link}});
    junctions.push_back({c,
                         {PieceRef::Kind::HQuartic},
                         {PieceRef::Kind::HRight}});
    junctions.push_back({-c,
                         {PieceRef::Kind::HLeft},
                         {PieceRef::Kind::HQuartic}});
  }

  for (const Junction& j : junctions) {
    const Eval l = eval_piece(inst, j.left, j.x);
    const Eval r = eval_piece(inst, j.right, j.x);
    rep.max_junction_value_mismatch =
        std::max(rep.max_junction_value_mismatch, rel_mismatch(l.v, r.v));
    rep.max_junction_d1_mismatch =
        std::max(rep.max_junction_d1_mismatch, rel_mismatch(l.d1, r.d1));
    rep.max_junction_d2_mismatch =
        std::max(rep.max_junction_d2_mismatch, rel_mismatch(l.d2, r.d2));
  }

  // Certificate inequality over a uniform grid plus junction neighborhoods.
  double lo, hi;
  if (inst.case_id == 1) {
    lo = -c - 1.0;
    hi = inst.w0 * 1.02 + 1.0;
  } else if (inst.case_id == 2) {
    lo = inst.junctions.back();
    hi = inst.x0 + 6.0 * c;
  } else {
    lo = -c - 1.0;
    hi = inst.x0 + 6.0 * c;
  }
  const SmoothnessCertificate& cert = inst.certificate;
  auto violation_at = [&](double x, double k0) {
    const double f = inst.value(x);
    const double h = std::abs(inst.second_deriv(x));
    const double bound = k0 + cert.krho * (f - cert.f_star);
    return (h - bound) / (1.0 + std::abs(f));
  };
  double worst = -std::numeric_limits<double>::infinity();
  double worst3 = worst;
  const long long n = std::max<long long>(samples, 2);
  for (long long i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(n - 1);
    worst = std::max(worst, violation_at(x, cert.k0));
    worst3 = std::max(worst3, violation_at(x, 3.0 * cert.k0));
  }
  for (const Junction& j : junctions) {
    for (double off : {-1e-9, 0.0, 1e-9}) {
      const double x = j.x + off * std::max(1.0, std::abs(j.x));
      worst = std::max(worst, violation_at(x, cert.k0));
      worst3 = std::max(worst3, violation_at(x, 3.0 * cert.k0));
    }
  }
  rep.certificate_violation = worst;
  rep.certificate_violation_k0_3x = worst3;

  if (inst.case_id == 3) {
    double gmin = std::numeric_limits<double>::infinity();
    double d2max = 0.0;
    const long long m = 20000;
    for (long long i = 0; i <= m; ++i) {
      const double x = inst.link_left + (inst.link_right - inst.link_left) *
                                            static_cast<double>(i) /
                                            static_cast<double>(m);
      const Eval e = eval_link(inst, x);
      gmin = std::min(gmin, e.v);
      d2max = std::max(d2max, std::abs(e.d2));
    }
    rep.g_min_margin = gmin - inst.delta;
    rep.g_d2_margin = inst.k1 * inst.delta - d2max;
    rep.link_ok = rep.g_min_margin >= -1e-9 && rep.g_d2_margin >= -1e-9;
  } else {
    rep.g_min_margin = std::numeric_limits<double>::quiet_NaN();
    rep.g_d2_margin = std::numeric_limits<double>::quiet_NaN();
    rep.link_ok = true;
  }

  rep.w0_gap = inst.value(inst.w0) - inst.f_star;
  rep.gap_ok = rep.w0_gap <= 8.0 * inst.delta * (1.0 + 1e-12);
  rep.junctions_ok = rep.max_junction_value_mismatch <= 1e-8 &&
                     rep.max_junction_d1_mismatch <= 1e-8 &&
                     rep.max_junction_d2_mismatch <= 1e-8;
  rep.certificate_ok = rep.certificate_violation <= 1e-9;
  return rep;
}

std::string instance_dump(const AdversaryInstance& inst) {
  std::ostringstream os;
  os.precision(17);
  os << "adversary instance: case " << inst.case_id << "\n";
  os << "  K1=" << inst.k1 << " delta=" << inst.delta << " eps=" << inst.eps
     << " tau=" << inst.tau << "\n";
  os << "  w0=" << inst.w0 << " x0=" << inst.x0 << " y0=" << inst.y0
     << " f*=" << inst.f_star << "\n";
  os << "  certificate: rho=" << inst.certificate.rho
     << " K0=" << inst.certificate.k0 << " Krho=" << inst.certificate.krho
     << "\n";
  os << "  junctions (" << inst.junctions.size() << "):";
  const std::size_t show = std::min<std::size_t>(inst.junctions.size(), 12);
  for (std::size_t i = 0; i < show; ++i) os << " " << inst.junctions[i];
  if (show < inst.junctions.size()) os << " ...";
  os << "\n";
  if (!inst.trig.empty()) {
    os << "  trig pieces (" << inst.trig.size() << "), first:"
       << " a=" << inst.trig[0].a << " b=" << inst.trig[0].b
       << " c=" << inst.trig[0].c() << " d=" << inst.trig[0].d << "\n";
  }
  if (inst.case_id == 3) {
    os << "  link: a=" << inst.link_a << " b=" << inst.link_b
       << " c=" << inst.link_c << " d=" << inst.link_d
       << " e=" << inst.link_e << "\n";
    os << "  link ABCD: A=" << inst.link_A << " B=" << inst.link_B
       << " C=" << inst.link_C << " D=" << inst.link_D
       << " g(x_tau)=" << inst.g_at_x_tau << "\n";
  }
  return os.str();
}

}  // namespace warmlab
