#include "warmlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "warmlab/csv.hpp"
#include "warmlab/rng.hpp"
#include "warmlab/smoothness.hpp"

namespace warmlab {

namespace {

using nlohmann::json;

// Runs fn(0..n-1) on a small worker pool; results must be written to
// pre-sized slots so aggregation stays order-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t k = 0; k < workers; ++k) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

NoiseSpec::Kind noise_kind_from_name(const std::string& name) {
  if (name == "none") return NoiseSpec::Kind::None;
  if (name == "bounded_sphere") return NoiseSpec::Kind::BoundedSphere;
  if (name == "abc") return NoiseSpec::Kind::ABC;
  if (name == "subgaussian_abc") return NoiseSpec::Kind::SubGaussianABC;
  throw std::invalid_argument("unknown noise kind '" + name + "'");
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") +
                                e.what());
  }
  ExperimentConfig cfg;
  cfg.kind = j.value("kind", std::string());
  if (cfg.kind != "compare" && cfg.kind != "verify" && cfg.kind != "adversary" &&
      cfg.kind != "fit") {
    throw std::invalid_argument(
        "config: kind must be compare, verify, adversary, or fit");
  }
  if (j.contains("objective")) {
    const json& o = j.at("objective");
    cfg.objective_name = o.value("name", std::string());
    if (o.contains("params")) {
      for (auto it = o.at("params").begin(); it != o.at("params").end();
           ++it) {
        cfg.objective_params[it.key()] = it.value().get<double>();
      }
    }
  }
  if (j.contains("w0")) {
    std::vector<double> w = j.at("w0").get<std::vector<double>>();
    cfg.w0 = ParamVector(std::move(w));
  }
  cfg.big_t = j.value("T", cfg.big_t);
  cfg.eps_stop = j.value("eps_stop", cfg.eps_stop);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.record_every = j.value("record_every", cfg.record_every);
  if (cfg.record_every < 1) {
    throw std::invalid_argument("config: record_every must be >= 1");
  }

  const double default_delta = j.value("delta", 0.05);
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    cfg.noise.kind = noise_kind_from_name(n.value("kind", std::string("none")));
    cfg.noise.sigma = n.value("sigma", 0.0);
    cfg.noise.a = n.value("A", 0.0);
    cfg.noise.b = n.value("B", 0.0);
    cfg.noise.c = n.value("c", 1.0);
  }
  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (j.contains("schedules")) {
    for (const json& s : j.at("schedules")) {
      ScheduleConfig sc;
      const std::string name = s.value("name", std::string());
      sc.spec.kind = schedule_kind_from_name(name);
      sc.label = s.value("label", name);
      sc.spec.sigma = s.value("sigma", cfg.noise.sigma);
      sc.spec.noise_a = s.value("A", cfg.noise.a);
      sc.spec.noise_b = s.value("B", cfg.noise.b);
      sc.spec.delta = s.value("delta", default_delta);
      sc.spec.eta_peak = s.value("eta_peak", 0.0);
      sc.spec.warmup_steps = s.value("warmup_steps", 0ll);
      sc.spec.scale = s.value("scale", 1.0);
      sc.spec.horizon = cfg.big_t;
      cfg.schedules.push_back(std::move(sc));
    }
  }
  if (j.contains("tolerances")) {
    for (auto it = j.at("tolerances").begin(); it != j.at("tolerances").end();
         ++it) {
      cfg.tolerances[it.key()] = it.value().get<double>();
    }
  }
  if (j.contains("verify")) {
    const json& v = j.at("verify");
    cfg.verify_samples = v.value("samples", cfg.verify_samples);
    cfg.verify_pairs = v.value("pairs", cfg.verify_pairs);
    cfg.verify_fd_points = v.value("fd_points", cfg.verify_fd_points);
    cfg.verify_hp_seeds = v.value("hp_seeds", cfg.verify_hp_seeds);
    cfg.corrupt_objective = v.value("corrupt_objective", std::string());
    cfg.corrupt_krho_factor = v.value("corrupt_krho_factor", 1.0);
  }
  if (j.contains("adversary")) {
    const json& a = j.at("adversary");
    if (a.contains("etas")) {
      cfg.adv_etas = a.at("etas").get<std::vector<double>>();
    } else if (a.contains("eta_constant")) {
      const long long steps = a.value("eta_steps", 1000ll);
      cfg.adv_etas.assign(static_cast<std::size_t>(steps),
                          a.at("eta_constant").get<double>());
    }
    cfg.adv_k1 = a.value("k1", cfg.adv_k1);
    cfg.adv_delta = a.value("delta", cfg.adv_delta);
    cfg.adv_eps = a.value("eps", cfg.adv_eps);
    cfg.adv_t_max = a.value("t_max", cfg.adv_t_max);
  }
  if (j.contains("fit")) {
    cfg.fit_estimator_n = j.at("fit").value("estimator_n", 6);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_json(ss.str());
}

ComparisonReport compare_schedules(const Objective& obj,
                                   const std::vector<ScheduleConfig>& schedules,
                                   const ParamVector& w0, long long big_t,
                                   double eps_stop, const NoiseSpec& noise,
                                   const std::vector<std::uint64_t>& seeds,
                                   std::vector<Trajectory>* trajectories) {
  if (schedules.size() < 2) {
    throw std::invalid_argument("compare_schedules: need at least 2 schedules");
  }
  std::vector<std::uint64_t> run_seeds = seeds;
  if (run_seeds.empty()) run_seeds.push_back(0);

  const std::size_t n_sched = schedules.size();
  const std::size_t n_seeds = run_seeds.size();
  const bool full_record = trajectories != nullptr;
  std::vector<Trajectory> runs(n_sched * n_seeds);
  std::vector<double> wall(n_sched * n_seeds, 0.0);

  parallel_for(n_sched * n_seeds, [&](std::size_t idx) {
    const std::size_t s = idx / n_seeds;
    const std::size_t k = idx % n_seeds;
    NoiseSpec run_noise = noise;
    run_noise.seed = run_seeds[k];
    RunOptions opts;
    opts.record_points = full_record;
    const auto start = std::chrono::steady_clock::now();
    runs[idx] = run_sgd(obj, w0, schedules[s].spec, run_noise, big_t,
                        eps_stop, opts);
    wall[idx] = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  });

  ComparisonReport report;
  for (std::size_t s = 0; s < n_sched; ++s) {
    ScheduleOutcome out;
    out.label = schedules[s].label;
    std::vector<double> iters, mgs, dar;
    bool all_reached = true;
    for (std::size_t k = 0; k < n_seeds; ++k) {
      const Trajectory& t = runs[s * n_seeds + k];
      out.wall_ms += wall[s * n_seeds + k];
      out.diverged_runs += t.diverged ? 1 : 0;
      if (t.iterations_to_eps) {
        iters.push_back(static_cast<double>(*t.iterations_to_eps));
      } else {
        all_reached = false;
      }
      mgs.push_back(t.min_grad_sq);
      dar.push_back(t.delta_avg_rho);
    }
    out.censored = !all_reached;
    out.iterations_to_eps = median(iters);
    out.min_grad_sq = median(mgs);
    out.delta_avg_rho = median(dar);
    report.per_schedule.push_back(std::move(out));
  }
  for (std::size_t a = 0; a < n_sched; ++a) {
    for (std::size_t b = 0; b < n_sched; ++b) {
      if (a == b) continue;
      ComparisonReport::Ratio r;
      r.numerator = schedules[a].label;
      r.denominator = schedules[b].label;
      const ScheduleOutcome& oa = report.per_schedule[a];
      const ScheduleOutcome& ob = report.per_schedule[b];
      r.valid = !oa.censored && !ob.censored && ob.iterations_to_eps > 0.0;
      if (r.valid) r.value = oa.iterations_to_eps / ob.iterations_to_eps;
      report.ratios.push_back(r);
    }
  }
  if (trajectories) *trajectories = std::move(runs);
  return report;
}

std::string comparison_report_csv(const ComparisonReport& report) {
  std::string out =
      "schedule,censored,iterations_to_eps,min_grad_sq,delta_avg_rho,"
      "diverged_runs\n";
  for (const ScheduleOutcome& s : report.per_schedule) {
    out += s.label;
    out += ',';
    out += s.censored ? "1" : "0";
    out += ',';
    out += s.censored ? "censored" : format_double(s.iterations_to_eps);
    out += ',';
    out += format_double(s.min_grad_sq);
    out += ',';
    out += format_double(s.delta_avg_rho);
    out += ',';
    out += std::to_string(s.diverged_runs);
    out += '\n';
  }
  for (const ComparisonReport::Ratio& r : report.ratios) {
    out += "ratio:" + r.numerator + "/" + r.denominator;
    out += ",,";
    out += r.valid ? format_double(r.value) : "censored";
    out += ",,,\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

namespace {

ParamVector random_point(CounterRng& rng, const Box& box) {
  std::vector<double> w(box.lo.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = box.lo[i] + rng.next_unit() * (box.hi[i] - box.lo[i]);
  }
  return ParamVector(std::move(w));
}

double tol_or(const ExperimentConfig& cfg, const std::string& key,
              double fallback) {
  auto it = cfg.tolerances.find(key);
  return it == cfg.tolerances.end() ? fallback : it->second;
}

CheckResult vacuous(const std::string& name) {
  return {name, true, 0.0, "warning: zero budget, vacuous pass"};
}

// max over sampled points of ||H|| - (K0 + Krho gap^rho); pass if under tol.
CheckResult check_certificate(const Objective& obj,
                              const SmoothnessCertificate& cert,
                              long long samples, double tol,
                              std::uint64_t seed) {
  CheckResult res{"certificate_inequality:" + obj.name(), true, 0.0, ""};
  if (samples <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  double worst = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < samples; ++i) {
    const ParamVector w = random_point(rng, obj.sampling_box());
    const double gap = obj.value(w) - cert.f_star;
    const double bound =
        cert.k0 + cert.krho * std::pow(std::max(gap, 0.0), cert.rho);
    worst = std::max(worst, obj.hessian_norm(w) - bound);
  }
  res.worst = worst;
  res.pass = worst <= tol;
  return res;
}

CheckResult check_gradient_fd(const Objective& obj, long long points,
                              double tol, std::uint64_t seed) {
  CheckResult res{"gradient_fd:" + obj.name(), true, 0.0, ""};
  if (points <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  double worst = 0.0;
  for (long long i = 0; i < points; ++i) {
    const ParamVector w = random_point(rng, obj.sampling_box());
    const ParamVector g = obj.gradient(w);
    std::vector<double> fd(w.dim());
    std::vector<double> a = w.coords(), b = w.coords();
    for (std::size_t k = 0; k < w.dim(); ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(w[k]));
      a[k] = w[k] + h;
      b[k] = w[k] - h;
      fd[k] = (obj.value_raw(a) - obj.value_raw(b)) / (2.0 * h);
      a[k] = w[k];
      b[k] = w[k];
    }
    std::vector<double> diff(w.dim());
    for (std::size_t k = 0; k < w.dim(); ++k) diff[k] = fd[k] - g[k];
    const double rel = norm(diff) / (1.0 + norm(g.coords()));
    worst = std::max(worst, rel);
  }
  res.worst = worst;
  res.pass = worst <= tol;
  return res;
}

CheckResult check_lower_bounded(const Objective& obj, long long samples,
                                std::uint64_t seed) {
  CheckResult res{"lower_bounded:" + obj.name(), true, 0.0, ""};
  if (samples <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  double worst = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < samples; ++i) {
    const ParamVector w = random_point(rng, obj.sampling_box());
    worst = std::max(worst, obj.certificate().f_star - obj.value(w));
  }
  res.worst = worst;
  res.pass = worst <= 1e-12;
  return res;
}

CheckResult check_junctions(const Objective& obj, double tol) {
  CheckResult res{"junction_c1:" + obj.name(), true, 0.0, ""};
  const std::vector<double> junctions = obj.junction_points();
  if (junctions.empty()) {
    res.detail = "no junctions";
    return res;
  }
  double worst = 0.0;
  for (double xj : junctions) {
    for (int order = 0; order < 2; ++order) {
      std::vector<double> wl(obj.dim(), 0.7), wr(obj.dim(), 0.7);
      wl[0] = std::nextafter(xj, -std::numeric_limits<double>::infinity());
      wr[0] = std::nextafter(xj, std::numeric_limits<double>::infinity());
      double l, r;
      if (order == 0) {
        l = obj.value_raw(wl);
        r = obj.value_raw(wr);
      } else {
        std::vector<double> gl(obj.dim()), gr(obj.dim());
        obj.gradient_raw(wl, gl);
        obj.gradient_raw(wr, gr);
        l = gl[0];
        r = gr[0];
      }
      worst = std::max(worst,
                       std::abs(l - r) / std::max({1.0, std::abs(l),
                                                   std::abs(r)}));
    }
  }
  res.worst = worst;
  res.pass = worst <= tol;
  return res;
}

Box descent_pair_box(const Objective& obj) {
  // Keep the product-network losses inside a moderate cube so the sampled
  // radii stay representable.
  if (obj.name() == "ffn_loss" || obj.name() == "rnn_loss") {
    return Box{std::vector<double>(obj.dim(), -2.0),
               std::vector<double>(obj.dim(), 2.0)};
  }
  return obj.sampling_box();
}

CheckResult check_descent_lemma(const Objective& obj, long long pairs,
                                double tol, std::uint64_t seed) {
  CheckResult res{"descent_lemma:" + obj.name(), true, 0.0, ""};
  if (pairs <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  const Box box = descent_pair_box(obj);
  double worst = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < pairs; ++i) {
    const ParamVector x = random_point(rng, box);
    const double gap = std::max(obj.value(x) - obj.certificate().f_star, 0.0);
    const double r = std::min(radius_r(obj.certificate(), gap), 1.0);
    const std::vector<double> dir = rng.next_unit_sphere(obj.dim());
    const double s = rng.next_unit();
    std::vector<double> y = x.coords();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += s * r * dir[k];
    worst = std::max(worst, check_descent(obj, x, ParamVector(y)));
  }
  res.worst = worst;
  res.pass = worst <= tol;
  return res;
}

CheckResult check_cocoercivity_sampling(const Objective& obj, long long pairs,
                                        double tol, std::uint64_t seed) {
  CheckResult res{"cocoercivity:" + obj.name(), true, 0.0, ""};
  if (pairs <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  const Box box = descent_pair_box(obj);
  double worst = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < pairs; ++i) {
    const ParamVector x = random_point(rng, box);
    const double gap = std::max(obj.value(x) - obj.certificate().f_star, 0.0);
    const double r = std::min(radius_r(obj.certificate(), gap), 2.0);
    const std::vector<double> dir = rng.next_unit_sphere(obj.dim());
    const double s = rng.next_unit();
    std::vector<double> y = x.coords();
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += s * 0.5 * r * dir[k];
    worst = std::max(worst, check_cocoercivity(obj, x, ParamVector(y)));
  }
  res.worst = worst;
  res.pass = worst <= tol;
  return res;
}

// Theorem-schedule GD runs: monotone gaps, warmup-rate monotonicity, step
// admissibility eta*||g|| <= r(gap), the gradient bound, and the
// accumulated-rate bound.
CheckResult check_gd_trajectories(const Objective& obj, long long big_t,
                                  int starts, std::uint64_t seed) {
  CheckResult res{"gd_trajectories:" + obj.name(), true, 0.0, ""};
  if (big_t <= 0 || starts <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  const SmoothnessCertificate& cert = obj.certificate();
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    const ParamVector w0 = random_point(rng, obj.sampling_box());
    for (ScheduleKind kind : {ScheduleKind::GDWarmup, ScheduleKind::GDConstant}) {
      ScheduleSpec spec;
      spec.kind = kind;
      const Trajectory traj = run_gd(obj, w0, spec, big_t, 0.0);
      if (traj.diverged) {
        res.pass = false;
        res.detail = "divergence at t=" + std::to_string(traj.diverged_at);
        continue;
      }
      const double gap0 = traj.points.front().gap;
      for (std::size_t t = 0; t + 1 < traj.points.size(); ++t) {
        const TrajectoryPoint& p = traj.points[t];
        const TrajectoryPoint& q = traj.points[t + 1];
        worst = std::max(worst, q.gap - p.gap - 1e-12);
        if (kind == ScheduleKind::GDWarmup) {
          worst = std::max(worst, p.eta - q.eta * (1.0 + 1e-12));
        }
        const double r = radius_r(cert, std::max(p.gap, 0.0));
        worst = std::max(worst, p.eta * p.grad_norm - r * (1.0 + 1e-12));
        worst = std::max(
            worst, p.grad_norm - grad_bound(cert, std::max(p.gap, 0.0)) -
                       1e-9);
      }
      if (traj.sum_eta > 0.0) {
        const double bound = 2.0 * gap0 / traj.sum_eta;
        worst = std::max(worst,
                         (traj.min_grad_sq - bound) / std::max(1.0, bound));
      }
    }
  }
  res.worst = worst;
  res.pass = res.pass && worst <= 1e-9;
  return res;
}

CheckResult check_estimator_bound(const Objective& obj, long long trials,
                                  std::uint64_t seed) {
  CheckResult res{"estimator_bound:" + obj.name(), true, 0.0, ""};
  if (trials <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  double worst = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < trials; ++i) {
    const ParamVector w = random_point(rng, obj.sampling_box());
    const std::vector<double> dir = rng.next_unit_sphere(obj.dim());
    const double len = 0.01 + 0.49 * rng.next_unit();
    std::vector<double> d(obj.dim());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = len * dir[k];
    const double est =
        estimate_local_smoothness(obj, w, ParamVector(d), 6);
    double sup = 0.0;
    std::vector<double> p(obj.dim());
    for (int j = 0; j <= 500; ++j) {
      const double t = static_cast<double>(j) / 500.0;
      for (std::size_t k = 0; k < d.size(); ++k) p[k] = w[k] + t * d[k];
      sup = std::max(sup, obj.hessian_norm_raw(p));
    }
    worst = std::max(worst, est - sup - 1e-9);
  }
  res.worst = worst;
  res.pass = worst <= 0.0;
  return res;
}

CheckResult check_convert_certificate(long long samples, std::uint64_t seed) {
  CheckResult res{"convert_certificate", true, 0.0, ""};
  if (samples <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  double worst = -std::numeric_limits<double>::infinity();
  // e^x is (1, 0, 1)-smooth in the gradient sense; the converted gap
  // certificate is (1, 0, 8).
  const SmoothnessCertificate conv_exp = convert_rho_l_smooth(1.0, 0.0, 1.0, 0.0);
  // (L/2) x^2 satisfies ||H|| = L <= L/2 + (L/2) ||g||^0.
  const double l = 5.0;
  const SmoothnessCertificate conv_quad =
      convert_rho_l_smooth(0.0, 0.5 * l, 0.5 * l, 0.0);
  for (long long i = 0; i < samples; ++i) {
    const double x = -5.0 + 10.0 * rng.next_unit();
    const double fexp = std::exp(x);
    worst = std::max(worst,
                     fexp - (conv_exp.k0 +
                             conv_exp.krho * std::pow(fexp, conv_exp.rho)));
    const double gap = 0.5 * l * x * x;
    worst = std::max(
        worst, l - (conv_quad.k0 +
                    conv_quad.krho * std::pow(gap, conv_quad.rho)));
  }
  res.worst = worst;
  res.pass = worst <= 1e-9;
  return res;
}

CheckResult check_fit_synthetic() {
  CheckResult res{"fit_recovery_synthetic", true, 0.0, ""};
  double worst = 0.0;
  for (double rho : {0.5, 1.0, 2.0, 3.0}) {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 24; ++i) {
      const double gap = 0.1 * std::pow(10.0, 3.0 * i / 23.0);
      pairs.emplace_back(gap, 0.7 + 1.3 * std::pow(gap, rho));
    }
    const FitResult fit = fit_certificate(pairs, 0.0);
    worst = std::max(worst, std::abs(fit.rho_hat - rho));
  }
  res.worst = worst;
  res.pass = worst <= 0.01 + 1e-12;
  return res;
}

CheckResult check_fit_pipeline(int estimator_n) {
  CheckResult res{"fit_recovery_pipeline", true, 0.0, ""};
  const ObjectiveHandle obj = make_objective("exponential");
  ScheduleSpec spec;
  spec.kind = ScheduleKind::GDWarmup;
  RunOptions opts;
  opts.record_points = true;
  opts.record_est_smoothness = true;
  opts.estimator_n = estimator_n;
  const Trajectory traj =
      run_gd(*obj, ParamVector{std::log(100.0)}, spec, 400, 0.0, opts);
  std::vector<std::pair<double, double>> pairs;
  for (const TrajectoryPoint& p : traj.points) {
    if (p.est_smoothness && p.gap > 1e-6) {
      pairs.emplace_back(p.gap, *p.est_smoothness);
    }
  }
  const FitResult fit = fit_certificate(pairs, 0.0);
  const bool ok = fit.rho_hat >= 0.95 && fit.rho_hat <= 1.05 &&
                  fit.k0_hat <= 0.1 && fit.krho_hat >= 0.8 &&
                  fit.krho_hat <= 1.2;
  res.worst = std::abs(fit.rho_hat - 1.0);
  res.pass = ok;
  res.detail = "rho_hat=" + format_double(fit.rho_hat) +
               " k0_hat=" + format_double(fit.k0_hat) +
               " krho_hat=" + format_double(fit.krho_hat);
  return res;
}

CheckResult check_schedule_stability(long long trials, std::uint64_t seed) {
  CheckResult res{"schedule_stability", true, 0.0, ""};
  if (trials <= 0) return vacuous(res.name);
  CounterRng rng(mix64(seed));
  double worst = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < trials; ++i) {
    SmoothnessCertificate cert;
    cert.rho = 3.0 * rng.next_unit();
    cert.k0 = rng.next_unit() < 0.2 ? 0.0 : 10.0 * rng.next_unit();
    cert.krho = rng.next_unit() < 0.2 && cert.k0 > 0.0
                    ? 0.0
                    : 10.0 * rng.next_unit();
    if (cert.k0 == 0.0 && cert.krho == 0.0) cert.krho = 1.0;
    const double gap = 100.0 * rng.next_unit();
    const double gap0 = gap + 100.0 * rng.next_unit();
    const double l = local_L(cert, gap);
    const double eta_w = gd_warmup_rate(cert, gap);
    if (l > 0.0) {
      worst = std::max(worst, eta_w - (1.0 / l) * (1.0 + 1e-12));
    }
    worst = std::max(worst, gd_constant_rate(cert, gap0) - eta_w * (1.0 + 1e-12));
    const double eta_b =
        sgd_bounded_adaptive_rate(cert, gap, 1.0, 100, 0.1, gap0);
    const double eta_abc =
        sgd_abc_adaptive_rate(cert, gap, 0.0, 0.0, 1.0, 100, 0.1, gap0);
    worst = std::max(worst, eta_abc - eta_b * (1.0 + 1e-12));
  }
  res.worst = worst;
  res.pass = worst <= 0.0;
  return res;
}

CheckResult check_hp_boundedness(const std::string& name, ScheduleKind kind,
                                 NoiseSpec::Kind noise_kind, double bound_mult,
                                 long long n_seeds, long long big_t) {
  CheckResult res{name, true, 0.0, ""};
  if (n_seeds <= 0) return vacuous(res.name);
  const ObjectiveHandle obj = make_objective("trig_linear");
  const ParamVector w0{5.0};
  const double gap0 = obj->value(w0) - obj->certificate().f_star;
  ScheduleSpec spec;
  spec.kind = kind;
  spec.sigma = 1.0;
  spec.noise_a = noise_kind == NoiseSpec::Kind::ABC ? 1.0 : 0.0;
  spec.noise_b = noise_kind == NoiseSpec::Kind::ABC ? 1.0 : 0.0;
  spec.horizon = big_t;
  spec.delta = 0.05;

  std::vector<int> inside(static_cast<std::size_t>(n_seeds), 0);
  parallel_for(static_cast<std::size_t>(n_seeds), [&](std::size_t k) {
    NoiseSpec noise;
    noise.kind = noise_kind;
    noise.sigma = 1.0;
    noise.a = spec.noise_a;
    noise.b = spec.noise_b;
    noise.seed = 1000 + k;
    RunOptions opts;
    opts.record_points = false;
    const Trajectory traj = run_sgd(*obj, w0, spec, noise, big_t, 0.0, opts);
    inside[k] = !traj.diverged && traj.max_gap <= bound_mult * gap0 ? 1 : 0;
  });
  long long ok = 0;
  for (int v : inside) ok += v;
  const double fraction =
      static_cast<double>(ok) / static_cast<double>(n_seeds);
  res.worst = 0.95 - fraction;
  res.pass = fraction >= 0.95;
  res.detail = "fraction=" + format_double(fraction);
  return res;
}

CheckResult check_ffn_frobenius(long long samples, std::uint64_t seed) {
  CheckResult res{"ffn_frobenius_bound", true, 0.0, ""};
  if (samples <= 0) return vacuous(res.name);
  const ObjectiveHandle obj = make_objective("ffn_loss");
  CounterRng rng(mix64(seed));
  double worst = -std::numeric_limits<double>::infinity();
  for (long long i = 0; i < samples; ++i) {
    const ParamVector w = random_point(rng, obj->sampling_box());
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += w[k] * w[k];
    // Spectral norm is below the Frobenius norm, which the closed-form
    // polynomial dominates.
    const double bound2 =
        3.0 * std::pow(s, 6.0) + 6.0 * s * s + 12.0;
    const double h = obj->hessian_norm(w);
    worst = std::max(worst, h * h - bound2);
  }
  res.worst = worst;
  res.pass = worst <= 1e-6;
  return res;
}

std::pair<CheckResult, CheckResult> check_adversary_instances(
    std::uint64_t seed) {
  CheckResult structural{"adversary_instances", true, 0.0, ""};
  CheckResult certificate{"adversary_certificate", true, 0.0, ""};
  CounterRng rng(mix64(seed));
  double worst_structural = 0.0;
  double worst_cert = -std::numeric_limits<double>::infinity();
  for (int case_id = 1; case_id <= 3; ++case_id) {
    for (int draw = 0; draw < 20; ++draw) {
      const double k1 = 0.5 + 3.5 * rng.next_unit();
      const double delta = 1.0 + 19.0 * rng.next_unit();
      const double threshold = 2.0 / (k1 * delta);
      std::vector<double> etas;
      double eps;
      if (case_id == 1) {
        double eta = threshold * (0.2 + 0.8 * rng.next_unit());
        for (int t = 0; t < 50; ++t) {
          etas.push_back(eta);
          eta *= 0.9 + 0.1 * rng.next_unit();
        }
        eps = 2.0 * std::sqrt(k1) * delta / 5.0 * (0.1 + 0.9 * rng.next_unit());
      } else if (case_id == 2) {
        double eta = threshold * (1.5 + 3.0 * rng.next_unit());
        for (int t = 0; t < 50; ++t) {
          etas.push_back(eta);
          eta = std::max(threshold * 1.01, eta * (0.9 + 0.1 * rng.next_unit()));
        }
        eps = 0.5 * std::sqrt(k1) * delta * rng.next_unit();
        if (eps <= 0.0) eps = 1e-3;
      } else {
        const double eta_tau = (6.5 + 4.0 * rng.next_unit()) / (k1 * delta);
        const int above = 1 + static_cast<int>(4 * rng.next_unit());
        for (int t = 0; t < above; ++t) {
          etas.push_back(eta_tau * (1.0 + 0.3 * (above - 1 - t)));
        }
        double eta = threshold * (0.2 + 0.7 * rng.next_unit());
        for (int t = 0; t < 30; ++t) etas.push_back(eta);
        const double cap =
            std::min(2.0 * std::sqrt(k1) * delta / 5.0,
                     1.0 / (2.0 * eta_tau * std::sqrt(k1)));
        eps = cap * (0.1 + 0.8 * rng.next_unit());
      }
      const AdversaryInstance inst = build_instance(etas, k1, delta, eps);
      const InstanceReport rep = verify_instance(inst, 20000);
      worst_structural = std::max({worst_structural,
                                   rep.max_junction_value_mismatch,
                                   rep.max_junction_d1_mismatch,
                                   rep.max_junction_d2_mismatch});
      if (!rep.link_ok || !rep.gap_ok) {
        structural.pass = false;
        structural.detail = "link or initial-gap bound failed (case " +
                            std::to_string(case_id) + ")";
      }
      worst_cert = std::max(worst_cert, rep.certificate_violation);
    }
  }
  structural.worst = worst_structural;
  structural.pass = structural.pass && worst_structural <= 1e-8;
  certificate.worst = worst_cert;
  certificate.pass = worst_cert <= 1e-9;
  if (!certificate.pass) {
    certificate.detail =
        "the well's curvature at its minimum is 3 eps sqrt(K1) > K0; see "
        "certificate_violation_k0_3x";
  }
  return {structural, certificate};
}

}  // namespace

std::vector<CheckResult> verify_suite(const ExperimentConfig& config) {
  std::vector<CheckResult> results;
  const std::vector<ObjectiveHandle> suite = default_suite();

  const double cert_tol = tol_or(config, "certificate", 1e-9);
  const double fd_tol = tol_or(config, "gradient_fd", 1e-6);
  const double junction_tol = tol_or(config, "junction", 1e-10);
  const double descent_tol = tol_or(config, "descent", 1e-9);
  const double coco_tol = tol_or(config, "cocoercivity", 1e-9);

  for (const ObjectiveHandle& obj : suite) {
    SmoothnessCertificate cert = obj->certificate();
    if (obj->name() == config.corrupt_objective) {
      cert.krho *= config.corrupt_krho_factor;
    }
    results.push_back(
        check_certificate(*obj, cert, config.verify_samples, cert_tol, 11));
    results.push_back(
        check_gradient_fd(*obj, config.verify_fd_points, fd_tol, 22));
    results.push_back(check_lower_bounded(*obj, config.verify_samples, 33));
    results.push_back(check_junctions(*obj, junction_tol));
    results.push_back(
        check_descent_lemma(*obj, config.verify_pairs, descent_tol, 44));
    if (obj->convex()) {
      results.push_back(check_cocoercivity_sampling(
          *obj, config.verify_pairs, coco_tol, 55));
    }
    results.push_back(check_gd_trajectories(
        *obj, std::min<long long>(config.big_t, 2000), 3, 66));
    results.push_back(check_estimator_bound(*obj, 50, 77));
  }
  results.push_back(check_convert_certificate(config.verify_samples, 88));
  results.push_back(check_fit_synthetic());
  results.push_back(check_fit_pipeline(config.fit_estimator_n));
  results.push_back(check_schedule_stability(10000, 99));
  results.push_back(check_hp_boundedness("sgd_bounded_hp",
                                         ScheduleKind::SGDBoundedAdaptive,
                                         NoiseSpec::Kind::BoundedSphere, 4.0,
                                         config.verify_hp_seeds, 1000));
  results.push_back(check_hp_boundedness("sgd_abc_hp", ScheduleKind::ABCConstant,
                                         NoiseSpec::Kind::ABC, 8.0,
                                         config.verify_hp_seeds, 1000));
  results.push_back(check_ffn_frobenius(config.verify_samples, 101));
  const auto [structural, certificate] = check_adversary_instances(123);
  results.push_back(structural);
  results.push_back(certificate);
  return results;
}

std::string checks_csv(const std::vector<CheckResult>& checks) {
  std::string out = "check,pass,worst_violation,detail\n";
  for (const CheckResult& c : checks) {
    out += c.name;
    out += ',';
    out += c.pass ? "1" : "0";
    out += ',';
    out += format_double(c.worst);
    out += ',';
    out += c.detail;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

Trajectory thin_points(const Trajectory& traj, long long every) {
  if (every <= 1 || traj.points.empty()) return traj;
  Trajectory out = traj;
  out.points.clear();
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    if (traj.points[i].t % every == 0 || i + 1 == traj.points.size()) {
      out.points.push_back(traj.points[i]);
    }
  }
  return out;
}

int run_compare(const ExperimentConfig& config) {
  if (config.schedules.size() < 2) {
    throw std::invalid_argument("compare: need at least 2 schedules");
  }
  const ObjectiveHandle obj =
      make_objective(config.objective_name, config.objective_params);
  const ParamVector w0 = config.w0 ? *config.w0 : obj->default_start();
  bool stochastic = config.noise.kind != NoiseSpec::Kind::None;
  for (const ScheduleConfig& s : config.schedules) {
    stochastic = stochastic || schedule_is_stochastic(s.spec.kind);
  }
  if (stochastic && config.seeds.empty()) {
    throw std::invalid_argument(
        "compare: stochastic experiments need a nonempty seed list");
  }
  std::vector<Trajectory> trajectories;
  const ComparisonReport report =
      compare_schedules(*obj, config.schedules, w0, config.big_t,
                        config.eps_stop, config.noise, config.seeds,
                        &trajectories);
  std::filesystem::create_directories(config.out_dir);
  const std::vector<std::uint64_t> seeds =
      config.seeds.empty() ? std::vector<std::uint64_t>{0} : config.seeds;
  for (std::size_t s = 0; s < config.schedules.size(); ++s) {
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const std::string path = config.out_dir + "/traj_" +
                               config.schedules[s].label + "_" +
                               std::to_string(seeds[k]) + ".csv";
      write_trajectory_csv(
          thin_points(trajectories[s * seeds.size() + k],
                      config.record_every),
          path);
    }
  }
  write_file(config.out_dir + "/report.csv", comparison_report_csv(report));
  return 0;
}

int run_verify(const ExperimentConfig& config) {
  const std::vector<CheckResult> checks = verify_suite(config);
  std::filesystem::create_directories(config.out_dir);
  write_file(config.out_dir + "/violations.csv", checks_csv(checks));
  for (const CheckResult& c : checks) {
    if (!c.pass) return 1;
  }
  return 0;
}

int run_adversary(const ExperimentConfig& config) {
  if (config.adv_etas.empty()) {
    throw std::invalid_argument("adversary: no learning-rate sequence");
  }
  const AdversaryInstance inst = build_instance(
      config.adv_etas, config.adv_k1, config.adv_delta, config.adv_eps);
  const InstanceReport rep = verify_instance(inst);
  const CountResult count =
      count_iterations_to_stationarity(inst, config.adv_etas,
                                       config.adv_t_max);
  std::filesystem::create_directories(config.out_dir);
  write_file(config.out_dir + "/instance.txt", instance_dump(inst));

  std::string traj = "t,w,f,grad_abs\n";
  for (std::size_t t = 0; t < count.iterates.size(); ++t) {
    traj += std::to_string(t) + "," + format_double(count.iterates[t]) + "," +
            format_double(count.values[t]) + "," +
            format_double(count.grad_abs[t]) + "\n";
  }
  write_file(config.out_dir + "/adversary_trajectory.csv", traj);

  std::string report = "field,value\n";
  report += "case_id," + std::to_string(inst.case_id) + "\n";
  report += "tau," + std::to_string(inst.tau) + "\n";
  report += "count," +
            (count.count ? std::to_string(*count.count)
                         : std::string("censored")) +
            "\n";
  report += "junction_value_mismatch," +
            format_double(rep.max_junction_value_mismatch) + "\n";
  report += "junction_d1_mismatch," +
            format_double(rep.max_junction_d1_mismatch) + "\n";
  report += "junction_d2_mismatch," +
            format_double(rep.max_junction_d2_mismatch) + "\n";
  report +=
      "certificate_violation," + format_double(rep.certificate_violation) +
      "\n";
  report += "certificate_violation_k0_3x," +
            format_double(rep.certificate_violation_k0_3x) + "\n";
  report += "g_min_margin," + format_double(rep.g_min_margin) + "\n";
  report += "g_d2_margin," + format_double(rep.g_d2_margin) + "\n";
  report += "w0_gap," + format_double(rep.w0_gap) + "\n";
  write_file(config.out_dir + "/adversary_report.csv", report);

  const bool ok =
      rep.junctions_ok && rep.certificate_ok && rep.link_ok && rep.gap_ok;
  return ok ? 0 : 1;
}

int run_fit(const ExperimentConfig& config) {
  const std::string name =
      config.objective_name.empty() ? "exponential" : config.objective_name;
  const ObjectiveHandle obj = make_objective(name, config.objective_params);
  ScheduleSpec spec;
  spec.kind = ScheduleKind::GDWarmup;
  if (!config.schedules.empty()) spec = config.schedules.front().spec;
  const ParamVector w0 = config.w0 ? *config.w0 : obj->default_start();
  RunOptions opts;
  opts.record_points = true;
  opts.record_est_smoothness = true;
  opts.estimator_n = config.fit_estimator_n;
  const Trajectory traj =
      run_gd(*obj, w0, spec, config.big_t, config.eps_stop, opts);
  std::vector<std::pair<double, double>> pairs;
  for (const TrajectoryPoint& p : traj.points) {
    if (p.est_smoothness && p.gap > 0.0) {
      pairs.emplace_back(p.gap, *p.est_smoothness);
    }
  }
  const FitResult fit =
      fit_certificate(pairs, obj->certificate().f_star);
  std::filesystem::create_directories(config.out_dir);
  write_trajectory_csv(thin_points(traj, config.record_every),
                       config.out_dir + "/trajectory.csv");
  std::string out = "rho_hat,k0_hat,krho_hat,residual\n";
  out += format_double(fit.rho_hat) + "," + format_double(fit.k0_hat) + "," +
         format_double(fit.krho_hat) + "," + format_double(fit.residual) +
         "\n";
  write_file(config.out_dir + "/fit.csv", out);
  return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  if (config.kind == "compare") return run_compare(config);
  if (config.kind == "verify") return run_verify(config);
  if (config.kind == "adversary") return run_adversary(config);
  if (config.kind == "fit") return run_fit(config);
  throw std::invalid_argument("run_experiment: unknown kind '" + config.kind +
                              "'");
}

}  // namespace warmlab
