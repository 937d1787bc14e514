#include <doctest.h>

#include <cmath>

#include "warmlab/objectives.hpp"
#include "warmlab/rng.hpp"

using namespace warmlab;

namespace {

ParamVector sample_box(CounterRng& rng, const Box& box) {
  std::vector<double> w(box.lo.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = box.lo[i] + rng.next_unit() * (box.hi[i] - box.lo[i]);
  }
  return ParamVector(std::move(w));
}

// Central differences with coordinate-scaled step.
std::vector<double> fd_gradient(const Objective& obj, const ParamVector& w) {
  std::vector<double> g(w.dim());
  std::vector<double> a = w.coords(), b = w.coords();
  for (std::size_t k = 0; k < w.dim(); ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(w[k]));
    a[k] = w[k] + h;
    b[k] = w[k] - h;
    g[k] = (obj.value_raw(a) - obj.value_raw(b)) / (2.0 * h);
    a[k] = w[k];
    b[k] = w[k];
  }
  return g;
}

}  // namespace

TEST_CASE("factory returns documented certificates") {
  const ObjectiveHandle quad = make_objective("quadratic", {{"L", 5.0}, {"dim", 1.0}});
  CHECK(quad->certificate().rho == 0.0);
  CHECK(quad->certificate().k0 == 5.0);
  CHECK(quad->certificate().krho == 0.0);
  CHECK(quad->convex());

  const ObjectiveHandle rv =
      make_objective("river_valley", {{"K1", 10.0}, {"Delta0", 1000.0}});
  CHECK(rv->dim() == 2);
  CHECK(rv->certificate().rho == 1.0);
  CHECK(rv->certificate().k0 == 10.0);
  CHECK(rv->certificate().krho == 10.0);
  CHECK(rv->certificate().f_star == 0.0);

  const ObjectiveHandle exp_obj = make_objective("exponential");
  CHECK(exp_obj->certificate().rho == 1.0);
  CHECK(exp_obj->certificate().k0 == 0.0);
  CHECK(exp_obj->certificate().krho == 1.0);
  CHECK(exp_obj->certificate().f_star == 0.0);

  const ObjectiveHandle tc = make_objective("two_cosh");
  CHECK(tc->certificate().k0 == 2.0);
  CHECK(tc->certificate().krho == 1.0);
  CHECK(tc->certificate().f_star == 2.0);
  CHECK(tc->convex());

  const ObjectiveHandle tl = make_objective("trig_linear");
  CHECK(tl->certificate().f_star == -2.0);
  CHECK(!tl->convex());
}

TEST_CASE("factory rejects bad input") {
  CHECK_THROWS_AS(make_objective("no_such_function"), std::invalid_argument);
  CHECK_THROWS_AS(make_objective("river_valley", {{"K1", -1.0}, {"Delta0", 10.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_objective("river_valley", {{"K1", 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_objective("quadratic", {{"L", 5.0}, {"bogus", 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_objective("exponential", {{"L", 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("closed-form values") {
  const ObjectiveHandle tl = make_objective("trig_linear");
  CHECK(tl->value(ParamVector{0.0}) == 0.0);
  CHECK(tl->value(ParamVector{std::numbers::pi}) ==
        doctest::Approx(6.2831853071795862).epsilon(1e-12));

  const ObjectiveHandle ffn = make_objective("ffn_loss");
  CHECK(ffn->value(ParamVector{0.0, 0.0, 0.0, 0.0}) ==
        doctest::Approx(0.69314718055994529).epsilon(1e-14));

  const ObjectiveHandle rnn = make_objective("rnn_loss");
  CHECK(rnn->value(ParamVector{1.0, 1.0}) ==
        doctest::Approx(1.503204434039084).epsilon(1e-12));

  const ObjectiveHandle rv =
      make_objective("river_valley", {{"K1", 10.0}, {"Delta0", 1000.0}});
  const double x0 = std::log(1000.0) / std::sqrt(10.0);
  CHECK(rv->value(ParamVector{x0, 0.0}) ==
        doctest::Approx(367.37944117144235).epsilon(1e-12));

  CHECK_THROWS_AS(tl->value(ParamVector{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("closed-form gradients") {
  const ObjectiveHandle ffn = make_objective("ffn_loss");
  const ParamVector g0 = ffn->gradient(ParamVector{0.0, 0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < 4; ++i) CHECK(g0[i] == 0.0);

  const ObjectiveHandle tl = make_objective("trig_linear");
  CHECK(tl->gradient(ParamVector{0.0})[0] == doctest::Approx(2.0));

  const ObjectiveHandle rv =
      make_objective("river_valley", {{"K1", 10.0}, {"Delta0", 1000.0}});
  const double x0 = std::log(1000.0) / std::sqrt(10.0);
  const ParamVector g = rv->gradient(ParamVector{x0, 0.0});
  CHECK(g[0] == doctest::Approx(1163.3369384516798).epsilon(1e-12));
  CHECK(g[1] == 0.0);
}

TEST_CASE("hessian spectral norms") {
  const ObjectiveHandle quad = make_objective("quadratic", {{"L", 5.0}});
  CHECK(quad->hessian_norm(ParamVector{2.3}) == 5.0);

  const ObjectiveHandle e = make_objective("exponential");
  CHECK(e->hessian_norm(ParamVector{1.0}) ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-14));

  const ObjectiveHandle tl = make_objective("trig_linear");
  CHECK(tl->hessian_norm(ParamVector{std::numbers::pi}) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gradients match central finite differences") {
  CounterRng rng(2024);
  for (const ObjectiveHandle& obj : default_suite()) {
    for (int i = 0; i < 30; ++i) {
      const ParamVector w = sample_box(rng, obj->sampling_box());
      const ParamVector g = obj->gradient(w);
      const std::vector<double> fd = fd_gradient(*obj, w);
      std::vector<double> diff(w.dim());
      for (std::size_t k = 0; k < w.dim(); ++k) diff[k] = fd[k] - g[k];
      CHECK(norm(diff) <= 1e-6 * (1.0 + norm(g.coords())));
    }
  }
}

TEST_CASE("certificate inequality and lower bound hold on the sampling box") {
  CounterRng rng(77);
  for (const ObjectiveHandle& obj : default_suite()) {
    const SmoothnessCertificate& cert = obj->certificate();
    for (int i = 0; i < 2000; ++i) {
      const ParamVector w = sample_box(rng, obj->sampling_box());
      const double f = obj->value(w);
      const double gap = f - cert.f_star;
      CHECK(gap >= -1e-12);
      const double bound =
          cert.k0 + cert.krho * std::pow(std::max(gap, 0.0), cert.rho);
      CHECK(obj->hessian_norm(w) <= bound + 1e-9);
    }
  }
}

TEST_CASE("piecewise objectives are C1 at their junctions") {
  for (const char* name : {"trig_linear", "river_valley"}) {
    const ObjectiveHandle obj =
        std::string(name) == "river_valley"
            ? make_objective(name, {{"K1", 10.0}, {"Delta0", 1000.0}})
            : make_objective(name);
    for (double xj : obj->junction_points()) {
      std::vector<double> wl(obj->dim(), 0.7), wr(obj->dim(), 0.7);
      wl[0] = std::nextafter(xj, -1e30);
      wr[0] = std::nextafter(xj, 1e30);
      CHECK(std::abs(obj->value_raw(wl) - obj->value_raw(wr)) <= 1e-10);
      std::vector<double> gl(obj->dim()), gr(obj->dim());
      obj->gradient_raw(wl, gl);
      obj->gradient_raw(wr, gr);
      CHECK(std::abs(gl[0] - gr[0]) <= 1e-10);
    }
  }
}

TEST_CASE("ffn hessian obeys the closed-form Frobenius bound") {
  const ObjectiveHandle ffn = make_objective("ffn_loss");
  CounterRng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const ParamVector w = sample_box(rng, ffn->sampling_box());
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += w[k] * w[k];
    const double h = ffn->hessian_norm(w);
    CHECK(h * h <= 3.0 * std::pow(s, 6.0) + 6.0 * s * s + 12.0 + 1e-6);
  }
}
