#include <doctest.h>

#include <cmath>
#include <limits>

#include "warmlab/rng.hpp"
#include "warmlab/smoothness.hpp"

using namespace warmlab;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("lemma constants") {
  const LemmaConstants c1 = lemma_constants({1.0, 1.0, 1.0, 0.0});
  CHECK(c1.c1 == doctest::Approx(0.16910197872576277).epsilon(1e-14));
  CHECK(c1.c2 == doctest::Approx(0.16910197872576277).epsilon(1e-14));

  const LemmaConstants c2 = lemma_constants({1.0, 7.0, 0.0, 0.0});
  CHECK(std::isinf(c2.c1));
  CHECK(std::isinf(c2.c2));

  const LemmaConstants c3 = lemma_constants({3.0, 1.0, 1.0, 0.0});
  CHECK(c3.c1 == doctest::Approx(0.056367326241920923).epsilon(1e-14));
  CHECK(c3.c2 == doctest::Approx(0.16910197872576277).epsilon(1e-14));

  // K0 = 0 corners
  CHECK(std::isinf(lemma_constants({2.0, 0.0, 1.0, 0.0}).c2));
  CHECK(lemma_constants({0.5, 0.0, 1.0, 0.0}).c2 == 0.0);
  CHECK(lemma_constants({1.0, 0.0, 4.0, 0.0}).c2 ==
        doctest::Approx(0.5 / (2.0 * std::sqrt(3.0) + std::sqrt(6.0))));
}

TEST_CASE("radius of the descent neighborhood") {
  CHECK(radius_r({1.0, 1.0, 1.0, 0.0}, 4.0) ==
        doctest::Approx(0.16910197872576277).epsilon(1e-14));
  CHECK(radius_r({3.0, 1.0, 1.0, 0.0}, 1.0) ==
        doctest::Approx(0.056367326241920923).epsilon(1e-14));
  CHECK(std::isinf(radius_r({1.0, 1.0, 0.0, 0.0}, 10.0)));
  CHECK_THROWS_AS(radius_r({1.0, 1.0, 1.0, 0.0}, -1.0), std::invalid_argument);

  // nonincreasing in gap for rho >= 1, constant for rho = 1
  const SmoothnessCertificate c{2.0, 1.0, 1.0, 0.0};
  double prev = kInf;
  for (double gap : {0.1, 1.0, 10.0, 100.0}) {
    const double r = radius_r(c, gap);
    CHECK(r <= prev * (1.0 + 1e-12));
    prev = r;
  }
  CHECK(radius_r({1.0, 1.0, 1.0, 0.0}, 0.5) ==
        radius_r({1.0, 1.0, 1.0, 0.0}, 50.0));
}

TEST_CASE("local smoothness bound") {
  CHECK(local_L({1.0, 3.0, 0.0, 0.0}, 123.0) == 6.0);
  CHECK(local_L({1.0, 1.0, 1.0, 0.0}, 2.0) == 6.0);
  CHECK(local_L({2.0, 0.0, 1.0, 0.0}, 1.0) == 4.0);
  CHECK(local_L({1.7, 2.5, 3.5, 0.0}, 0.0) == 5.0);
}

TEST_CASE("gradient bound") {
  CHECK(grad_bound({2.3, 4.0, 5.0, 0.0}, 0.0) == 0.0);
  CHECK(grad_bound({1.0, 1.0, 1.0, 0.0}, 1.0) == doctest::Approx(4.0));
  CHECK(grad_bound({2.0, 0.0, 1.0, 0.0}, 1.0) == doctest::Approx(6.0));
}

TEST_CASE("gradient-norm certificate conversion") {
  const SmoothnessCertificate a = convert_rho_l_smooth(1.0, 1.0, 1.0, 0.0);
  CHECK(a.rho == doctest::Approx(1.0));
  CHECK(a.k0 == doctest::Approx(2.0));
  CHECK(a.krho == doctest::Approx(8.0));

  const SmoothnessCertificate b = convert_rho_l_smooth(0.0, 1.0, 1.0, 0.0);
  CHECK(b.rho == 0.0);
  CHECK(b.k0 == doctest::Approx(2.0));
  CHECK(b.krho == doctest::Approx(1.0));

  CHECK_THROWS_AS(convert_rho_l_smooth(2.0, 1.0, 1.0, 0.0),
                  std::invalid_argument);

  // e^x with (1, 0, 1) gradient-norm smoothness: converted certificate
  // holds at sampled points.
  const SmoothnessCertificate conv = convert_rho_l_smooth(1.0, 0.0, 1.0, 0.0);
  for (int i = 0; i <= 1000; ++i) {
    const double x = -5.0 + 10.0 * i / 1000.0;
    const double f = std::exp(x);
    CHECK(f <= conv.k0 + conv.krho * std::pow(f, conv.rho) + 1e-12);
  }
}

TEST_CASE("local smoothness estimator") {
  const ObjectiveHandle quad = make_objective("quadratic", {{"L", 5.0}});
  CHECK(estimate_local_smoothness(*quad, ParamVector{1.7}, ParamVector{0.3},
                                  6) == doctest::Approx(5.0).epsilon(1e-12));

  const ObjectiveHandle e = make_objective("exponential");
  CHECK(estimate_local_smoothness(*e, ParamVector{0.0}, ParamVector{0.1}, 6) ==
        doctest::Approx(1.0517091807564771).epsilon(1e-12));

  // n = 1 is the single secant
  const double single =
      estimate_local_smoothness(*e, ParamVector{0.0}, ParamVector{0.1}, 1);
  CHECK(single == doctest::Approx((std::exp(0.1) - 1.0) / 0.1).epsilon(1e-12));

  CHECK_THROWS_AS(
      estimate_local_smoothness(*e, ParamVector{0.0}, ParamVector{0.0}, 6),
      std::invalid_argument);
}

TEST_CASE("certificate fit recovers synthetic models") {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 16; ++i) {
    const double gap = 0.1 * std::pow(10.0, 3.0 * i / 15.0);
    pairs.emplace_back(gap, gap);  // smoothness = gap exactly
  }
  const FitResult fit = fit_certificate(pairs, 0.0);
  CHECK(fit.rho_hat >= 0.99);
  CHECK(fit.rho_hat <= 1.01);
  CHECK(fit.k0_hat <= 0.05);
  CHECK(fit.krho_hat >= 0.95);
  CHECK(fit.krho_hat <= 1.05);

  // recovery within one grid step across exponents
  for (double rho : {0.5, 1.0, 2.0, 3.0}) {
    std::vector<std::pair<double, double>> p2;
    for (int i = 0; i < 24; ++i) {
      const double gap = 0.2 * std::pow(10.0, 2.5 * i / 23.0);
      p2.emplace_back(gap, 0.3 + 2.0 * std::pow(gap, rho));
    }
    const FitResult f2 = fit_certificate(p2, 0.0);
    CHECK(std::abs(f2.rho_hat - rho) <= 0.01 + 1e-12);
  }
}

TEST_CASE("certificate fit degenerate and error cases") {
  std::vector<std::pair<double, double>> flat;
  for (int i = 0; i < 12; ++i) {
    flat.emplace_back(0.1 * std::pow(10.0, 2.0 * i / 11.0), 3.25);
  }
  const FitResult fit = fit_certificate(flat, 0.0);
  CHECK(fit.k0_hat == doctest::Approx(3.25).epsilon(1e-9));
  CHECK(fit.krho_hat == doctest::Approx(0.0));

  std::vector<std::pair<double, double>> few = {{1.0, 1.0}, {2.0, 2.0}};
  CHECK_THROWS_AS(fit_certificate(few, 0.0), std::invalid_argument);

  std::vector<std::pair<double, double>> narrow;
  for (int i = 0; i < 10; ++i) narrow.emplace_back(1.0 + 0.1 * i, 1.0);
  CHECK_THROWS_AS(fit_certificate(narrow, 0.0), std::invalid_argument);

  std::vector<std::pair<double, double>> bad;
  for (int i = 0; i < 10; ++i) bad.emplace_back(std::pow(10.0, i - 5), -1.0);
  CHECK_THROWS_AS(fit_certificate(bad, 0.0), std::invalid_argument);
}

TEST_CASE("descent residual") {
  const ObjectiveHandle quad = make_objective("quadratic", {{"L", 5.0}});
  CHECK(check_descent(*quad, ParamVector{1.0}, ParamVector{1.0}) == 0.0);
  // exact quadratic expansion: residual = (L - L(gap))/2 * d^2 = -0.025
  CHECK(check_descent(*quad, ParamVector{1.0}, ParamVector{1.1}) ==
        doctest::Approx(-0.025).epsilon(1e-9));

  const ObjectiveHandle tc = make_objective("two_cosh");
  // ||y - x|| beyond r(gap) is a reported error
  CHECK_THROWS_AS(check_descent(*tc, ParamVector{0.5}, ParamVector{1.5}),
                  std::domain_error);

  CounterRng rng(31);
  const ObjectiveHandle ffn = make_objective("ffn_loss");
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(4), dir(4);
    for (auto& v : x) v = -2.0 + 4.0 * rng.next_unit();
    const ParamVector px(x);
    const double gap = ffn->value(px) - ffn->certificate().f_star;
    const double r = std::min(radius_r(ffn->certificate(), gap), 1.0);
    dir = rng.next_unit_sphere(4);
    const double s = rng.next_unit();
    std::vector<double> y = x;
    for (int k = 0; k < 4; ++k) y[k] += s * r * dir[k];
    CHECK(check_descent(*ffn, px, ParamVector(y)) <= 1e-9);
  }
}

TEST_CASE("cocoercivity residual") {
  const ObjectiveHandle tc = make_objective("two_cosh");
  CHECK(check_cocoercivity(*tc, ParamVector{0.5}, ParamVector{0.5}) == 0.0);
  CHECK(check_cocoercivity(*tc, ParamVector{0.5}, ParamVector{0.4}) <= 1e-9);

  const ObjectiveHandle tl = make_objective("trig_linear");
  CHECK_THROWS_AS(check_cocoercivity(*tl, ParamVector{0.5}, ParamVector{0.4}),
                  std::invalid_argument);

  const ObjectiveHandle quad = make_objective("quadratic", {{"L", 5.0}});
  CounterRng rng(13);
  for (int i = 0; i < 200; ++i) {
    const double x = -5.0 + 10.0 * rng.next_unit();
    const double y = x + (rng.next_unit() - 0.5);
    CHECK(check_cocoercivity(*quad, ParamVector{x}, ParamVector{y}) <= 1e-9);
  }
}
