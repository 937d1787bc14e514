#include <doctest.h>

#include <cmath>

#include "warmlab/rng.hpp"
#include "warmlab/schedules.hpp"
#include "warmlab/smoothness.hpp"

using namespace warmlab;

namespace {
const SmoothnessCertificate k111{1.0, 1.0, 1.0, 0.0};
}

TEST_CASE("gd warmup rate") {
  CHECK(gd_warmup_rate(k111, 0.0) ==
        doctest::Approx(0.10355339059327377).epsilon(1e-14));
  CHECK(gd_warmup_rate(k111, 10.0) ==
        doctest::Approx(0.0034517796864424592).epsilon(1e-14));
  CHECK(gd_warmup_rate({1.0, 2.0, 0.0, 0.0}, 3.0) ==
        doctest::Approx(0.051776695296636886).epsilon(1e-14));
  CHECK_THROWS_AS(gd_warmup_rate({1.0, 0.0, 0.0, 0.0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("gd constant rate and dominance") {
  CHECK(gd_constant_rate(k111, 10.0) ==
        doctest::Approx(0.0034517796864424592).epsilon(1e-14));
  CHECK(gd_constant_rate(k111, 0.0) ==
        doctest::Approx(0.10355339059327377).epsilon(1e-14));
  CounterRng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double gap0 = 100.0 * rng.next_unit();
    const double gap_t = gap0 * rng.next_unit();
    CHECK(gd_warmup_rate(k111, gap_t) >=
          gd_constant_rate(k111, gap0) * (1.0 - 1e-12));
  }
}

TEST_CASE("convex gd rate") {
  CHECK(gd_convex_rate(k111, 0.0) ==
        doctest::Approx(0.051776695296636886).epsilon(1e-14));
  CHECK(gd_convex_rate(k111, 7.3) ==
        doctest::Approx(0.5 * gd_warmup_rate(k111, 7.3)).epsilon(1e-14));
  CHECK(gd_convex_rate({2.0, 1.0, 1.0, 0.0}, 1.0) ==
        doctest::Approx(0.0057529661440707648).epsilon(1e-14));
}

TEST_CASE("bounded-noise adaptive rate") {
  // clause-by-clause oracle at rho=1, K0=Krho=1, gap=gap0=1, sigma=1,
  // T=100, delta=0.1:
  //   {0.051776695, 0.017258898, 0.084550989, 0.05, 0.016475256}
  CHECK(sgd_bounded_adaptive_rate(k111, 1.0, 1.0, 100, 0.1, 1.0) ==
        doctest::Approx(0.01647525572455652).epsilon(1e-13));

  // zero gap: the Krho and G clauses drop out
  const double r = radius_r(k111, 0.0);
  const double expect =
      std::min({1.0 / (8.0 * (std::sqrt(2.0) + 1.0)), r / 2.0,
                std::sqrt(1.0 / (100.0 * 2.0))});
  CHECK(sgd_bounded_adaptive_rate(k111, 0.0, 1.0, 100, 0.1, 1.0) ==
        doctest::Approx(expect).epsilon(1e-13));

  // large sigma is noise-dominated and the rate collapses toward zero
  CHECK(sgd_bounded_adaptive_rate(k111, 1.0, 1e6, 100, 0.1, 1.0) < 1e-6);

  CHECK_THROWS_AS(sgd_bounded_adaptive_rate(k111, 1.0, 0.0, 100, 0.1, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sgd_bounded_adaptive_rate(k111, 1.0, 1.0, 100, 1.5, 1.0),
                  std::invalid_argument);
}

TEST_CASE("bounded-noise constant rate") {
  // independent clause evaluation at gap0=1 freezes the golden value
  CHECK(sgd_bounded_constant_rate(k111, 1.0, 1.0, 100, 0.1) ==
        doctest::Approx(0.0043147246080530739).epsilon(1e-13));

  // constant <= adaptive at every gap_t <= 4*gap0
  CounterRng rng(9);
  for (int i = 0; i < 300; ++i) {
    const double gap0 = 0.1 + 10.0 * rng.next_unit();
    const double gap_t = 4.0 * gap0 * rng.next_unit();
    const double c = sgd_bounded_constant_rate(k111, gap0, 1.0, 100, 0.1);
    const double a =
        sgd_bounded_adaptive_rate(k111, gap_t, 1.0, 100, 0.1, gap0);
    CHECK(c <= a * (1.0 + 1e-12));
  }
}

TEST_CASE("abc adaptive rate") {
  // A=B=0 oracle: {0.014091832, inf, 0.069035594, 0.016475256, 0.05}
  CHECK(sgd_abc_adaptive_rate(k111, 1.0, 0.0, 0.0, 1.0, 100, 0.1, 1.0) ==
        doctest::Approx(0.014091831560480231).epsilon(1e-13));

  // sigma -> 0 with A=B=0 leaves only the curvature clause
  CHECK(sgd_abc_adaptive_rate(k111, 1.0, 0.0, 0.0, 0.0, 100, 0.1, 1.0) ==
        doctest::Approx(0.014091831560480231).epsilon(1e-13));

  // B -> infinity kills the rate through the (B+1) factor
  CHECK(sgd_abc_adaptive_rate(k111, 1.0, 0.0, 1e9, 1.0, 100, 0.1, 1.0) <
        1e-9);

  CHECK_THROWS_AS(
      sgd_abc_adaptive_rate(k111, 1.0, -1.0, 0.0, 1.0, 100, 0.1, 1.0),
      std::invalid_argument);
}

TEST_CASE("abc constant rate") {
  // golden value at A=B=1, gap0=1, sigma=1, T=100, delta=0.1 from the
  // clause-by-clause oracle (clause 4 binds)
  CHECK(sgd_abc_constant_rate(k111, 1.0, 1.0, 1.0, 1.0, 100, 0.1) ==
        doctest::Approx(0.00022792345361136176).epsilon(1e-12));

  // A=B=0 reduces to the bounded-noise structure at gap_c = 8*gap0; verify
  // against the in-test clause oracle
  {
    const double gap_c = 8.0;
    const double pref = 1.0 / (std::sqrt(6.0) * (4.0 * std::sqrt(2.0) + 4.0));
    const double r = radius_r(k111, gap_c);
    const double l = local_L(k111, gap_c);
    const double g = std::sqrt(gap_c + 3.0 * gap_c * gap_c);
    const double c2 = lemma_constants(k111).c2;
    const double alpha =
        (g + l * c2) * (1.0 + std::sqrt(2.0 * std::log(10.0)));
    const double expect = std::min(
        {pref * std::min(1.0, 1.0 / (3.0 * gap_c)), r / std::sqrt(6.0),
         1.0 / std::sqrt(2.0 * g * g * 100.0 * std::log(10.0)),
         std::sqrt(1.0 / (l * 100.0)), 1.0 / alpha});
    CHECK(sgd_abc_constant_rate(k111, 1.0, 0.0, 0.0, 1.0, 100, 0.1) ==
          doctest::Approx(expect).epsilon(1e-13));
  }

  // constant <= adaptive at matched inputs whenever gap_t <= 8*gap0
  CounterRng rng(17);
  for (int i = 0; i < 300; ++i) {
    const double gap0 = 0.1 + 5.0 * rng.next_unit();
    const double gap_t = 8.0 * gap0 * rng.next_unit();
    const double c =
        sgd_abc_constant_rate(k111, gap0, 1.0, 1.0, 1.0, 100, 0.1);
    const double a =
        sgd_abc_adaptive_rate(k111, gap_t, 1.0, 1.0, 1.0, 100, 0.1, gap0);
    CHECK(c <= a * (1.0 + 1e-12));
  }
}

TEST_CASE("baseline rates") {
  ScheduleSpec spec;
  spec.kind = ScheduleKind::LinearWarmupCosine;
  spec.eta_peak = 0.1;
  spec.warmup_steps = 10;
  spec.horizon = 100;
  CHECK(baseline_rate(spec, 4) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(baseline_rate(spec, 10) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(baseline_rate(spec, 99) ==
        doctest::Approx(3.0458649045211895e-05).epsilon(1e-10));
  CHECK_THROWS_AS(baseline_rate(spec, 100), std::invalid_argument);

  spec.warmup_steps = 100;
  CHECK_THROWS_AS(baseline_rate(spec, 5), std::invalid_argument);

  ScheduleSpec fixed;
  fixed.kind = ScheduleKind::FixedConstant;
  fixed.eta_peak = 0.25;
  CHECK(baseline_rate(fixed, 12345) == 0.25);
}

TEST_CASE("stability and comparison properties over random certificates") {
  CounterRng rng(101);
  for (int i = 0; i < 10000; ++i) {
    SmoothnessCertificate cert;
    cert.rho = 3.0 * rng.next_unit();
    cert.k0 = rng.next_unit() < 0.2 ? 0.0 : 10.0 * rng.next_unit();
    cert.krho = 10.0 * rng.next_unit();
    if (cert.k0 == 0.0 && cert.krho == 0.0) cert.krho = 1.0;
    const double gap = 100.0 * rng.next_unit();
    const double eta = gd_warmup_rate(cert, gap);
    CHECK(eta > 0.0);
    CHECK(std::isfinite(eta));
    const double l = local_L(cert, gap);
    if (l > 0.0) CHECK(eta <= (1.0 / l) * (1.0 + 1e-12));

    const double eta_b =
        sgd_bounded_adaptive_rate(cert, gap, 1.0, 50, 0.2, gap + 1.0);
    const double eta_abc =
        sgd_abc_adaptive_rate(cert, gap, 0.0, 0.0, 1.0, 50, 0.2, gap + 1.0);
    CHECK(eta_abc <= eta_b * (1.0 + 1e-12));
  }
}

TEST_CASE("schedule names round-trip") {
  for (ScheduleKind kind :
       {ScheduleKind::GDWarmup, ScheduleKind::GDConstant,
        ScheduleKind::ConvexGDWarmup, ScheduleKind::ConvexGDConstant,
        ScheduleKind::SGDBoundedAdaptive, ScheduleKind::SGDBoundedConstant,
        ScheduleKind::ABCAdaptive, ScheduleKind::ABCConstant,
        ScheduleKind::FixedConstant, ScheduleKind::LinearWarmupCosine}) {
    CHECK(schedule_kind_from_name(schedule_name(kind)) == kind);
  }
  CHECK_THROWS_AS(schedule_kind_from_name("bogus"), std::invalid_argument);
}
