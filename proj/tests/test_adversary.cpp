#include <doctest.h>

#include <cmath>
#include <numbers>

#include "warmlab/adversary.hpp"
#include "warmlab/smoothness.hpp"

using namespace warmlab;

TEST_CASE("schedule classification against the threshold 2/(K1 delta)") {
  const std::vector<double> low(20, 0.1);
  CHECK(classify_schedule(low, 1.0, 10.0) == std::pair{1, -1ll});

  const std::vector<double> high(20, 0.3);
  CHECK(classify_schedule(high, 1.0, 10.0) == std::pair{2, -1ll});

  std::vector<double> mixed{0.3, 0.3, 0.1, 0.1, 0.1};
  CHECK(classify_schedule(mixed, 1.0, 10.0) == std::pair{3, 1ll});

  std::vector<double> increasing{0.1, 0.2};
  CHECK_THROWS_AS(classify_schedule(increasing, 1.0, 10.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(classify_schedule({}, 1.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(classify_schedule({0.1, -0.1}, 1.0, 10.0),
                  std::invalid_argument);
}

TEST_CASE("case 1: the linear/quartic well") {
  const std::vector<double> etas(10, 0.2);
  const AdversaryInstance inst = build_instance(etas, 1.0, 10.0, 0.1);
  CHECK(inst.case_id == 1);
  CHECK(inst.w0 == doctest::Approx(101.0));
  CHECK(inst.value(inst.w0) == doctest::Approx(20.125).epsilon(1e-12));
  CHECK(inst.value(0.0) == 0.0);
  CHECK(inst.deriv(0.0) == 0.0);
  // piece agreement at the junction x = 1/sqrt(K1)
  CHECK(inst.value(1.0) == doctest::Approx(1.25 * 0.1).epsilon(1e-12));
  const InstanceReport rep = verify_instance(inst, 20000);
  CHECK(rep.junctions_ok);
  CHECK(rep.gap_ok);
  // the well's curvature at the minimum is 3 eps sqrt(K1); the stated
  // (1, eps sqrt(K1), 4 pi K1) certificate misses it by exactly 2 eps sqrt(K1)
  CHECK(rep.certificate_violation ==
        doctest::Approx(2.0 * 0.1).epsilon(1e-6));
  CHECK(rep.certificate_violation_k0_3x <= 1e-9);
}

TEST_CASE("case 1 count matches the closed-form floor") {
  const std::vector<double> etas(10, 0.2);
  const AdversaryInstance inst = build_instance(etas, 1.0, 10.0, 0.1);
  const CountResult res = count_iterations_to_stationarity(inst, etas, 100000);
  REQUIRE(res.count.has_value());
  CHECK(*res.count >= 2500);  // K1 delta^2 / (4 eps^2)
  CHECK(*res.count <= 4000);
}

TEST_CASE("case 2: iterates land exactly on the junctions") {
  const std::vector<double> etas(200, 0.3);
  // eta K1 delta = 3 > 2, so this sequence classifies as case 2
  const AdversaryInstance inst = build_instance(etas, 1.0, 10.0, 0.5);
  CHECK(inst.case_id == 2);
  // b_0 = 2 pi / (eta sqrt(K1) delta)
  CHECK(inst.trig[0].b ==
        doctest::Approx(2.0 * std::numbers::pi / 3.0).epsilon(1e-14));

  const CountResult res = count_iterations_to_stationarity(inst, etas, 200);
  CHECK(!res.count.has_value());  // gradient never drops to eps
  for (std::size_t t = 0; t < res.iterates.size(); ++t) {
    const double xt = inst.junctions[t];
    CHECK(std::abs(res.iterates[t] - xt) <=
          1e-9 * std::max(1.0, std::abs(xt)));
    // slope at every junction is sqrt(K1) delta = 10
    CHECK(res.grad_abs[t] == doctest::Approx(10.0).epsilon(1e-6));
  }
  const InstanceReport rep = verify_instance(inst, 20000);
  CHECK(rep.junctions_ok);
  CHECK(rep.certificate_ok);  // pure chain satisfies (1, 0, 4 pi K1)
  CHECK(rep.gap_ok);
}

TEST_CASE("forced chain for sub-threshold rates keeps the junction identities") {
  const std::vector<double> etas(100, 0.3);
  // with K1 = delta = 1 this sequence is below 2/(K1 delta) and classifies
  // as case 1; the chain itself is still well-defined
  CHECK(classify_schedule(etas, 1.0, 1.0).first == 1);
  const AdversaryInstance chain = build_case2_chain(etas, 1.0, 1.0, 0.5);
  CHECK(chain.trig[0].b ==
        doctest::Approx(2.0 * std::numbers::pi / 0.3).epsilon(1e-14));
  CHECK(chain.junctions[1] == doctest::Approx(-0.3).epsilon(1e-14));
  const CountResult res = count_iterations_to_stationarity(chain, etas, 100);
  CHECK(!res.count.has_value());
  for (std::size_t t = 0; t < res.iterates.size(); ++t) {
    CHECK(std::abs(res.iterates[t] - chain.junctions[t]) <=
          1e-9 * std::max(1.0, std::abs(chain.junctions[t])));
    CHECK(res.grad_abs[t] == doctest::Approx(1.0).epsilon(1e-6));
  }
  const InstanceReport rep = verify_instance(chain, 20000);
  CHECK(rep.junctions_ok);
}

TEST_CASE("case 3: link and well joined behind the chain") {
  std::vector<double> etas{8.0, 8.0};
  for (int i = 0; i < 60; ++i) etas.push_back(0.5);
  // threshold 2/(K1 delta) = 2; eta_tau K1 delta = 8 > 6
  const AdversaryInstance inst = build_instance(etas, 1.0, 1.0, 0.1);
  CHECK(inst.case_id == 3);
  CHECK(inst.tau == 1);

  // every sine piece meets the link's right-endpoint value
  for (const TrigPiece& p : inst.trig) {
    const double v = p.a * std::sin(p.phase) + p.d;
    CHECK(v == doctest::Approx(inst.g_at_x_tau).epsilon(1e-12));
  }
  CHECK(inst.g_at_x_tau >= 7.0 * inst.delta);
  CHECK(inst.g_at_x_tau <= 8.0 * inst.delta);

  const InstanceReport rep = verify_instance(inst, 20000);
  CHECK(rep.junctions_ok);
  CHECK(rep.link_ok);
  CHECK(rep.gap_ok);
  CHECK(rep.certificate_violation_k0_3x <= 1e-9);

  // count floor from the closing bound
  const double step_cap = 4.0 * inst.eps * inst.eps * (2.0 / (inst.k1 * inst.delta));
  const double numerator =
      inst.link_D / 12.0 - inst.link_B / 2.0 + 7.0 * inst.delta;
  const CountResult res = count_iterations_to_stationarity(inst, etas, 2000000);
  REQUIRE(res.count.has_value());
  CHECK(static_cast<double>(*res.count) >= numerator / step_cap);
}

TEST_CASE("case 3 rejects out-of-scope parameters") {
  std::vector<double> etas{8.0};
  for (int i = 0; i < 10; ++i) etas.push_back(0.5);
  // eps too large for the well
  CHECK_THROWS_AS(build_instance(etas, 1.0, 1.0, 0.9), std::invalid_argument);

  std::vector<double> omitted{3.0};
  for (int i = 0; i < 10; ++i) omitted.push_back(0.5);
  // eta_tau K1 delta = 3 lies in the omitted (2, 6] range
  CHECK_THROWS_WITH_AS(build_instance(omitted, 1.0, 1.0, 0.1),
                       "build_instance: eta_tau K1 delta in (2, 6] has no "
                       "construction",
                       std::invalid_argument);
}

TEST_CASE("instance objective adapts to the common contract") {
  const std::vector<double> etas(10, 0.2);
  const AdversaryInstance inst = build_instance(etas, 1.0, 10.0, 0.1);
  const ObjectiveHandle obj = instance_objective(inst);
  CHECK(obj->dim() == 1);
  CHECK(obj->certificate().k0 ==
        doctest::Approx(0.1 * 1.0));  // eps sqrt(K1)
  CHECK(obj->certificate().krho ==
        doctest::Approx(4.0 * std::numbers::pi));
  CHECK(obj->value(ParamVector{0.0}) == 0.0);
  CHECK(obj->gradient(ParamVector{inst.w0})[0] ==
        doctest::Approx(2.0 * 0.1).epsilon(1e-12));
  CHECK(obj->default_start()[0] == inst.w0);
}

TEST_CASE("instance dump mentions the construction data") {
  const std::vector<double> etas(5, 0.2);
  const AdversaryInstance inst = build_instance(etas, 1.0, 10.0, 0.1);
  const std::string dump = instance_dump(inst);
  CHECK(dump.find("case 1") != std::string::npos);
  CHECK(dump.find("junctions") != std::string::npos);
}
