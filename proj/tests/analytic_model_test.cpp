#include "escape/analytic_model.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"

using namespace escape::analytic;

namespace {

double rel_err(double got, long double want) {
  return static_cast<double>(oracle::abs(static_cast<long double>(got) - want) /
                             oracle::abs(want));
}

const PopulationParams kN5V20{5.0, 20};

}  // namespace

TEST_CASE("oracle agrees with reference values computed at 30 digits") {
  // Frozen from an mpmath evaluation at 30 significant digits.
  CHECK(oracle::abs(oracle::distinct_sites(oracle::kE) - 8.53973422267356706546L) < 1e-15L);
  CHECK(oracle::abs(oracle::distinct_sites(10) - 13.6437635384184134749L) < 1e-15L);
  CHECK(oracle::abs(oracle::p_static(10, 5, 20) - 0.0330101270396398382460L) < 1e-15L);
  CHECK(oracle::abs(oracle::p_mobile(10, 5, 20) - 0.808007607495802090903L) < 1e-15L);
  CHECK(oracle::abs(oracle::logistic(2, 0.5L, 10, 2) - 4.04609675191689664821L) < 1e-15L);
}

TEST_CASE("distinct_sites_visited") {
  CHECK(rel_err(distinct_sites_visited(std::exp(1.0)), oracle::kPi * oracle::kE) < 1e-9);
  CHECK(rel_err(distinct_sites_visited(10.0), oracle::distinct_sites(10)) < 1e-9);
  CHECK(distinct_sites_visited(10.0) == doctest::Approx(13.64376).epsilon(1e-6));

  CHECK_THROWS_AS(distinct_sites_visited(1.0), DomainError);
  CHECK_THROWS_AS(distinct_sites_visited(0.5), DomainError);
  CHECK_THROWS_AS(distinct_sites_visited(-3.0), DomainError);
  CHECK_THROWS_AS(distinct_sites_visited(std::nan("")), DomainError);
}

TEST_CASE("detection_success_fraction") {
  CHECK(detection_success_fraction(DetectionParams::with_time(0.0)) == 0.0);
  CHECK(rel_err(detection_success_fraction(DetectionParams::with_time(0.1)),
                oracle::detection_fraction(0.1L)) < 1e-12);
  CHECK(detection_success_fraction(DetectionParams::with_time(0.1)) ==
        doctest::Approx(0.095163).epsilon(1e-5));
  CHECK(detection_success_fraction(DetectionParams::with_time(50.0)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(detection_success_fraction(DetectionParams::with_time(50.0)) <= 1.0);
  CHECK(detection_success_fraction(DetectionParams::disabled()) == 1.0);
  CHECK_THROWS_AS(detection_success_fraction(DetectionParams::with_time(-1.0)),
                  std::invalid_argument);
}

TEST_CASE("survival_static") {
  CHECK(survival_static(10.0, {0.0, 20}, DetectionParams::disabled()) == 1.0);
  CHECK(survival_static(37.5, {0.0, 7}, DetectionParams::with_time(3.0)) == 1.0);

  const double p = survival_static(10.0, kN5V20, DetectionParams::disabled());
  CHECK(rel_err(p, oracle::p_static(10, 5, 20)) < 1e-9);
  CHECK(p == doctest::Approx(0.03301).epsilon(1e-3));

  const double pd = survival_static(10.0, kN5V20, DetectionParams::with_time(0.1));
  CHECK(rel_err(pd, oracle::p_static(10, 5, 20, oracle::detection_fraction(0.1L))) < 1e-9);
  CHECK(pd == doctest::Approx(0.7227).epsilon(1e-3));

  CHECK_THROWS_AS(survival_static(1.0, kN5V20, DetectionParams::disabled()), DomainError);
  CHECK_THROWS_AS(survival_static(10.0, {21.0, 20}, DetectionParams::disabled()),
                  std::invalid_argument);
  CHECK_THROWS_AS(survival_static(10.0, {1.0, 0}, DetectionParams::disabled()),
                  std::invalid_argument);
}

TEST_CASE("survival_mobile") {
  const double p = survival_mobile(10.0, kN5V20, DetectionParams::disabled());
  CHECK(rel_err(p, oracle::p_mobile(10, 5, 20)) < 1e-9);
  CHECK(p == doctest::Approx(0.8080).epsilon(1e-3));

  CHECK(survival_mobile(10.0, {0.0, 20}, DetectionParams::disabled()) == 1.0);

  for (double t : {2.0, 10.0, 55.5}) {
    const PopulationParams full{20.0, 20};
    CHECK(survival_mobile(t, full, DetectionParams::disabled()) ==
          survival_static(t, full, DetectionParams::disabled()));
  }
  CHECK_THROWS_AS(survival_mobile(0.9, kN5V20, DetectionParams::disabled()), DomainError);
}

TEST_CASE("attackers_at") {
  const LogisticGrowth logistic{2.0, 0.5, 10.0};
  CHECK(attackers_at(logistic, 0.0) == 2.0);
  CHECK(rel_err(attackers_at(logistic, 2.0), oracle::logistic(2, 0.5L, 10, 2)) < 1e-9);
  CHECK(attackers_at(logistic, 2.0) == doctest::Approx(4.0461).epsilon(1e-4));
  CHECK(std::abs(attackers_at(logistic, 100.0) - 10.0) < 1e-6);
  CHECK(attackers_at(logistic, 1e6) == 10.0);

  CHECK(rel_err(attackers_at(ExponentialGrowth{1.0, 0.5}, 2.0), oracle::kE) < 1e-9);
  CHECK(attackers_at(ExponentialGrowth{3.0, 0.7}, 0.0) == 3.0);
  CHECK(attackers_at(StaticGrowth{4.5}, 1234.0) == 4.5);

  CHECK_THROWS_AS(attackers_at(logistic, -1.0), DomainError);
  CHECK_THROWS_AS(attackers_at(LogisticGrowth{5.0, 0.5, 4.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(attackers_at(ExponentialGrowth{0.0, 0.5}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(attackers_at(ExponentialGrowth{1.0, -0.5}, 1.0), std::invalid_argument);
}

TEST_CASE("survival_curve") {
  const std::vector<double> grid{2.0, 3.0, 10.0, 50.0};

  SUBCASE("no attackers") {
    const auto c = survival_curve(Mobility::Static, StaticGrowth{0.0}, 20,
                                  DetectionParams::disabled(), grid);
    REQUIRE(c.points.size() == grid.size());
    for (const auto& pt : c.points) {
      CHECK(pt.p == 1.0);
    }
  }

  SUBCASE("single point matches survival_static") {
    const std::vector<double> one{10.0};
    const auto c = survival_curve(Mobility::Static, StaticGrowth{5.0}, 20,
                                  DetectionParams::disabled(), one);
    REQUIRE(c.points.size() == 1);
    CHECK(c.points[0].t == 10.0);
    CHECK(rel_err(c.points[0].p, oracle::p_static(10, 5, 20)) < 1e-9);
  }

  SUBCASE("growth beyond V is clamped") {
    const LogisticGrowth big{2.0, 1.0, 50.0};
    const std::vector<double> late{60.0, 80.0};
    for (const auto mode : {Mobility::Static, Mobility::Mobile}) {
      const auto c = survival_curve(mode, big, 20, DetectionParams::disabled(), late);
      for (const auto& pt : c.points) {
        CHECK(pt.p == survival(mode, pt.t, {20.0, 20}, DetectionParams::disabled()));
      }
    }
  }

  SUBCASE("singular grid point is reported") {
    const std::vector<double> bad{2.0, 1.0};
    try {
      survival_curve(Mobility::Static, StaticGrowth{5.0}, 20, DetectionParams::disabled(), bad);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("t=1") != std::string::npos);
    }
  }

  SUBCASE("grid must increase") {
    const std::vector<double> bad{3.0, 2.0};
    CHECK_THROWS_AS(survival_curve(Mobility::Static, StaticGrowth{5.0}, 20,
                                   DetectionParams::disabled(), bad),
                    std::invalid_argument);
  }
}

TEST_CASE("property: range, mobility advantage, detection benefit, monotonicity") {
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> t_dist(1.001, 500.0);
  std::uniform_int_distribution<int> v_dist(1, 500);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> td_dist(0.0, 10.0);

  for (int i = 0; i < 5000; ++i) {
    const double t = t_dist(gen);
    const int v = v_dist(gen);
    const double n = unit(gen) * v;
    const auto d = unit(gen) < 0.5 ? DetectionParams::disabled()
                                   : DetectionParams::with_time(td_dist(gen));
    const PopulationParams pop{n, v};
    const double ps = survival_static(t, pop, d);
    const double pm = survival_mobile(t, pop, d);
    CAPTURE(t);
    CAPTURE(v);
    CAPTURE(n);
    REQUIRE(ps >= 0.0);
    REQUIRE(ps <= 1.0);
    REQUIRE(pm >= 0.0);
    REQUIRE(pm <= 1.0);
    REQUIRE(pm >= ps);

    // Detection: larger t_d never helps.
    const double td1 = td_dist(gen);
    const double td2 = td1 + td_dist(gen);
    REQUIRE(survival_static(t, pop, DetectionParams::with_time(td2)) <=
            survival_static(t, pop, DetectionParams::with_time(td1)));
    REQUIRE(survival_mobile(t, pop, DetectionParams::with_time(td2)) <=
            survival_mobile(t, pop, DetectionParams::with_time(td1)));

    // More attackers never help.
    const double n2 = n + unit(gen) * (v - n);
    REQUIRE(survival_static(t, {n2, v}, d) <= ps);
    REQUIRE(survival_mobile(t, {n2, v}, d) <= pm);
  }
}

TEST_CASE("mobility advantage is strict for 0 < N < V with detection disabled") {
  for (int v : {2, 20, 400}) {
    for (double t : {1.5, 2.0, 10.0, 100.0}) {
      for (int n = 1; n < v; n += std::max(1, v / 20)) {
        const PopulationParams pop{static_cast<double>(n), v};
        CHECK(survival_mobile(t, pop, DetectionParams::disabled()) >
              survival_static(t, pop, DetectionParams::disabled()));
      }
    }
  }
}

TEST_CASE("S(t) is minimal at t = e: static survival rises on (1, e), falls after") {
  const PopulationParams pop{5.0, 20};
  const auto d = DetectionParams::disabled();
  // Non-monotone region: S decreases on (1, e) so survival increases there.
  CHECK(survival_static(1.5, pop, d) < survival_static(2.0, pop, d));
  CHECK(survival_static(2.0, pop, d) < survival_static(2.7, pop, d));
  double previous = survival_static(std::exp(1.0), pop, d);
  for (double t = std::exp(1.0) + 0.05; t < 200.0; t += 0.05) {
    const double p = survival_static(t, pop, d);
    REQUIRE(p <= previous);
    previous = p;
  }
}

TEST_CASE("PopulationParams::clamped") {
  CHECK(PopulationParams::clamped(25.0, 20).n_hacked == 20.0);
  CHECK(PopulationParams::clamped(-1.0, 20).n_hacked == 0.0);
  CHECK(PopulationParams::clamped(7.25, 20).n_hacked == 7.25);
  CHECK_THROWS_AS(PopulationParams::clamped(1.0, 0), std::invalid_argument);
}
