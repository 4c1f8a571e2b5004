#include <doctest.h>

#include <cmath>

#include "seqpgg/equilibrium.hpp"

using namespace seqpgg;

TEST_CASE("pure threshold values") {
  CHECK(pure_threshold(4, 2) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(pure_threshold(4, 1) == 2.0);
  CHECK(pure_threshold(4, 3) == 4.0);  // equals n: no valid r
  CHECK_THROWS_AS(pure_threshold(4, 0), DomainError);
  CHECK_THROWS_AS(pure_threshold(4, 4), DomainError);
}

TEST_CASE("expected defection payoff from a full sample") {
  CHECK(expected_defect_payoff_full_sample(4, 2, 3.0) == doctest::Approx(1.875));
  // exact indifference at the threshold r
  for (int n = 3; n <= 9; ++n) {
    for (int m = 1; m <= n - 1; ++m) {
      const double r_star = pure_threshold(n, m);
      CHECK(r_star - 1.0 ==
            doctest::Approx(expected_defect_payoff_full_sample(n, m, r_star))
                .epsilon(1e-12));
    }
  }
  CHECK(expected_defect_payoff_full_sample(4, 1, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("forgiveness probability fixed point") {
  // reference roots computed independently by bracketed root-finding on the
  // expanded rational form of the fixed-point equation
  const double g3 = solve_gamma(4, 3.0);
  CHECK(std::abs(g3 - 0.528) < 1e-3);
  CHECK(std::abs(g3 - 0.5282202112918652) < 1e-9);
  CHECK(std::abs(solve_gamma(4, 2.5) - 0.12) < 1e-2);
  CHECK(std::abs(solve_gamma(4, 2.5) - 0.1163781754467924) < 1e-9);
  CHECK(std::abs(solve_gamma(4, 4.0) - 1.0) < 1e-9);

  CHECK_THROWS_AS(solve_gamma(4, 2.4), RegionError);
  CHECK_THROWS_AS(solve_gamma(4, 4.5), RegionError);
}

TEST_CASE("fixed point residual stays below 1e-9 in the direct form") {
  for (int n : {3, 4, 5, 6, 8}) {
    const double lo = mixed_region_lower(n);
    for (int i = 1; i <= 24; ++i) {
      const double r = lo + (n - lo) * i / 24.0;
      const double g = solve_gamma(n, r);
      CHECK(g > 0.0);
      CHECK(g <= 1.0);
      const double direct = 2.0 / g -
                            (n - 1) * (1.0 - std::pow(1.0 - g, n)) /
                                (g * n - 1.0 + std::pow(1.0 - g, n)) -
                            static_cast<double>(n) / r;
      CHECK(std::abs(direct) < 1e-9);
    }
  }
}

TEST_CASE("gamma is strictly increasing in r on the mixed region") {
  double prev = 0.0;
  for (int i = 1; i <= 25; ++i) {
    const double r = 2.4 + (4.0 - 2.4) * i / 25.0;
    const double g = solve_gamma(4, r);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("unraveling position under certainty") {
  CHECK(unravel_position(4, 3.0) == 4);
  CHECK(unravel_position(4, 3.999) == 4);  // only the last position defects
  // direct evaluation: (1.5/4)(t-1) > 0.5 first holds at t=3
  CHECK(unravel_position(4, 1.5) == 3);
  CHECK_FALSE(unravel_position(4, 4.0).has_value());

  // brute-force oracle over a grid of (n, r)
  for (int n = 2; n <= 8; ++n) {
    for (int i = 1; i <= 30; ++i) {
      const double r = 1.0 + (n - 1.0) * i / 31.0;
      std::optional<int> expected;
      for (int t = 2; t <= n; ++t) {
        if (r / n * (t - 1) > r - 1.0) {
          expected = t;
          break;
        }
      }
      CHECK(unravel_position(n, r) == expected);
    }
  }
}

TEST_CASE("regime classification across the treatments") {
  SUBCASE("window 2, unknown position, r=3: pure equilibrium exists") {
    const EquilibriumSummary s = classify_regime(game_config_for(Treatment::T1));
    CHECK(s.pure_exists);
    CHECK_FALSE(s.gamma.has_value());
    CHECK_FALSE(s.unravel_position.has_value());
  }
  SUBCASE("window 1, unknown position, r=3: mixed with gamma") {
    const EquilibriumSummary s = classify_regime(game_config_for(Treatment::T2));
    CHECK_FALSE(s.pure_exists);
    REQUIRE(s.gamma.has_value());
    CHECK(*s.gamma == doctest::Approx(0.528).epsilon(2e-3));
    REQUIRE(s.mixed_region.has_value());
    CHECK(s.mixed_region->first == doctest::Approx(2.4));
    CHECK(s.mixed_region->second == 4.0);
  }
  SUBCASE("window 1, low r: pure region") {
    GameConfig cfg = game_config_for(Treatment::T2);
    cfg.r = 2.2;
    const EquilibriumSummary s = classify_regime(cfg);
    CHECK(s.pure_exists);
    CHECK_FALSE(s.gamma.has_value());
  }
  SUBCASE("known position: unravels at position 4") {
    const EquilibriumSummary s = classify_regime(game_config_for(Treatment::T3));
    CHECK_FALSE(s.pure_exists);
    REQUIRE(s.unravel_position.has_value());
    CHECK(*s.unravel_position == 4);
  }
  SUBCASE("threshold consistency for window >= 2") {
    for (double r : {2.0, 2.5, 8.0 / 3.0, 2.8, 3.5, 3.9}) {
      GameConfig cfg = game_config_for(Treatment::T1);
      cfg.r = r;
      const EquilibriumSummary s = classify_regime(cfg);
      const bool deviation_unprofitable =
          r - 1.0 >= expected_defect_payoff_full_sample(cfg.n, cfg.m, r) - 1e-12;
      CHECK(s.pure_exists == deviation_unprofitable);
    }
  }
}
