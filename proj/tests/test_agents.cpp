#include <doctest.h>

#include <cmath>
#include <map>

#include "seqpgg/agents.hpp"
#include "seqpgg/equilibrium.hpp"

using namespace seqpgg;

namespace {

TypePrescriptions table_for(Treatment t) {
  return TypePrescriptions(t, game_config_for(t));
}

}  // namespace

TEST_CASE("prescription tables, all cells") {
  const TypePrescriptions t1 = table_for(Treatment::T1);
  const TypePrescriptions t2 = table_for(Treatment::T2);
  const TypePrescriptions t3 = table_for(Treatment::T3);
  const double g = t2.gamma();

  struct Row {
    BehavioralType k;
    const TypePrescriptions* table;
    // cells in order P1c0, P2c0, P2c1, P3c0, P3c1, P3c2, P4c0, P4c1, P4c2
    // (window-1 treatments use the first five entries: P1c0, P2c0, P2c1,
    //  P3c0, P3c1, P4c0, P4c1 -- listed separately below)
    std::map<std::pair<int, int>, double> cells;
  };

  const std::vector<Row> window2 = {
      {BehavioralType::Gm, &t1,
       {{{1, 0}, 1}, {{2, 0}, 0}, {{2, 1}, 1}, {{3, 0}, 0}, {{3, 1}, 0}, {{3, 2}, 1},
        {{4, 0}, 0}, {{4, 1}, 0}, {{4, 2}, 1}}},
      {BehavioralType::Gm, &t3,
       {{{1, 0}, 0}, {{2, 0}, 0}, {{2, 1}, 0}, {{3, 0}, 0}, {{3, 1}, 0}, {{3, 2}, 0},
        {{4, 0}, 0}, {{4, 1}, 0}, {{4, 2}, 0}}},
      {BehavioralType::FreeRider, &t1,
       {{{1, 0}, 0}, {{2, 0}, 0}, {{2, 1}, 0}, {{3, 0}, 0}, {{3, 1}, 0}, {{3, 2}, 0},
        {{4, 0}, 0}, {{4, 1}, 0}, {{4, 2}, 0}}},
      {BehavioralType::Altruist, &t1,
       {{{1, 0}, 1}, {{2, 0}, 1}, {{2, 1}, 1}, {{3, 0}, 1}, {{3, 1}, 1}, {{3, 2}, 1},
        {{4, 0}, 1}, {{4, 1}, 1}, {{4, 2}, 1}}},
      {BehavioralType::ConditionalCooperator, &t1,
       {{{1, 0}, 1}, {{2, 0}, 0}, {{2, 1}, 1}, {{3, 0}, 0}, {{3, 1}, 1}, {{3, 2}, 1},
        {{4, 0}, 0}, {{4, 1}, 1}, {{4, 2}, 1}}},
      {BehavioralType::ConditionalCooperator, &t3,
       {{{1, 0}, 1}, {{2, 0}, 0}, {{2, 1}, 1}, {{3, 0}, 0}, {{3, 1}, 1}, {{3, 2}, 1},
        {{4, 0}, 0}, {{4, 1}, 1}, {{4, 2}, 1}}},
  };
  for (const Row& row : window2)
    for (const auto& [cell, expected] : row.cells)
      CHECK(row.table->prescription(row.k, cell.first, cell.second) == expected);

  const std::vector<Row> window1 = {
      {BehavioralType::Gm, &t2,
       {{{1, 0}, 1}, {{2, 0}, g}, {{2, 1}, 1}, {{3, 0}, g}, {{3, 1}, 1},
        {{4, 0}, g}, {{4, 1}, 1}}},
      {BehavioralType::ConditionalCooperator, &t2,
       {{{1, 0}, 1}, {{2, 0}, 0}, {{2, 1}, 1}, {{3, 0}, 0}, {{3, 1}, 1},
        {{4, 0}, 0}, {{4, 1}, 1}}},
      {BehavioralType::Altruist, &t2,
       {{{1, 0}, 1}, {{2, 0}, 1}, {{2, 1}, 1}, {{3, 0}, 1}, {{3, 1}, 1},
        {{4, 0}, 1}, {{4, 1}, 1}}},
      {BehavioralType::FreeRider, &t2,
       {{{1, 0}, 0}, {{2, 0}, 0}, {{2, 1}, 0}, {{3, 0}, 0}, {{3, 1}, 0},
        {{4, 0}, 0}, {{4, 1}, 0}}},
  };
  for (const Row& row : window1)
    for (const auto& [cell, expected] : row.cells)
      CHECK(row.table->prescription(row.k, cell.first, cell.second) == expected);

  CHECK(g == doctest::Approx(solve_gamma(4, 3.0)));
}

TEST_CASE("only the window-1 gm cells mix, and gm(T3) == free rider") {
  for (Treatment t : kAllTreatments) {
    const TypePrescriptions table = table_for(t);
    for (BehavioralType k : kAllTypes) {
      for (int pos = 1; pos <= 4; ++pos) {
        for (const ConditionCell& cell : enumerate_cells(t, pos)) {
          const double sigma = table.prescription(k, pos, cell.condition);
          const bool mixed = sigma != 0.0 && sigma != 1.0;
          const bool gamma_cell = k == BehavioralType::Gm && t == Treatment::T2 &&
                                  pos >= 2 && cell.condition == 0;
          CHECK(mixed == gamma_cell);
        }
      }
    }
  }
  const TypePrescriptions t3 = table_for(Treatment::T3);
  for (int pos = 1; pos <= 4; ++pos)
    for (const ConditionCell& cell : enumerate_cells(Treatment::T3, pos))
      CHECK(t3.prescription(BehavioralType::Gm, pos, cell.condition) ==
            t3.prescription(BehavioralType::FreeRider, pos, cell.condition));
}

TEST_CASE("unreachable cells throw") {
  const TypePrescriptions t2 = table_for(Treatment::T2);
  CHECK_THROWS_AS(t2.prescription(BehavioralType::Altruist, 3, 2), DomainError);
  CHECK_THROWS_AS(t2.prescription(BehavioralType::Gm, 1, 1), DomainError);
  const TypePrescriptions t1 = table_for(Treatment::T1);
  CHECK_THROWS_AS(t1.prescription(BehavioralType::Gm, 2, 2), DomainError);
  CHECK_THROWS_AS(t1.prescription(BehavioralType::Gm, 5, 0), DomainError);
}

TEST_CASE("choice probability blends the tremble") {
  const TypePrescriptions t1 = table_for(Treatment::T1);
  const TypePrescriptions t2 = table_for(Treatment::T2);
  CHECK(t1.choice_probability(BehavioralType::Altruist, 3, 1, 0.9) ==
        doctest::Approx(0.9));
  CHECK(t1.choice_probability(BehavioralType::FreeRider, 3, 1, 0.9) ==
        doctest::Approx(0.1));
  // mixed gm cell: sigma*beta + (1-sigma)*(1-beta) with sigma = gamma
  const double g = t2.gamma();
  CHECK(t2.choice_probability(BehavioralType::Gm, 2, 0, 0.9) ==
        doctest::Approx(g * 0.9 + (1 - g) * 0.1).epsilon(1e-12));
  CHECK(std::abs(t2.choice_probability(BehavioralType::Gm, 2, 0, 0.9) - 0.5224) < 2e-3);

  // affine in sigma; equals beta exactly when sigma = 1
  for (double beta : {0.6, 0.75, 0.9}) {
    CHECK(t1.choice_probability(BehavioralType::Altruist, 1, 0, beta) == beta);
    CHECK(t2.choice_probability(BehavioralType::Gm, 3, 1, beta) == beta);
  }
  CHECK_THROWS_AS(t1.choice_probability(BehavioralType::Altruist, 1, 0, 0.4),
                  DomainError);
  CHECK_THROWS_AS(t1.choice_probability(BehavioralType::Altruist, 1, 0, 1.2),
                  DomainError);
}

TEST_CASE("tremble validation") {
  CHECK_THROWS_AS(Tremble(0.5), DomainError);
  CHECK_THROWS_AS(Tremble(0.2), DomainError);
  CHECK_THROWS_AS(Tremble(1.0001), DomainError);
  CHECK(Tremble(0.9).beta == 0.9);
  CHECK(Tremble::noiseless().beta == 1.0);
}

TEST_CASE("draw_choice: noiseless limits and empirical frequency") {
  const TypePrescriptions t1 = table_for(Treatment::T1);
  const TypePrescriptions t3 = table_for(Treatment::T3);
  RngStream rng(12345);
  for (int i = 0; i < 50; ++i) {
    CHECK(t1.draw_choice(BehavioralType::Altruist, 4, 2, 1.0, rng) == 1);
    CHECK(t3.draw_choice(BehavioralType::Gm, 4, 2, 1.0, rng) == 0);
  }

  // law of large numbers vs choice_probability
  const TypePrescriptions t2 = table_for(Treatment::T2);
  const double expect = t2.choice_probability(BehavioralType::Gm, 2, 0, 0.8);
  long hits = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i)
    hits += t2.draw_choice(BehavioralType::Gm, 2, 0, 0.8, rng);
  CHECK(std::abs(static_cast<double>(hits) / draws - expect) < 0.01);
}
