#pragma once

#include <map>
#include <span>
#include <vector>

#include "seqpgg/types.hpp"

namespace seqpgg {

/// Parameters of the sequential binary public goods game. Contributions are
/// unit-normalized internally; `endowment` only scales token payoffs.
struct GameConfig {
  int n = 4;                    // group size
  double r = 3.0;               // return from contributions, 1 < r < n
  int m = 2;                    // sample window: how many predecessors are observed
  bool position_known = false;  // whether subjects learn their sequence position
  int rounds = 10;
  double endowment = 10.0;  // tokens per round

  void validate() const;  // throws ConfigError
};

/// Standard design for a treatment: n=4, r=3, 10 tokens.
GameConfig game_config_for(Treatment t, int rounds = 10, int n = 4, double r = 3.0,
                           double endowment = 10.0);

/// Maps (m, position_known) back to the treatment label; throws ConfigError
/// for combinations outside the three supported designs.
Treatment treatment_for(const GameConfig& cfg);

/// What a player sees before moving: `observed` predecessors, of whom
/// `contributed` chose to contribute.
struct Sample {
  int observed = 0;
  int contributed = 0;
  bool operator==(const Sample&) const = default;
};

/// One strategy-method information set. `condition` is the number of
/// contributors in the observed sample (position 1's null sample is c0).
struct ConditionCell {
  Treatment treatment;
  int position;
  int condition;
  auto operator<=>(const ConditionCell&) const = default;
};

/// Conditional choices of the subject seated at one position: condition -> 0/1.
struct PositionResponses {
  int position = 0;
  std::map<int, int> by_condition;
};

/// Outcome of walking one group's sequence.
struct RealizedRound {
  std::vector<int> actions;     // per position, C=1 / D=0
  std::vector<int> conditions;  // per position, the condition that realized
  double group_contribution = 0.0;  // tokens
  std::vector<double> payoffs;      // tokens per position
};

/// Unit-normalized payoff from contributing given `g_others` other
/// contributors: (r/n)(g_others + 1) - 1.
double payoff_contribute(int g_others, const GameConfig& cfg);

/// Unit-normalized payoff from defecting: (r/n) g_others.
double payoff_defect(int g_others, const GameConfig& cfg);

/// Token payoffs for a full action profile: a defector keeps the endowment,
/// everyone receives (r/n) times the group contribution.
std::vector<double> token_payoffs(std::span<const int> actions, const GameConfig& cfg);

/// Sample observed at `position` given the realized prefix of play.
Sample sample_for(int position, std::span<const int> history, const GameConfig& cfg);

/// Largest reachable condition index at a position: min(window, position-1).
int max_condition(Treatment t, int position);

/// All strategy-method cells elicited from the subject at `position`,
/// ordered by condition.
std::vector<ConditionCell> enumerate_cells(Treatment t, int position, int n = 4);

/// Total cells per group-round: 9 for T1/T3, 7 for T2 (n=4).
int cells_per_group_round(Treatment t, int n = 4);

/// Replays a group's conditional responses along the sequence: each realized
/// action is the stated choice for the condition that actually occurred.
/// `responses` must hold positions 1..n in order.
RealizedRound resolve_round(std::span<const PositionResponses> responses,
                            const GameConfig& cfg, Treatment t);

}  // namespace seqpgg
