#pragma once

#include <optional>
#include <utility>

#include "seqpgg/game.hpp"
#include "seqpgg/types.hpp"

namespace seqpgg {

struct EquilibriumSummary {
  double pure_threshold = 0.0;  // smallest r sustaining the pure full-contribution profile
  bool pure_exists = false;
  std::optional<std::pair<double, double>> mixed_region;  // open interval in r (window 1)
  std::optional<double> gamma;             // forgiveness probability, window 1 mixed regime
  std::optional<int> unravel_position;     // first position preferring defection, known order
};

/// Threshold on r for the contribute-unless-defection-observed profile to be
/// an equilibrium: r >= 2(1 + (m-1)/(n-m+1)).
double pure_threshold(int n, int m);

/// Expected payoff from defecting after a full-contribution sample of size m:
/// (r/n)(n+m-1)/2, from the uniform position belief over {m+1..n}.
double expected_defect_payoff_full_sample(int n, int m, double r);

/// Lower edge of the mixed-strategy region for window 1: 3 - 3/(n+1).
double mixed_region_lower(int n);

/// Forgiveness probability for window 1: the root gamma in (0,1] of
///   2/gamma - (n-1)(1-(1-gamma)^n) / (gamma n - 1 + (1-gamma)^n) = n/r.
/// Requires r in (3 - 3/(n+1), n]; at r = n the root is exactly 1.
/// The returned root satisfies the equation with residual below 1e-9.
double solve_gamma(int n, double r);

/// Under position certainty, the smallest position t in {2..n} with
/// (r/n)(t-1) > r-1, i.e. where defecting beats the r-1 from contributing.
/// Empty when no position strictly prefers defection (r >= n).
std::optional<int> unravel_position(int n, double r);

/// Equilibrium regime for a game configuration: pure threshold check for
/// windows >= 2, pure/mixed split for window 1, unraveling when the position
/// is known.
EquilibriumSummary classify_regime(const GameConfig& cfg);

}  // namespace seqpgg
