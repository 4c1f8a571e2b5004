#pragma once

#include <string>
#include <vector>

#include "seqpgg/dataset.hpp"
#include "seqpgg/game.hpp"

namespace seqpgg {

/// Per-round, per-condition contribution aggregate. `group_contribution`
/// rescales the contribution rate to tokens per group (max n * endowment),
/// with a 95% normal-approximation band.
struct ContributionPoint {
  Treatment treatment;
  int round = 0;
  int condition = 0;
  long n_decisions = 0;
  double rate = 0.0;
  double group_contribution = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

std::vector<ContributionPoint> contribution_summary(const SessionDataset& data,
                                                    const GameConfig& cfg);

/// Mean elicited contribution in tokens per decision (endowment * rate),
/// pooled over every cell of one treatment.
double mean_contribution_tokens(const SessionDataset& data, Treatment t,
                                const GameConfig& cfg);

/// Emits contributions.csv plus one SVG line chart per treatment
/// (contributions_T1.svg, ...) under out_dir. Returns the paths written.
std::vector<std::string> report_contributions(const SessionDataset& data,
                                              const GameConfig& cfg,
                                              const std::string& out_dir);

}  // namespace seqpgg
