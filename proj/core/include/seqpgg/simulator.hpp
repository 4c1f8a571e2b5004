#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "seqpgg/dataset.hpp"
#include "seqpgg/game.hpp"
#include "seqpgg/rng.hpp"

namespace seqpgg {

/// Composition of one simulated session: subject counts per behavioral type
/// (indexed by the kAllTypes order gm, alt, coop, free), the tremble and the
/// master seed. In T3 gm and free-rider prescribe identical play, so free
/// riders must be folded into the gm count.
struct PopulationSpec {
  Treatment treatment = Treatment::T1;
  std::array<int, 4> counts{};  // by kAllTypes order
  double beta = 0.9;
  std::uint64_t seed = 0;

  int total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
  BehavioralType type_of(int subject_id) const;  // block assignment by counts
  void validate(const GameConfig& cfg) const;    // throws ConfigError
};

/// Uniformly random partition of subjects into groups of `group_size`;
/// within-group order is the position assignment.
std::vector<std::vector<int>> rematch(const std::vector<int>& subjects, int group_size,
                                      RngStream& rng);

/// Uniform draw of the round paid out for real (1-based). Recorded in
/// provenance only.
int select_payment_round(int rounds, RngStream& rng);

/// Simulates one session under the lab protocol: every round the pool is
/// re-matched and positions shuffled, each subject answers every reachable
/// cell for their position under the tremble, and play is resolved to mark
/// realized cells. Bit-for-bit reproducible from (seed, spec, cfg).
SessionDataset simulate_session(const PopulationSpec& spec, const GameConfig& cfg);

/// Concatenates `sessions` independent sessions (seeds derived from
/// spec.seed) with globally unique subject ids.
SessionDataset simulate_sessions(const PopulationSpec& spec, const GameConfig& cfg,
                                 int sessions);

/// Hex digest stamped into dataset provenance, identifying the generating
/// configuration.
std::string config_digest(const PopulationSpec& spec, const GameConfig& cfg,
                          int sessions);

}  // namespace seqpgg
