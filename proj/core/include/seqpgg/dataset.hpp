#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqpgg/types.hpp"

namespace seqpgg {

/// One elicited strategy-method decision. `realized` marks the single cell
/// per subject-round that occurred when play was resolved.
struct DecisionRow {
  Treatment treatment = Treatment::T1;
  int session_id = 0;
  int subject_id = 0;
  std::optional<BehavioralType> true_type;  // empty for real data
  int round = 0;    // 1-based
  int group_id = 0; // within (session, round)
  int position = 0; // 1-based within group
  int condition = 0;
  int choice = 0;   // contribute=1 / defect=0
  bool realized = false;

  bool operator==(const DecisionRow&) const = default;
};

struct SessionProvenance {
  std::uint64_t seed = 0;
  std::string config_digest;        // hex digest of (game, population, seed)
  std::vector<int> payment_rounds;  // one per session, no effect on analysis
};

/// Panel of elicited decisions, one row per subject x round x reachable cell.
struct SessionDataset {
  std::vector<DecisionRow> rows;
  SessionProvenance provenance;

  long cell_count() const { return static_cast<long>(rows.size()); }
  long cell_count(Treatment t) const;
  std::vector<Treatment> treatments_present() const;
  int subject_count() const;
};

}  // namespace seqpgg
