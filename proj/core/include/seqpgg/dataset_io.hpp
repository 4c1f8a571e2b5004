#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "seqpgg/dataset.hpp"
#include "seqpgg/game.hpp"
#include "seqpgg/sfem.hpp"
#include "seqpgg/simulator.hpp"

namespace seqpgg {

inline constexpr const char* kDatasetHeader =
    "treatment,session_id,subject_id,true_type,round,group_id,position,condition,"
    "choice,realized";

/// Writes the dataset CSV: provenance comment lines, the exact header above,
/// one row per decision. Output is byte-stable for a given dataset.
void write_dataset_csv(const SessionDataset& data, std::ostream& out);
void write_dataset_csv(const SessionDataset& data, const std::string& path);

/// Reads and validates a dataset CSV. Schema violations report the line
/// number; integrity violations (unreachable cells, broken group structure,
/// missing or duplicated realized rows) list the offending rows.
SessionDataset ingest(std::istream& in);
SessionDataset ingest(const std::string& path);

/// JSON run configuration (simulate + estimate settings). Unknown keys are
/// rejected; load(save(x)) == x.
struct RunConfig {
  GameConfig game;
  std::array<int, 4> population{};  // gm, alt, coop, free
  double beta = 0.9;
  std::uint64_t seed = 1;
  int sessions = 1;
  int restarts = 50;
  std::string dataset_out = "dataset.csv";
  std::string estimate_out = "estimate.json";

  bool operator==(const RunConfig&) const = default;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

/// Estimate serialization with all diagnostics.
void write_estimate_json(const SfemEstimate& estimate, const GameConfig& cfg,
                         const std::string& path);
std::string estimate_to_json(const SfemEstimate& estimate, const GameConfig& cfg);

/// Directory used when an output path is not given: $SEQPGG_OUT_DIR or ".".
std::string default_out_dir();

}  // namespace seqpgg
