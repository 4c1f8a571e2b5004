#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqpgg/sfem.hpp"
#include "seqpgg/simulator.hpp"

namespace seqpgg {

/// One simulate-then-estimate configuration: a treatment and the true
/// parameters used to generate data.
struct McCell {
  Treatment treatment = Treatment::T1;
  double beta_true = 0.9;
  std::array<int, 4> counts{};  // population counts by kAllTypes order
};

struct McConfig {
  std::vector<McCell> grid;
  int replications = 100;
  std::uint64_t master_seed = 20230214;
  int restarts = 50;
  int threads = 0;  // 0 = hardware concurrency
  GameConfig game;  // defaults: n=4, r=3, 10 rounds
};

/// The default recovery grid: three treatments x three noise levels
/// (beta 0.60 / 0.75 / 0.90), populations 6/9/12/5 for T1 and T2 and the
/// merged 7/11/14 for T3.
McConfig default_mc_config();

/// Reads a recovery config from JSON; unknown keys are rejected. The game
/// block carries n, r, rounds and endowment; window and position flags follow
/// each cell's treatment.
McConfig load_mc_config(const std::string& path);

/// Aggregates for one grid cell across replications.
struct McCellReport {
  McCell cell;
  std::vector<BehavioralType> types;
  std::vector<double> true_values;  // beta then shares (incl. residual)
  std::vector<double> mean;
  std::vector<double> sd;  // (N-1) divisor
  int replications = 0;
  int failures = 0;                      // fits excluded, never silently dropped
  std::vector<int> top_type_histogram;   // which type got the largest share, per rep
};

struct McReport {
  McConfig config;
  std::vector<McCellReport> cells;
};

/// Runs the recovery study: per cell and replication, simulate a session and
/// fit it; aggregate means and standard deviations. Replications are
/// parallel, each owning a seed derived from (master_seed, cell, rep), so
/// results are independent of thread count and of the replication total.
McReport run_mc(const McConfig& config);

/// Writes one CSV and one aligned-text table per noise level (rows True /
/// Mean / s.d. per treatment) plus a machine-readable JSON summary.
/// Returns the paths written.
std::vector<std::string> format_tables(const McReport& report, const std::string& out_dir);

}  // namespace seqpgg
