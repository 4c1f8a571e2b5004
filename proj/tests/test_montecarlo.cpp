#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqpgg/montecarlo.hpp"
#include "seqpgg/rng.hpp"

using namespace seqpgg;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

McConfig tiny_config() {
  McConfig cfg;
  cfg.grid = {{Treatment::T1, 0.9, {6, 9, 12, 5}}, {Treatment::T3, 0.9, {7, 11, 14, 0}}};
  cfg.replications = 3;
  cfg.master_seed = 99;
  cfg.restarts = 6;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("default grid covers three treatments at three noise levels") {
  const McConfig cfg = default_mc_config();
  CHECK(cfg.grid.size() == 9);
  CHECK(cfg.replications == 100);
  int t3_cells = 0;
  for (const McCell& cell : cfg.grid) {
    if (cell.treatment == Treatment::T3) {
      ++t3_cells;
      CHECK(cell.counts == std::array<int, 4>{7, 11, 14, 0});
    } else {
      CHECK(cell.counts == std::array<int, 4>{6, 9, 12, 5});
    }
  }
  CHECK(t3_cells == 3);
}

TEST_CASE("small recovery run: structure and aggregation") {
  const McReport report = run_mc(tiny_config());
  REQUIRE(report.cells.size() == 2);
  for (const McCellReport& cr : report.cells) {
    CHECK(cr.failures == 0);
    const std::size_t n_params = 1 + cr.types.size();
    CHECK(cr.mean.size() == n_params);
    CHECK(cr.sd.size() == n_params);
    CHECK(cr.true_values[0] == 0.9);
    for (double sd : cr.sd) CHECK(sd >= 0.0);
    // at beta = 0.9 even 3 replications recover within a wide band
    for (std::size_t p = 0; p < n_params; ++p)
      CHECK(std::abs(cr.mean[p] - cr.true_values[p]) < 0.1);
  }
}

TEST_CASE("replication seeds are isolated from the replication total") {
  McConfig one = tiny_config();
  one.grid.resize(1);
  one.replications = 1;
  McConfig two = one;
  two.replications = 2;

  const McReport r1 = run_mc(one);
  const McReport r2 = run_mc(two);
  // With two replications the raw estimates are mean -/+ sd/sqrt(2); the
  // single-replication run must reproduce one of them exactly (up to float
  // reconstruction error), i.e. replication 0 does not depend on the total.
  for (std::size_t p = 0; p < r1.cells[0].mean.size(); ++p) {
    const double x = r1.cells[0].mean[p];
    const double m = r2.cells[0].mean[p];
    const double s = r2.cells[0].sd[p];
    const double d = std::min(std::abs(x - (m - s / std::sqrt(2.0))),
                              std::abs(x - (m + s / std::sqrt(2.0))));
    CHECK(d < 1e-9);
  }

  // and the whole report is deterministic
  const McReport r2b = run_mc(two);
  CHECK(r2.cells[0].mean == r2b.cells[0].mean);
  CHECK(r2.cells[0].sd == r2b.cells[0].sd);
}

TEST_CASE("single replication: mean equals the estimate, sd is zero") {
  McConfig cfg = tiny_config();
  cfg.grid.resize(1);
  cfg.replications = 1;
  const McReport report = run_mc(cfg);
  for (double sd : report.cells[0].sd) CHECK(sd == 0.0);
}

TEST_CASE("sd uses the (N-1) divisor") {
  // two replications: sd = |x1 - x2| / sqrt(2)
  McConfig cfg = tiny_config();
  cfg.grid.resize(1);
  cfg.replications = 2;
  const McReport two = run_mc(cfg);

  // recover the two raw estimates: mean +/- sd/sqrt(2)
  for (std::size_t p = 0; p < two.cells[0].mean.size(); ++p) {
    const double m = two.cells[0].mean[p];
    const double s = two.cells[0].sd[p];
    const double x1 = m + s / std::sqrt(2.0);
    const double x2 = m - s / std::sqrt(2.0);
    CHECK(std::abs((x1 - x2) / std::sqrt(2.0) - s) < 1e-12);
  }
}

TEST_CASE("table files: layout, empty grid, byte-identical reruns") {
  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "seqpgg_mc_test").string();
  fs::remove_all(dir);

  SUBCASE("normal run") {
    const McReport report = run_mc(tiny_config());
    const auto paths = format_tables(report, dir);
    REQUIRE(paths.size() == 3);  // csv + txt for the single level, + summary json
    const std::string csv = slurp(paths[0]);
    CHECK(csv.find("treatment,row,beta,pi_gm,pi_alt,pi_coop,pi_free") == 0);
    CHECK(csv.find("T1,true,0.900,0.188,0.281,0.375,0.156") != std::string::npos);
    CHECK(csv.find("T3,true") != std::string::npos);
    CHECK(csv.find("T3,mean") != std::string::npos);

    const auto paths2 = format_tables(report, dir);
    CHECK(slurp(paths2[0]) == csv);
    CHECK(slurp(paths2[2]) == slurp(paths[2]));
  }

  SUBCASE("empty grid emits a header-only table") {
    McConfig cfg = tiny_config();
    cfg.grid.clear();
    const McReport report = run_mc(cfg);
    const auto paths = format_tables(report, dir);
    bool found_header_only = false;
    for (const auto& p : paths)
      if (slurp(p) == "treatment,row,beta,pi_gm,pi_alt,pi_coop,pi_free\n")
        found_header_only = true;
    CHECK(found_header_only);
  }
  fs::remove_all(dir);
}

TEST_CASE("mc config round-trips through JSON with strict keys") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "seqpgg_mc_cfg.json").string();
  {
    std::ofstream out(path);
    out << R"({"replications": 4, "master_seed": 11, "restarts": 7,
               "game": {"n": 4, "r": 3.0, "rounds": 10, "endowment": 10.0},
               "grid": [{"treatment": "T2", "beta_true": 0.75,
                         "counts": [6, 9, 12, 5]}]})";
  }
  const McConfig cfg = load_mc_config(path);
  CHECK(cfg.replications == 4);
  CHECK(cfg.master_seed == 11);
  CHECK(cfg.restarts == 7);
  REQUIRE(cfg.grid.size() == 1);
  CHECK(cfg.grid[0].treatment == Treatment::T2);
  CHECK(cfg.grid[0].beta_true == 0.75);

  {
    std::ofstream out(path);
    out << R"({"replications": 4, "bogus": 1})";
  }
  CHECK_THROWS_AS(load_mc_config(path), ConfigError);
  fs::remove(path);
}
