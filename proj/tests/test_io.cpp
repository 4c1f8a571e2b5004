#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seqpgg/dataset_io.hpp"
#include "seqpgg/report.hpp"
#include "seqpgg/simulator.hpp"

using namespace seqpgg;

namespace {

SessionDataset simulate(Treatment t, double beta, std::uint64_t seed, int sessions = 1) {
  PopulationSpec spec;
  spec.treatment = t;
  spec.counts = t == Treatment::T3 ? std::array<int, 4>{7, 11, 14, 0}
                                   : std::array<int, 4>{6, 9, 12, 5};
  spec.beta = beta;
  spec.seed = seed;
  return simulate_sessions(spec, game_config_for(t), sessions);
}

std::string to_csv(const SessionDataset& data) {
  std::ostringstream os;
  write_dataset_csv(data, os);
  return os.str();
}

}  // namespace

TEST_CASE("export then ingest is the identity") {
  for (Treatment t : kAllTreatments) {
    const SessionDataset data = simulate(t, 0.8, 42);
    std::istringstream in(to_csv(data));
    const SessionDataset back = ingest(in);
    CHECK(back.rows == data.rows);
    CHECK(back.provenance.seed == data.provenance.seed);
    CHECK(back.provenance.config_digest == data.provenance.config_digest);
    CHECK(back.provenance.payment_rounds == data.provenance.payment_rounds);
    CHECK(to_csv(back) == to_csv(data));
  }
}

TEST_CASE("ingest validates the schema with line numbers") {
  const SessionDataset data = simulate(Treatment::T2, 0.9, 1);
  CHECK(data.cell_count() == 560);

  SUBCASE("accepts a valid T2 file") {
    std::istringstream in(to_csv(data));
    CHECK(ingest(in).cell_count() == 560);
  }
  SUBCASE("header mismatch") {
    std::string csv = to_csv(data);
    const auto pos = csv.find("treatment,");
    csv.replace(pos, 10, "treatment;");
    std::istringstream in(csv);
    CHECK_THROWS_AS(ingest(in), SchemaError);
  }
  SUBCASE("wrong field count reports the line") {
    std::string csv = to_csv(data);
    csv += "T2,0,1,alt,1,0,2\n";
    std::istringstream in(csv);
    CHECK_THROWS_WITH_AS(ingest(in), doctest::Contains("expected 10 fields"),
                         SchemaError);
  }
  SUBCASE("bad condition token") {
    std::string csv = to_csv(data);
    const auto pos = csv.find(",c1,");
    csv.replace(pos, 4, ",x1,");
    std::istringstream in(csv);
    CHECK_THROWS_AS(ingest(in), SchemaError);
  }
  SUBCASE("unknown type label") {
    std::string csv = to_csv(data);
    const auto pos = csv.find(",coop,");
    csv.replace(pos, 6, ",spam,");
    std::istringstream in(csv);
    CHECK_THROWS_AS(ingest(in), SchemaError);
  }
}

TEST_CASE("ingest enforces dataset integrity") {
  SUBCASE("unreachable cell: c2 in a window-1 treatment") {
    const SessionDataset data = simulate(Treatment::T2, 0.9, 2);
    std::string csv = to_csv(data);
    // subject at position 3 answers c2, impossible with a window of one
    csv += "T2,0,0,gm,1,0,3,c2,1,0\n";
    std::istringstream in(csv);
    CHECK_THROWS_WITH_AS(ingest(in), doctest::Contains("unreachable"),
                         DataIntegrityError);
  }
  SUBCASE("duplicated realized row") {
    SessionDataset data = simulate(Treatment::T1, 0.9, 3);
    for (DecisionRow& r : data.rows)
      if (r.subject_id == 5 && r.round == 2) r.realized = true;
    std::istringstream in(to_csv(data));
    CHECK_THROWS_AS(ingest(in), DataIntegrityError);
  }
  SUBCASE("missing cell for a position") {
    SessionDataset data = simulate(Treatment::T1, 0.9, 4);
    auto it = std::find_if(data.rows.begin(), data.rows.end(), [](const DecisionRow& r) {
      return r.position == 4 && r.condition == 1 && !r.realized;
    });
    REQUIRE(it != data.rows.end());
    data.rows.erase(it);
    std::istringstream in(to_csv(data));
    CHECK_THROWS_AS(ingest(in), DataIntegrityError);
  }
  SUBCASE("broken group structure") {
    SessionDataset data = simulate(Treatment::T1, 0.9, 5);
    for (DecisionRow& r : data.rows)
      if (r.round == 3 && r.group_id == 2) r.position = 2;
    std::istringstream in(to_csv(data));
    CHECK_THROWS_AS(ingest(in), DataIntegrityError);
  }
}

TEST_CASE("run config JSON round-trip and strict keys") {
  RunConfig cfg;
  cfg.game = game_config_for(Treatment::T2, 12);
  cfg.population = {4, 4, 4, 4};
  cfg.beta = 0.77;
  cfg.seed = 123456789;
  cfg.sessions = 2;
  cfg.restarts = 9;
  cfg.dataset_out = "x.csv";
  cfg.estimate_out = "y.json";
  CHECK(run_config_from_json(run_config_to_json(cfg)) == cfg);

  CHECK_THROWS_AS(run_config_from_json(R"({"beta": 0.9, "unknown_key": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"game": {"n": 4, "flavor": "salt"}})"),
                  ConfigError);
  CHECK_THROWS_AS(run_config_from_json("not json"), ConfigError);
}

TEST_CASE("estimate JSON carries diagnostics") {
  const SessionDataset data = simulate(Treatment::T3, 0.9, 6);
  SfemOptions options;
  options.restarts = 8;
  options.seed = 1;
  options.threads = 2;
  const SfemEstimate est = fit(data, options);
  const std::string js = estimate_to_json(est, GameConfig{});
  CHECK(js.find("\"treatment\": \"T3\"") != std::string::npos);
  CHECK(js.find("\"restarts\": 8") != std::string::npos);
  CHECK(js.find("\"gamma\"") != std::string::npos);
  CHECK(js.find("\"residual\": true") != std::string::npos);
}

TEST_CASE("contribution summary and reports") {
  SUBCASE("noiseless altruists sit at the 40-token ceiling") {
    PopulationSpec spec;
    spec.treatment = Treatment::T1;
    spec.counts = {0, 32, 0, 0};
    spec.beta = 1.0;
    spec.seed = 9;
    const GameConfig cfg = game_config_for(Treatment::T1);
    const SessionDataset data = simulate_session(spec, cfg);
    for (const ContributionPoint& p : contribution_summary(data, cfg)) {
      CHECK(p.group_contribution == 40.0);
      CHECK(p.ci_upper == 40.0);
    }
  }
  SUBCASE("noiseless gm under position certainty sits at zero") {
    PopulationSpec spec;
    spec.treatment = Treatment::T3;
    spec.counts = {32, 0, 0, 0};
    spec.beta = 1.0;
    spec.seed = 9;
    const GameConfig cfg = game_config_for(Treatment::T3);
    const SessionDataset data = simulate_session(spec, cfg);
    for (const ContributionPoint& p : contribution_summary(data, cfg))
      CHECK(p.group_contribution == 0.0);
  }
  SUBCASE("a large window-1 run at the estimated mixture averages ~7.2 tokens") {
    // population shares rounded to 32 subjects from the fitted mixture
    // (gm .258, alt .406, coop .242, free .094), tremble 0.893
    PopulationSpec spec;
    spec.treatment = Treatment::T2;
    spec.counts = {8, 13, 8, 3};
    spec.beta = 0.893;
    spec.seed = 77;
    const GameConfig cfg = game_config_for(Treatment::T2);
    const SessionDataset data = simulate_sessions(spec, cfg, 20);
    CHECK(std::abs(mean_contribution_tokens(data, Treatment::T2, cfg) - 7.2) < 0.5);
  }
  SUBCASE("report files are written and reproducible") {
    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "seqpgg_report_test").string();
    fs::remove_all(dir);
    const SessionDataset data = simulate(Treatment::T1, 0.8, 10);
    const GameConfig cfg = game_config_for(Treatment::T1);
    const auto paths = report_contributions(data, cfg, dir);
    REQUIRE(paths.size() == 2);  // contributions.csv + one SVG
    std::ifstream csv(paths[0]);
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "treatment,round,condition,n_decisions,contribution_rate,"
          "group_contribution,ci_lower,ci_upper");
    std::stringstream first, second;
    first << csv.rdbuf();
    report_contributions(data, cfg, dir);
    std::ifstream csv2(paths[0]);
    std::getline(csv2, header);
    second << csv2.rdbuf();
    CHECK(first.str() == second.str());
    std::ifstream svg(paths[1]);
    std::stringstream svg_text;
    svg_text << svg.rdbuf();
    CHECK(svg_text.str().find("<svg") != std::string::npos);
    CHECK(svg_text.str().find("polyline") != std::string::npos);
    fs::remove_all(dir);
  }
  SUBCASE("empty dataset is rejected") {
    SessionDataset empty;
    CHECK_THROWS_AS(contribution_summary(empty, GameConfig{}), DataIntegrityError);
  }
}
