#include "seqpgg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parallel_util.hpp"
#include "seqpgg/rng.hpp"

namespace seqpgg {

namespace {
enum : std::uint64_t { kTagRep = 21, kTagFit = 22 };

struct RepResult {
  std::vector<double> params;  // beta then full shares
  int top_type = -1;
  bool failed = false;
};

std::string noise_tag(double beta) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", static_cast<int>(std::lround(beta * 100)));
  return buf;
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

McConfig default_mc_config() {
  McConfig cfg;
  cfg.game = GameConfig{};  // n=4, r=3, 10 rounds, 10 tokens
  const std::array<int, 4> pop12{6, 9, 12, 5};
  const std::array<int, 4> pop3{7, 11, 14, 0};  // free riders folded into gm
  for (double beta : {0.60, 0.75, 0.90}) {
    cfg.grid.push_back({Treatment::T1, beta, pop12});
    cfg.grid.push_back({Treatment::T2, beta, pop12});
    cfg.grid.push_back({Treatment::T3, beta, pop3});
  }
  return cfg;
}

McConfig load_mc_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mc config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad mc config JSON: ") + e.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "replications" && k != "master_seed" && k != "restarts" && k != "threads" &&
        k != "game" && k != "grid" && k != "version")
      throw ConfigError("unknown key '" + k + "' in mc config");
  }
  McConfig cfg;
  cfg.replications = j.value("replications", cfg.replications);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("game")) {
    const auto& g = j["game"];
    for (auto it = g.begin(); it != g.end(); ++it) {
      const std::string& k = it.key();
      if (k != "n" && k != "r" && k != "rounds" && k != "endowment")
        throw ConfigError("unknown key '" + k + "' in mc config game block");
    }
    cfg.game.n = g.value("n", cfg.game.n);
    cfg.game.r = g.value("r", cfg.game.r);
    cfg.game.rounds = g.value("rounds", cfg.game.rounds);
    cfg.game.endowment = g.value("endowment", cfg.game.endowment);
  }
  if (j.contains("grid")) {
    cfg.grid.clear();
    for (const auto& jc : j["grid"]) {
      for (auto it = jc.begin(); it != jc.end(); ++it) {
        const std::string& k = it.key();
        if (k != "treatment" && k != "beta_true" && k != "counts")
          throw ConfigError("unknown key '" + k + "' in mc config grid cell");
      }
      McCell cell;
      cell.treatment = parse_treatment(jc.at("treatment").get<std::string>());
      cell.beta_true = jc.at("beta_true").get<double>();
      const auto counts = jc.at("counts").get<std::vector<int>>();
      if (counts.size() != 4)
        throw ConfigError("grid cell counts must list four values (gm,alt,coop,free)");
      std::copy(counts.begin(), counts.end(), cell.counts.begin());
      cfg.grid.push_back(cell);
    }
  }
  return cfg;
}

McReport run_mc(const McConfig& config) {
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  const int cells = static_cast<int>(config.grid.size());
  const int reps = config.replications;

  std::vector<std::vector<RepResult>> results(cells, std::vector<RepResult>(reps));

  // One flat task per (cell, replication). Seeds derive from the cell's
  // content, not its grid index, so a cell's replications can be re-run in
  // isolation and always reproduce.
  detail::parallel_for(cells * reps, config.threads, [&](int task) {
    const int c = task / reps;
    const int j = task % reps;
    const McCell& cell = config.grid[c];

    const std::uint64_t rep_seed = derive_seed(
        config.master_seed, kTagRep, static_cast<std::uint64_t>(cell.treatment),
        static_cast<std::uint64_t>(std::llround(cell.beta_true * 1000.0)),
        static_cast<std::uint64_t>(j));

    GameConfig game = config.game;
    game.m = sample_window(cell.treatment);
    game.position_known = position_is_known(cell.treatment);

    PopulationSpec spec;
    spec.treatment = cell.treatment;
    spec.counts = cell.counts;
    spec.beta = cell.beta_true;
    spec.seed = rep_seed;

    const SessionDataset data = simulate_session(spec, game);

    SfemOptions options;
    options.restarts = config.restarts;
    options.seed = derive_seed(rep_seed, kTagFit);
    options.threads = 1;  // parallelism lives at the replication level

    RepResult& slot = results[c][j];
    try {
      const SfemEstimate est = fit(data, options, config.game);
      const TreatmentEstimate& te = est.treatments.front();
      slot.params.push_back(te.beta);
      slot.params.insert(slot.params.end(), te.pi.begin(), te.pi.end());
      slot.top_type = static_cast<int>(
          std::max_element(te.pi.begin(), te.pi.end()) - te.pi.begin());
    } catch (const OptimizationError&) {
      slot.failed = true;
    }
  });

  McReport report;
  report.config = config;
  for (int c = 0; c < cells; ++c) {
    const McCell& cell = config.grid[c];
    McCellReport cr;
    cr.cell = cell;
    cr.types = candidate_types(cell.treatment);
    cr.replications = reps;

    const int total = cell.counts[0] + cell.counts[1] + cell.counts[2] + cell.counts[3];
    cr.true_values.push_back(cell.beta_true);
    for (std::size_t k = 0; k < cr.types.size(); ++k)
      cr.true_values.push_back(static_cast<double>(cell.counts[k]) / total);

    const std::size_t n_params = cr.true_values.size();
    cr.mean.assign(n_params, 0.0);
    cr.sd.assign(n_params, 0.0);
    cr.top_type_histogram.assign(cr.types.size(), 0);

    int used = 0;
    for (const RepResult& rr : results[c]) {
      if (rr.failed) {
        ++cr.failures;
        continue;
      }
      ++used;
      for (std::size_t p = 0; p < n_params; ++p) cr.mean[p] += rr.params[p];
      ++cr.top_type_histogram[rr.top_type];
    }
    if (used > 0)
      for (double& v : cr.mean) v /= used;
    if (used > 1) {
      for (const RepResult& rr : results[c]) {
        if (rr.failed) continue;
        for (std::size_t p = 0; p < n_params; ++p) {
          const double d = rr.params[p] - cr.mean[p];
          cr.sd[p] += d * d;
        }
      }
      for (double& v : cr.sd) v = std::sqrt(v / (used - 1));
    }
    report.cells.push_back(std::move(cr));
  }
  return report;
}

std::vector<std::string> format_tables(const McReport& report,
                                       const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  const char* header = "treatment,row,beta,pi_gm,pi_alt,pi_coop,pi_free\n";
  auto row_csv = [](std::ostream& os, const std::string& tr, const char* kind,
                    const std::vector<double>& v) {
    os << tr << ',' << kind;
    for (double x : v) os << ',' << fmt3(x);
    for (std::size_t k = v.size(); k < 5; ++k) os << ',';
    os << '\n';
  };
  auto row_txt = [](std::ostream& os, const std::string& head, const char* kind,
                    const std::vector<double>& v) {
    char lead[32];
    std::snprintf(lead, sizeof lead, "%-4s %-6s", head.c_str(), kind);
    os << lead;
    for (double x : v) os << "  " << fmt3(x);
    os << '\n';
  };

  // Group cells by noise level, preserving first-seen order.
  std::vector<double> levels;
  for (const auto& cr : report.cells)
    if (std::find(levels.begin(), levels.end(), cr.cell.beta_true) == levels.end())
      levels.push_back(cr.cell.beta_true);

  if (levels.empty()) {
    const std::string csv_path = (fs::path(out_dir) / "mc_table.csv").string();
    std::ofstream(csv_path) << header;
    written.push_back(csv_path);
  }

  for (double level : levels) {
    const std::string csv_path =
        (fs::path(out_dir) / ("mc_beta" + noise_tag(level) + ".csv")).string();
    const std::string txt_path =
        (fs::path(out_dir) / ("mc_beta" + noise_tag(level) + ".txt")).string();
    std::ofstream csv(csv_path);
    std::ofstream txt(txt_path);
    csv << header;
    txt << "Recovery at true beta = " << fmt3(level) << " ("
        << report.config.replications << " replications)\n";
    txt << "            beta   pi_gm  pi_alt pi_coop pi_free\n";
    for (const auto& cr : report.cells) {
      if (cr.cell.beta_true != level) continue;
      const std::string tr = to_string(cr.cell.treatment);
      row_csv(csv, tr, "true", cr.true_values);
      row_csv(csv, tr, "mean", cr.mean);
      row_csv(csv, tr, "sd", cr.sd);
      row_txt(txt, tr, "true", cr.true_values);
      row_txt(txt, "", "mean", cr.mean);
      row_txt(txt, "", "sd", cr.sd);
      if (cr.failures > 0) txt << "  excluded failed fits: " << cr.failures << '\n';
      txt << '\n';
    }
    written.push_back(csv_path);
    written.push_back(txt_path);
  }

  nlohmann::json summary;
  summary["version"] = 1;
  summary["master_seed"] = report.config.master_seed;
  summary["replications"] = report.config.replications;
  summary["restarts"] = report.config.restarts;
  summary["cells"] = nlohmann::json::array();
  for (const auto& cr : report.cells) {
    nlohmann::json jc;
    jc["treatment"] = to_string(cr.cell.treatment);
    jc["beta_true"] = cr.cell.beta_true;
    jc["counts"] = cr.cell.counts;
    nlohmann::json names = nlohmann::json::array();
    names.push_back("beta");
    for (BehavioralType k : cr.types) names.push_back("pi_" + type_label(k));
    jc["parameters"] = names;
    jc["true"] = cr.true_values;
    jc["mean"] = cr.mean;
    jc["sd"] = cr.sd;
    jc["failures"] = cr.failures;
    jc["top_type_histogram"] = cr.top_type_histogram;
    summary["cells"].push_back(jc);
  }
  const std::string json_path = (fs::path(out_dir) / "mc_summary.json").string();
  std::ofstream js(json_path);
  js << summary.dump(2) << '\n';
  written.push_back(json_path);
  return written;
}

}  // namespace seqpgg
