// seqpgg: simulate sequential public-goods sessions with position
// uncertainty, estimate behavioral-type mixtures from strategy-method panels,
// and reproduce the equilibrium objects and test battery around them.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqpgg/dataset_io.hpp"
#include "seqpgg/equilibrium.hpp"
#include "seqpgg/montecarlo.hpp"
#include "seqpgg/report.hpp"
#include "seqpgg/sfem.hpp"
#include "seqpgg/simulator.hpp"
#include "seqpgg/stats.hpp"

namespace {

using namespace seqpgg;

void print_test_result(const TestResult& res) {
  std::printf("method:    %s\n", res.method.c_str());
  std::printf("inputs:    %s\n", res.inputs.c_str());
  std::printf("statistic: %.6f\n", res.statistic);
  std::printf("p_value:   %.6f\n", res.p_value);
  if (res.interval)
    std::printf("interval:  (%.6f, %.6f)\n", res.interval->first, res.interval->second);
  if (!res.warning.empty()) std::printf("warning:   %s\n", res.warning.c_str());
}

void print_equilibrium(const GameConfig& cfg) {
  const EquilibriumSummary s = classify_regime(cfg);
  std::printf("n=%d  m=%d  r=%g  position=%s\n", cfg.n, cfg.m, cfg.r,
              cfg.position_known ? "known" : "unknown");
  std::printf("pure_threshold: %.6f (r %s threshold)\n", s.pure_threshold,
              cfg.r >= s.pure_threshold ? ">=" : "<");
  if (s.mixed_region)
    std::printf("mixed_region:   r in (%.6f, %g)\n", s.mixed_region->first,
                s.mixed_region->second);
  if (cfg.position_known) {
    std::printf("regime:         unravels (position certainty, r < n)\n");
    if (s.unravel_position)
      std::printf("unravel_position: %d\n", *s.unravel_position);
  } else if (s.gamma) {
    std::printf("regime:         mixed\n");
    std::printf("gamma:          %.6f\n", *s.gamma);
  } else {
    std::printf("regime:         %s\n",
                s.pure_exists ? "pure full-contribution equilibrium exists"
                              : "no full-contribution equilibrium");
  }
}

void print_estimate(const SfemEstimate& est) {
  std::printf("%-10s %-6s %9s %9s %9s %9s %9s\n", "parameter", "", "estimate", "s.e.",
              "p-value", "lower", "upper");
  for (const TreatmentEstimate& te : est.treatments) {
    auto line = [&](const std::string& name, const ParamInference& inf) {
      if (inf.se_valid)
        std::printf("%-10s %-6s %9.3f %9.3f %9.3f %9.3f %9.3f%s\n", name.c_str(),
                    to_string(te.treatment).c_str(), inf.estimate, inf.se, inf.p_value,
                    inf.lower, inf.upper, inf.residual ? "  (residual)" : "");
      else
        std::printf("%-10s %-6s %9.3f %9s%s\n", name.c_str(),
                    to_string(te.treatment).c_str(), inf.estimate, "n/a",
                    inf.residual ? "  (residual)" : "");
    };
    line("beta", te.beta_inference);
    for (std::size_t k = 0; k < te.types.size(); ++k)
      line("pi_" + type_label(te.types[k]), te.pi_inference[k]);
    if (te.boundary)
      std::printf("  note: %s solution at a constraint boundary\n",
                  to_string(te.treatment).c_str());
  }
  std::printf("log_likelihood: %.6f\n", est.log_likelihood);
  std::printf("n_obs: %ld   free parameters: %d\n", est.n_obs, est.n_free_parameters);
}

std::array<int, 4> parse_freqs(const std::string& freqs) {
  std::array<int, 4> out{};
  int n = -1;
  if (std::sscanf(freqs.c_str(), "%d,%d,%d,%d%n", &out[0], &out[1], &out[2], &out[3],
                  &n) != 4 ||
      n != static_cast<int>(freqs.size()))
    throw ConfigError("--freqs wants four comma-separated counts (gm,alt,coop,free), got '" +
                      freqs + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential public-goods game toolkit: simulation, mixture estimation, "
               "equilibrium objects and hypothesis tests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "seqpgg 0.1.0");

  // --- equilibrium ---------------------------------------------------------
  auto* eq = app.add_subcommand("equilibrium", "equilibrium objects for a game design");
  int eq_n = 4, eq_m = 2;
  double eq_r = 3.0;
  bool eq_known = false;
  eq->add_option("--n", eq_n, "group size");
  eq->add_option("--m", eq_m, "sample window");
  eq->add_option("--r", eq_r, "return from contributions");
  eq->add_flag("--position-known", eq_known, "players are told their position");

  // --- simulate ------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "generate a synthetic session dataset");
  std::string sim_treatment = "T1", sim_freqs = "6,9,12,5", sim_out, sim_config;
  double sim_beta = 0.9, sim_r = 3.0, sim_endow = 10.0;
  int sim_rounds = 10, sim_sessions = 1, sim_n = 4;
  std::uint64_t sim_seed = 1;
  sim->add_option("--config", sim_config, "run config JSON (overrides other flags)");
  sim->add_option("--treatment", sim_treatment, "T1, T2 or T3");
  sim->add_option("--freqs", sim_freqs, "type counts gm,alt,coop,free");
  sim->add_option("--beta", sim_beta, "tremble: P(play prescribed action), (0.5, 1]");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--rounds", sim_rounds, "rounds per session");
  sim->add_option("--sessions", sim_sessions, "independent sessions to concatenate");
  sim->add_option("--n", sim_n, "group size");
  sim->add_option("--r", sim_r, "return from contributions");
  sim->add_option("--endowment", sim_endow, "tokens per round");
  sim->add_option("--out", sim_out, "output CSV path (default dataset.csv in out dir)");

  // --- estimate --------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("estimate", "fit the type mixture to a dataset");
  std::string fit_data, fit_out;
  int fit_restarts = 50, fit_threads = 0, fit_n = 4;
  double fit_r = 3.0;
  std::uint64_t fit_seed = 1;
  fit_cmd->add_option("--data", fit_data, "dataset CSV")->required();
  fit_cmd->add_option("--restarts", fit_restarts, "optimizer restarts");
  fit_cmd->add_option("--seed", fit_seed, "seed for restart initialization");
  fit_cmd->add_option("--threads", fit_threads, "parallel restarts (0 = all cores)");
  fit_cmd->add_option("--n", fit_n, "group size");
  fit_cmd->add_option("--r", fit_r, "return from contributions");
  fit_cmd->add_option("--out", fit_out, "estimate JSON path");

  // --- mc --------------------------------------------------------------------
  auto* mc = app.add_subcommand("mc", "simulate-then-estimate recovery study");
  std::string mc_config, mc_out_dir;
  int mc_reps = -1, mc_restarts = -1, mc_threads = 0;
  std::uint64_t mc_seed = 0;
  bool mc_seed_set = false;
  mc->add_option("--config", mc_config, "recovery config JSON (default: built-in grid)");
  mc->add_option("--replications", mc_reps, "replications per grid cell");
  mc->add_option("--restarts", mc_restarts, "optimizer restarts per fit");
  mc->add_option("--seed", mc_seed, "master seed")->each([&](const std::string&) {
    mc_seed_set = true;
  });
  mc->add_option("--threads", mc_threads, "worker threads (0 = all cores)");
  mc->add_option("--out-dir", mc_out_dir, "directory for tables and summary");

  // --- stats -----------------------------------------------------------------
  auto* st = app.add_subcommand("stats", "hypothesis tests");
  st->require_subcommand(1);

  auto* st_binom = st->add_subcommand("binomial", "two-sided exact binomial test");
  int b_k = 0, b_n = 0;
  double b_p0 = 0.5;
  st_binom->add_option("--k", b_k, "successes")->required();
  st_binom->add_option("--n", b_n, "trials")->required();
  st_binom->add_option("--p0", b_p0, "null proportion")->required();

  auto* st_hpd = st->add_subcommand("hpd", "highest posterior density interval, beta posterior");
  double h_s = 0, h_f = 0, h_a = 1.0, h_b = 1.0, h_mass = 0.95;
  st_hpd->add_option("--successes", h_s)->required();
  st_hpd->add_option("--failures", h_f)->required();
  st_hpd->add_option("--prior-a", h_a, "beta prior shape a");
  st_hpd->add_option("--prior-b", h_b, "beta prior shape b");
  st_hpd->add_option("--mass", h_mass, "posterior mass");

  auto* st_mcn = st->add_subcommand("mcnemar", "paired proportions, discordant counts");
  int m_b = 0, m_c = 0;
  st_mcn->add_option("--b", m_b)->required();
  st_mcn->add_option("--c", m_c)->required();

  auto* st_chi = st->add_subcommand("chisq", "2x2 chi-square independence test");
  long c_a = 0, c_b = 0, c_c = 0, c_d = 0;
  bool c_yates = false;
  st_chi->add_option("--a", c_a, "row1 successes")->required();
  st_chi->add_option("--b", c_b, "row1 failures")->required();
  st_chi->add_option("--c", c_c, "row2 successes")->required();
  st_chi->add_option("--d", c_d, "row2 failures")->required();
  st_chi->add_flag("--yates", c_yates, "continuity correction");

  auto* st_z = st->add_subcommand("ztest", "two-proportion z-test (pooled)");
  int z_s1 = 0, z_n1 = 0, z_s2 = 0, z_n2 = 0;
  st_z->add_option("--s1", z_s1)->required();
  st_z->add_option("--n1", z_n1)->required();
  st_z->add_option("--s2", z_s2)->required();
  st_z->add_option("--n2", z_n2)->required();

  // --- report ----------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "contribution curves (CSV + SVG)");
  std::string rep_data, rep_out_dir;
  int rep_n = 4;
  double rep_endow = 10.0, rep_r = 3.0;
  rep->add_option("--data", rep_data, "dataset CSV")->required();
  rep->add_option("--out-dir", rep_out_dir, "output directory");
  rep->add_option("--n", rep_n, "group size");
  rep->add_option("--r", rep_r, "return from contributions");
  rep->add_option("--endowment", rep_endow, "tokens per round");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*eq) {
      GameConfig cfg;
      cfg.n = eq_n;
      cfg.m = eq_m;
      cfg.r = eq_r;
      cfg.position_known = eq_known;
      cfg.validate();
      print_equilibrium(cfg);
      return 0;
    }

    if (*sim) {
      RunConfig rc;
      if (!sim_config.empty()) {
        rc = load_run_config(sim_config);
      } else {
        const Treatment t = parse_treatment(sim_treatment);
        rc.game = game_config_for(t, sim_rounds, sim_n, sim_r, sim_endow);
        rc.population = parse_freqs(sim_freqs);
        rc.beta = sim_beta;
        rc.seed = sim_seed;
        rc.sessions = sim_sessions;
      }
      if (!sim_out.empty()) rc.dataset_out = sim_out;
      PopulationSpec spec;
      spec.treatment = treatment_for(rc.game);
      spec.counts = rc.population;
      spec.beta = rc.beta;
      spec.seed = rc.seed;
      const SessionDataset data = simulate_sessions(spec, rc.game, rc.sessions);
      std::filesystem::path out_path(rc.dataset_out);
      if (out_path.is_relative() && sim_out.empty() && sim_config.empty())
        out_path = std::filesystem::path(default_out_dir()) / out_path;
      write_dataset_csv(data, out_path.string());
      std::printf("wrote %ld rows (%s) to %s\n", data.cell_count(),
                  to_string(spec.treatment).c_str(), out_path.string().c_str());
      return 0;
    }

    if (*fit_cmd) {
      const SessionDataset data = ingest(fit_data);
      GameConfig cfg;
      cfg.n = fit_n;
      cfg.r = fit_r;
      SfemOptions options;
      options.restarts = fit_restarts;
      options.seed = fit_seed;
      options.threads = fit_threads;
      const SfemEstimate est = fit(data, options, cfg);
      print_estimate(est);
      if (!fit_out.empty()) {
        write_estimate_json(est, cfg, fit_out);
        std::printf("wrote %s\n", fit_out.c_str());
      }
      return 0;
    }

    if (*mc) {
      McConfig cfg = mc_config.empty() ? default_mc_config() : load_mc_config(mc_config);
      if (mc_reps > 0) cfg.replications = mc_reps;
      if (mc_restarts > 0) cfg.restarts = mc_restarts;
      if (mc_seed_set) cfg.master_seed = mc_seed;
      cfg.threads = mc_threads;
      const std::string out_dir = mc_out_dir.empty() ? default_out_dir() : mc_out_dir;
      const McReport report = run_mc(cfg);
      for (const std::string& path : format_tables(report, out_dir))
        std::printf("wrote %s\n", path.c_str());
      int failures = 0;
      for (const auto& cell : report.cells) failures += cell.failures;
      if (failures > 0) {
        std::fprintf(stderr, "warning: %d fits failed and were excluded\n", failures);
        return 1;
      }
      return 0;
    }

    if (*st_binom) {
      print_test_result(binomial_test(b_k, b_n, b_p0));
      return 0;
    }
    if (*st_hpd) {
      const HpdInterval hpd = beta_hpd(h_s, h_f, h_a, h_b, h_mass);
      std::printf("posterior: Beta(%.3f, %.3f)\n", h_a + h_s, h_b + h_f);
      std::printf("hpd:       (%.6f, %.6f)\n", hpd.lower, hpd.upper);
      if (hpd.equal_tail_fallback)
        std::printf("warning:   posterior not unimodal; equal-tail interval reported\n");
      return 0;
    }
    if (*st_mcn) {
      print_test_result(mcnemar_test(m_b, m_c));
      return 0;
    }
    if (*st_chi) {
      print_test_result(chisq_independence({{{c_a, c_b}, {c_c, c_d}}}, c_yates));
      return 0;
    }
    if (*st_z) {
      print_test_result(two_prop_ztest(z_s1, z_n1, z_s2, z_n2));
      return 0;
    }

    if (*rep) {
      const SessionDataset data = ingest(rep_data);
      GameConfig cfg;
      cfg.n = rep_n;
      cfg.r = rep_r;
      cfg.endowment = rep_endow;
      const std::string out_dir = rep_out_dir.empty() ? default_out_dir() : rep_out_dir;
      for (const std::string& path : report_contributions(data, cfg, out_dir))
        std::printf("wrote %s\n", path.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
