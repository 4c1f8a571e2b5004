#include "seqpgg/dataset_io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqpgg/equilibrium.hpp"

namespace seqpgg {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

int parse_int(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError("line " + std::to_string(line_no) + ": bad " + what + " '" + s +
                      "'");
  }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

}  // namespace

void write_dataset_csv(const SessionDataset& data, std::ostream& out) {
  out << "# seqpgg dataset v1\n";
  out << "# seed=" << data.provenance.seed << "\n";
  if (!data.provenance.config_digest.empty())
    out << "# config=" << data.provenance.config_digest << "\n";
  if (!data.provenance.payment_rounds.empty()) {
    out << "# payment_rounds=";
    for (std::size_t i = 0; i < data.provenance.payment_rounds.size(); ++i)
      out << (i ? "," : "") << data.provenance.payment_rounds[i];
    out << "\n";
  }
  out << kDatasetHeader << "\n";
  for (const DecisionRow& r : data.rows) {
    out << to_string(r.treatment) << ',' << r.session_id << ',' << r.subject_id << ','
        << (r.true_type ? type_label(*r.true_type) : "") << ',' << r.round << ','
        << r.group_id << ',' << r.position << ",c" << r.condition << ',' << r.choice
        << ',' << (r.realized ? 1 : 0) << '\n';
  }
}

void write_dataset_csv(const SessionDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  write_dataset_csv(data, out);
}

namespace {

// Structural checks beyond row-level syntax: group sizes and positions,
// reachable cells, exactly the elicited cell set per subject-round, one
// realized cell per subject-round, consistent type labels.
void validate_dataset(const SessionDataset& data) {
  std::vector<std::string> problems;
  auto flag = [&](const std::string& p) {
    if (problems.size() < 20) problems.push_back(p);
  };

  // (treatment, session, round, group) -> position -> subject
  std::map<std::tuple<Treatment, int, int, int>, std::map<int, std::set<int>>> groups;
  // (treatment, session, subject, round) -> cells seen / realized count / position
  struct SubjectRound {
    std::set<int> conditions;
    int realized = 0;
    std::set<int> positions;
    std::set<int> groups;
  };
  std::map<std::tuple<Treatment, int, int, int>, SubjectRound> subject_rounds;
  std::map<int, std::set<std::string>> type_labels;

  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const DecisionRow& r = data.rows[i];
    const std::string at = "row " + std::to_string(i + 1) + ": ";
    if (r.round < 1) flag(at + "round must be >= 1");
    if (r.position < 1) flag(at + "position must be >= 1");
    if (r.choice != 0 && r.choice != 1) flag(at + "choice must be 0/1");
    const int max_k = max_condition(r.treatment, r.position);
    if (r.condition < 0 || r.condition > max_k)
      flag(at + "condition c" + std::to_string(r.condition) + " unreachable at position " +
           std::to_string(r.position) + " in " + to_string(r.treatment));

    groups[{r.treatment, r.session_id, r.round, r.group_id}][r.position].insert(
        r.subject_id);
    auto& sr = subject_rounds[{r.treatment, r.session_id, r.subject_id, r.round}];
    if (!sr.conditions.insert(r.condition).second)
      flag(at + "duplicate cell c" + std::to_string(r.condition) + " for subject " +
           std::to_string(r.subject_id) + " round " + std::to_string(r.round));
    sr.realized += r.realized ? 1 : 0;
    sr.positions.insert(r.position);
    sr.groups.insert(r.group_id);
    type_labels[r.subject_id].insert(r.true_type ? type_label(*r.true_type) : "");
  }

  for (const auto& [key, by_pos] : groups) {
    const int n = static_cast<int>(by_pos.size());
    std::set<int> members;
    for (const auto& [pos, subjects] : by_pos) {
      if (subjects.size() != 1)
        flag("group " + std::to_string(std::get<3>(key)) + " round " +
             std::to_string(std::get<2>(key)) + ": position " + std::to_string(pos) +
             " held by " + std::to_string(subjects.size()) + " subjects");
      members.insert(subjects.begin(), subjects.end());
    }
    if (by_pos.begin()->first != 1 || by_pos.rbegin()->first != n)
      flag("group " + std::to_string(std::get<3>(key)) + " round " +
           std::to_string(std::get<2>(key)) + ": positions are not 1.." +
           std::to_string(n));
    if (static_cast<int>(members.size()) != n)
      flag("group " + std::to_string(std::get<3>(key)) + " round " +
           std::to_string(std::get<2>(key)) + ": subjects repeat across positions");
  }

  for (const auto& [key, sr] : subject_rounds) {
    const auto [t, session, subject, round] = key;
    const std::string at = "subject " + std::to_string(subject) + " round " +
                           std::to_string(round) + ": ";
    if (sr.positions.size() != 1 || sr.groups.size() != 1) {
      flag(at + "appears at several positions or groups");
      continue;
    }
    const int pos = *sr.positions.begin();
    const int expect = max_condition(t, pos) + 1;
    if (static_cast<int>(sr.conditions.size()) != expect)
      flag(at + "has " + std::to_string(sr.conditions.size()) + " cells, expected " +
           std::to_string(expect) + " at position " + std::to_string(pos));
    if (sr.realized != 1)
      flag(at + std::to_string(sr.realized) + " realized cells, expected exactly 1");
  }

  for (const auto& [subject, labels] : type_labels)
    if (labels.size() > 1)
      flag("subject " + std::to_string(subject) + " carries conflicting type labels");

  if (!problems.empty()) {
    std::string msg = "dataset integrity violations:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataIntegrityError(msg);
  }
}

}  // namespace

SessionDataset ingest(std::istream& in) {
  SessionDataset data;
  std::string line;
  int line_no = 0;
  bool saw_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        const std::string value = line.substr(eq + 1);
        if (key == "seed") data.provenance.seed = std::strtoull(value.c_str(), nullptr, 10);
        if (key == "config") data.provenance.config_digest = value;
        if (key == "payment_rounds") {
          for (const std::string& f : split_csv(value))
            if (!f.empty()) data.provenance.payment_rounds.push_back(std::atoi(f.c_str()));
        }
      }
      continue;
    }
    if (!saw_header) {
      if (line != kDatasetHeader)
        throw SchemaError("line " + std::to_string(line_no) +
                          ": header mismatch; expected '" + kDatasetHeader + "'");
      saw_header = true;
      continue;
    }

    const auto fields = split_csv(line);
    if (fields.size() != 10)
      throw SchemaError("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                        std::to_string(fields.size()));
    DecisionRow r;
    try {
      r.treatment = parse_treatment(fields[0]);
    } catch (const DomainError& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
    r.session_id = parse_int(fields[1], line_no, "session_id");
    r.subject_id = parse_int(fields[2], line_no, "subject_id");
    if (!fields[3].empty()) {
      try {
        r.true_type = parse_type(fields[3]);
      } catch (const DomainError& e) {
        throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    r.round = parse_int(fields[4], line_no, "round");
    r.group_id = parse_int(fields[5], line_no, "group_id");
    r.position = parse_int(fields[6], line_no, "position");
    if (fields[7].size() < 2 || fields[7][0] != 'c')
      throw SchemaError("line " + std::to_string(line_no) + ": bad condition '" +
                        fields[7] + "' (want c0/c1/c2)");
    r.condition = parse_int(fields[7].substr(1), line_no, "condition");
    r.choice = parse_int(fields[8], line_no, "choice");
    const int realized = parse_int(fields[9], line_no, "realized");
    if ((r.choice != 0 && r.choice != 1) || (realized != 0 && realized != 1))
      throw SchemaError("line " + std::to_string(line_no) +
                        ": choice and realized must be 0 or 1");
    r.realized = realized == 1;
    data.rows.push_back(r);
  }
  if (!saw_header) throw SchemaError("missing dataset header");

  validate_dataset(data);
  return data;
}

SessionDataset ingest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset: " + path);
  return ingest(in);
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["version"] = 1;
  j["game"] = {{"n", cfg.game.n},
               {"r", cfg.game.r},
               {"m", cfg.game.m},
               {"position_known", cfg.game.position_known},
               {"rounds", cfg.game.rounds},
               {"endowment", cfg.game.endowment}};
  j["population"] = {{"gm", cfg.population[0]},
                     {"alt", cfg.population[1]},
                     {"coop", cfg.population[2]},
                     {"free", cfg.population[3]}};
  j["beta"] = cfg.beta;
  j["seed"] = cfg.seed;
  j["sessions"] = cfg.sessions;
  j["restarts"] = cfg.restarts;
  j["out"] = {{"dataset", cfg.dataset_out}, {"estimate", cfg.estimate_out}};
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config JSON: ") + e.what());
  }
  reject_unknown_keys(j, {"version", "game", "population", "beta", "seed", "sessions",
                          "restarts", "out"},
                      "run config");
  RunConfig cfg;
  if (j.contains("version") && j["version"].get<int>() != 1)
    throw ConfigError("unsupported run config version");
  if (j.contains("game")) {
    const json& g = j["game"];
    reject_unknown_keys(g, {"n", "r", "m", "position_known", "rounds", "endowment"},
                        "game");
    cfg.game.n = g.value("n", cfg.game.n);
    cfg.game.r = g.value("r", cfg.game.r);
    cfg.game.m = g.value("m", cfg.game.m);
    cfg.game.position_known = g.value("position_known", cfg.game.position_known);
    cfg.game.rounds = g.value("rounds", cfg.game.rounds);
    cfg.game.endowment = g.value("endowment", cfg.game.endowment);
  }
  if (j.contains("population")) {
    const json& p = j["population"];
    reject_unknown_keys(p, {"gm", "alt", "coop", "free"}, "population");
    cfg.population[0] = p.value("gm", 0);
    cfg.population[1] = p.value("alt", 0);
    cfg.population[2] = p.value("coop", 0);
    cfg.population[3] = p.value("free", 0);
  }
  cfg.beta = j.value("beta", cfg.beta);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.sessions = j.value("sessions", cfg.sessions);
  cfg.restarts = j.value("restarts", cfg.restarts);
  if (j.contains("out")) {
    const json& o = j["out"];
    reject_unknown_keys(o, {"dataset", "estimate"}, "out");
    cfg.dataset_out = o.value("dataset", cfg.dataset_out);
    cfg.estimate_out = o.value("estimate", cfg.estimate_out);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << run_config_to_json(cfg);
}

// ---------------------------------------------------------------------------
// Estimate serialization
// ---------------------------------------------------------------------------

namespace {
json inference_json(const ParamInference& inf) {
  json j;
  j["estimate"] = inf.estimate;
  if (inf.se_valid) {
    j["se"] = inf.se;
    j["p_value"] = inf.p_value;
    j["lower"] = inf.lower;
    j["upper"] = inf.upper;
  } else {
    j["se"] = nullptr;
  }
  if (inf.residual) j["residual"] = true;
  return j;
}
}  // namespace

std::string estimate_to_json(const SfemEstimate& estimate, const GameConfig& cfg) {
  json j;
  j["version"] = 1;
  j["log_likelihood"] = estimate.log_likelihood;
  j["n_obs"] = estimate.n_obs;
  j["n_free_parameters"] = estimate.n_free_parameters;
  j["seed"] = estimate.seed;
  j["game"] = {{"n", cfg.n},
               {"r", cfg.r},
               {"rounds", cfg.rounds},
               {"endowment", cfg.endowment}};
  j["gamma"] = cfg.r > mixed_region_lower(cfg.n) ? solve_gamma(cfg.n, cfg.r) : 0.0;
  j["treatments"] = json::array();
  for (const TreatmentEstimate& te : estimate.treatments) {
    json t;
    t["treatment"] = to_string(te.treatment);
    t["n_subjects"] = te.n_subjects;
    t["n_obs"] = te.n_obs;
    t["log_likelihood"] = te.log_likelihood;
    t["beta"] = inference_json(te.beta_inference);
    t["pi"] = json::array();
    for (std::size_t k = 0; k < te.types.size(); ++k) {
      json p = inference_json(te.pi_inference[k]);
      p["type"] = type_label(te.types[k]);
      t["pi"].push_back(p);
    }
    t["diagnostics"] = {{"restarts", te.restarts},
                        {"failed_restarts", te.failed_restarts},
                        {"converged", te.converged},
                        {"boundary", te.boundary},
                        {"best_objective", te.best_objective}};
    j["treatments"].push_back(t);
  }
  return j.dump(2) + "\n";
}

void write_estimate_json(const SfemEstimate& estimate, const GameConfig& cfg,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << estimate_to_json(estimate, cfg);
}

std::string default_out_dir() {
  const char* env = std::getenv("SEQPGG_OUT_DIR");
  return env && *env ? env : ".";
}

}  // namespace seqpgg
