#include "seqpgg/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>

#include "seqpgg/agents.hpp"

namespace seqpgg {

namespace {
// Substream tags; numeric so that seed derivation stays layout-independent.
enum : std::uint64_t { kTagSession = 1, kTagMatch = 2, kTagChoices = 3, kTagPayment = 4 };
}  // namespace

BehavioralType PopulationSpec::type_of(int subject_id) const {
  int upper = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    upper += counts[i];
    if (subject_id < upper) return kAllTypes[i];
  }
  throw DomainError("subject id " + std::to_string(subject_id) +
                    " outside population of " + std::to_string(total()));
}

void PopulationSpec::validate(const GameConfig& cfg) const {
  cfg.validate();
  if (sample_window(treatment) != cfg.m ||
      position_is_known(treatment) != cfg.position_known)
    throw ConfigError("treatment " + to_string(treatment) +
                      " does not match game config");
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] < 0)
      throw ConfigError("negative count for type " + type_label(kAllTypes[i]));
  if (total() <= 0) throw ConfigError("population is empty");
  if (total() % cfg.n != 0)
    throw ConfigError("population " + std::to_string(total()) +
                      " is not divisible by group size " + std::to_string(cfg.n));
  if (treatment == Treatment::T3 && counts[3] != 0)
    throw ConfigError(
        "in T3 free riders are indistinguishable from the gm type; fold them "
        "into the gm count");
  if (!(beta > 0.5 && beta <= 1.0))
    throw ConfigError("beta must lie in (1/2, 1], got " + std::to_string(beta));
}

std::vector<std::vector<int>> rematch(const std::vector<int>& subjects, int group_size,
                                      RngStream& rng) {
  if (group_size < 1 || subjects.size() % static_cast<std::size_t>(group_size) != 0)
    throw ConfigError("subject count " + std::to_string(subjects.size()) +
                      " is not divisible by group size " + std::to_string(group_size));
  std::vector<int> pool = subjects;
  rng.shuffle(pool);
  std::vector<std::vector<int>> groups;
  for (std::size_t i = 0; i < pool.size(); i += group_size)
    groups.emplace_back(pool.begin() + i, pool.begin() + i + group_size);
  return groups;
}

int select_payment_round(int rounds, RngStream& rng) {
  if (rounds < 1) throw DomainError("rounds must be >= 1");
  return 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(rounds)));
}

namespace {

SessionDataset simulate_one(const PopulationSpec& spec, const GameConfig& cfg,
                            int session_id, int subject_offset, std::uint64_t seed) {
  const Treatment t = spec.treatment;
  const TypePrescriptions table(t, cfg);

  std::vector<int> subjects(spec.total());
  std::iota(subjects.begin(), subjects.end(), 0);

  SessionDataset data;
  data.provenance.seed = seed;
  RngStream payment_rng(derive_seed(seed, kTagPayment));
  data.provenance.payment_rounds.push_back(select_payment_round(cfg.rounds, payment_rng));

  for (int round = 1; round <= cfg.rounds; ++round) {
    RngStream match_rng(derive_seed(seed, kTagMatch, static_cast<std::uint64_t>(round)));
    const auto groups = rematch(subjects, cfg.n, match_rng);

    for (std::size_t g = 0; g < groups.size(); ++g) {
      // Strategy method: each group member answers every cell reachable at
      // their assigned position, then play is resolved from those answers.
      std::vector<PositionResponses> responses(cfg.n);
      std::vector<std::size_t> first_row(cfg.n);
      for (int pos = 1; pos <= cfg.n; ++pos) {
        const int sid = groups[g][pos - 1];
        const BehavioralType type = spec.type_of(sid);
        RngStream choice_rng(derive_seed(seed, kTagChoices,
                                         static_cast<std::uint64_t>(round),
                                         static_cast<std::uint64_t>(sid)));
        responses[pos - 1].position = pos;
        first_row[pos - 1] = data.rows.size();
        for (const ConditionCell& cell : enumerate_cells(t, pos, cfg.n)) {
          const int choice =
              table.draw_choice(type, pos, cell.condition, spec.beta, choice_rng);
          responses[pos - 1].by_condition[cell.condition] = choice;
          DecisionRow row;
          row.treatment = t;
          row.session_id = session_id;
          row.subject_id = subject_offset + sid;
          row.true_type = type;
          row.round = round;
          row.group_id = static_cast<int>(g);
          row.position = pos;
          row.condition = cell.condition;
          row.choice = choice;
          row.realized = false;
          data.rows.push_back(row);
        }
      }
      const RealizedRound played = resolve_round(responses, cfg, t);
      for (int pos = 1; pos <= cfg.n; ++pos)
        data.rows[first_row[pos - 1] + played.conditions[pos - 1]].realized = true;
    }
  }
  return data;
}

}  // namespace

SessionDataset simulate_session(const PopulationSpec& spec, const GameConfig& cfg) {
  return simulate_sessions(spec, cfg, 1);
}

SessionDataset simulate_sessions(const PopulationSpec& spec, const GameConfig& cfg,
                                 int sessions) {
  spec.validate(cfg);
  if (sessions < 1) throw ConfigError("sessions must be >= 1");
  SessionDataset all;
  all.provenance.seed = spec.seed;
  all.provenance.config_digest = config_digest(spec, cfg, sessions);
  for (int s = 0; s < sessions; ++s) {
    SessionDataset one = simulate_one(spec, cfg, s, s * spec.total(),
                                      derive_seed(spec.seed, kTagSession,
                                                  static_cast<std::uint64_t>(s)));
    all.rows.insert(all.rows.end(), one.rows.begin(), one.rows.end());
    all.provenance.payment_rounds.push_back(one.provenance.payment_rounds.front());
  }
  return all;
}

std::string config_digest(const PopulationSpec& spec, const GameConfig& cfg,
                          int sessions) {
  std::string canon = to_string(spec.treatment);
  canon += ";n=" + std::to_string(cfg.n) + ";r=" + std::to_string(cfg.r) +
           ";m=" + std::to_string(cfg.m) +
           ";known=" + std::to_string(cfg.position_known) +
           ";rounds=" + std::to_string(cfg.rounds) +
           ";endow=" + std::to_string(cfg.endowment) + ";pop=";
  for (int c : spec.counts) canon += std::to_string(c) + ",";
  canon += ";beta=" + std::to_string(spec.beta) +
           ";seed=" + std::to_string(spec.seed) +
           ";sessions=" + std::to_string(sessions);
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

long SessionDataset::cell_count(Treatment t) const {
  long c = 0;
  for (const auto& r : rows)
    if (r.treatment == t) ++c;
  return c;
}

std::vector<Treatment> SessionDataset::treatments_present() const {
  std::vector<Treatment> out;
  for (Treatment t : kAllTreatments)
    if (cell_count(t) > 0) out.push_back(t);
  return out;
}

int SessionDataset::subject_count() const {
  std::vector<int> ids;
  ids.reserve(rows.size());
  for (const auto& r : rows) ids.push_back(r.subject_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return static_cast<int>(ids.size());
}

}  // namespace seqpgg
