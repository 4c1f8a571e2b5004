#include "seqpgg/game.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace seqpgg {

std::string to_string(Treatment t) {
  switch (t) {
    case Treatment::T1: return "T1";
    case Treatment::T2: return "T2";
    case Treatment::T3: return "T3";
  }
  throw DomainError("invalid treatment value");
}

Treatment parse_treatment(std::string_view s) {
  if (s == "T1" || s == "t1") return Treatment::T1;
  if (s == "T2" || s == "t2") return Treatment::T2;
  if (s == "T3" || s == "t3") return Treatment::T3;
  throw DomainError("unknown treatment: " + std::string(s));
}

std::string type_label(BehavioralType k) {
  switch (k) {
    case BehavioralType::Gm: return "gm";
    case BehavioralType::Altruist: return "alt";
    case BehavioralType::ConditionalCooperator: return "coop";
    case BehavioralType::FreeRider: return "free";
  }
  throw DomainError("invalid behavioral type value");
}

BehavioralType parse_type(std::string_view label) {
  if (label == "gm") return BehavioralType::Gm;
  if (label == "alt") return BehavioralType::Altruist;
  if (label == "coop") return BehavioralType::ConditionalCooperator;
  if (label == "free") return BehavioralType::FreeRider;
  throw DomainError("unknown behavioral type: " + std::string(label));
}

void GameConfig::validate() const {
  std::ostringstream err;
  if (n < 2)
    err << "group size n must be >= 2, got " << n;
  else if (!(r > 1.0 && r < static_cast<double>(n)))
    err << "return r must satisfy 1 < r < n, got r=" << r << " with n=" << n;
  else if (m < 1 || m > n - 1)
    err << "sample window m must be in [1, n-1], got m=" << m << " with n=" << n;
  else if (rounds < 1)
    err << "rounds must be >= 1, got " << rounds;
  else if (!(endowment > 0.0))
    err << "endowment must be positive, got " << endowment;
  else
    return;
  throw ConfigError("invalid game config: " + err.str());
}

GameConfig game_config_for(Treatment t, int rounds, int n, double r, double endowment) {
  GameConfig cfg;
  cfg.n = n;
  cfg.r = r;
  cfg.m = sample_window(t);
  cfg.position_known = position_is_known(t);
  cfg.rounds = rounds;
  cfg.endowment = endowment;
  cfg.validate();
  return cfg;
}

Treatment treatment_for(const GameConfig& cfg) {
  if (cfg.m == 2 && !cfg.position_known) return Treatment::T1;
  if (cfg.m == 1 && !cfg.position_known) return Treatment::T2;
  if (cfg.m == 2 && cfg.position_known) return Treatment::T3;
  throw ConfigError("no treatment label for m=" + std::to_string(cfg.m) +
                    ", position_known=" + std::to_string(cfg.position_known) +
                    "; supported designs are window 1 or 2, with the position known "
                    "only for window 2");
}

double payoff_contribute(int g_others, const GameConfig& cfg) {
  if (g_others < 0 || g_others > cfg.n - 1)
    throw DomainError("g_others must be in [0, n-1], got " + std::to_string(g_others));
  return cfg.r / cfg.n * (g_others + 1) - 1.0;
}

double payoff_defect(int g_others, const GameConfig& cfg) {
  if (g_others < 0 || g_others > cfg.n - 1)
    throw DomainError("g_others must be in [0, n-1], got " + std::to_string(g_others));
  return cfg.r / cfg.n * g_others;
}

std::vector<double> token_payoffs(std::span<const int> actions, const GameConfig& cfg) {
  if (static_cast<int>(actions.size()) != cfg.n)
    throw DomainError("actions length " + std::to_string(actions.size()) +
                      " does not match group size " + std::to_string(cfg.n));
  const int contributors = std::accumulate(actions.begin(), actions.end(), 0);
  const double pool_share = cfg.r / cfg.n * cfg.endowment * contributors;
  std::vector<double> out(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i)
    out[i] = (actions[i] ? 0.0 : cfg.endowment) + pool_share;
  return out;
}

Sample sample_for(int position, std::span<const int> history, const GameConfig& cfg) {
  if (position < 1 || position > cfg.n)
    throw DomainError("position must be in [1, n], got " + std::to_string(position));
  if (static_cast<int>(history.size()) != position - 1)
    throw DomainError("history length " + std::to_string(history.size()) +
                      " does not match position " + std::to_string(position));
  Sample s;
  s.observed = std::min(cfg.m, position - 1);
  s.contributed = std::accumulate(history.end() - s.observed, history.end(), 0);
  return s;
}

int max_condition(Treatment t, int position) {
  if (position < 1) throw DomainError("position must be >= 1");
  return std::min(sample_window(t), position - 1);
}

std::vector<ConditionCell> enumerate_cells(Treatment t, int position, int n) {
  if (position < 1 || position > n)
    throw DomainError("position must be in [1, n], got " + std::to_string(position));
  std::vector<ConditionCell> cells;
  for (int k = 0; k <= max_condition(t, position); ++k)
    cells.push_back(ConditionCell{t, position, k});
  return cells;
}

int cells_per_group_round(Treatment t, int n) {
  int total = 0;
  for (int pos = 1; pos <= n; ++pos) total += max_condition(t, pos) + 1;
  return total;
}

RealizedRound resolve_round(std::span<const PositionResponses> responses,
                            const GameConfig& cfg, Treatment t) {
  if (sample_window(t) != cfg.m || position_is_known(t) != cfg.position_known)
    throw ConfigError("treatment " + to_string(t) + " does not match game config");
  if (static_cast<int>(responses.size()) != cfg.n)
    throw DataIntegrityError("need responses for all " + std::to_string(cfg.n) +
                             " positions, got " + std::to_string(responses.size()));
  RealizedRound out;
  for (int pos = 1; pos <= cfg.n; ++pos) {
    const PositionResponses& pr = responses[pos - 1];
    if (pr.position != pos)
      throw DataIntegrityError("responses must be ordered by position; slot " +
                               std::to_string(pos) + " holds position " +
                               std::to_string(pr.position));
    const Sample s = sample_for(pos, out.actions, cfg);
    auto it = pr.by_condition.find(s.contributed);
    if (it == pr.by_condition.end())
      throw DataIntegrityError("missing response for position " + std::to_string(pos) +
                               " condition c" + std::to_string(s.contributed));
    out.conditions.push_back(s.contributed);
    out.actions.push_back(it->second ? 1 : 0);
  }
  const int contributors = std::accumulate(out.actions.begin(), out.actions.end(), 0);
  out.group_contribution = cfg.endowment * contributors;
  out.payoffs = token_payoffs(out.actions, cfg);
  return out;
}

}  // namespace seqpgg
