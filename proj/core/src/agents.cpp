#include "seqpgg/agents.hpp"

#include <string>

#include "seqpgg/equilibrium.hpp"

namespace seqpgg {

Tremble::Tremble(double b) : beta(b) {
  if (!(b > 0.5 && b <= 1.0))
    throw DomainError("tremble beta must lie in (1/2, 1]; got " + std::to_string(b));
}

TypePrescriptions::TypePrescriptions(Treatment t, const GameConfig& cfg)
    : treatment_(t), cfg_(cfg) {
  cfg_.validate();
  if (sample_window(t) != cfg.m || position_is_known(t) != cfg.position_known)
    throw ConfigError("treatment " + to_string(t) + " does not match game config");
  if (t == Treatment::T2) {
    // Below the mixed region the window-1 profile never forgives an observed
    // defection, matching the gamma -> 0 limit of the fixed point.
    gamma_ = cfg.r > mixed_region_lower(cfg.n) ? solve_gamma(cfg.n, cfg.r) : 0.0;
  }
}

double TypePrescriptions::prescription(BehavioralType k, int position,
                                       int condition) const {
  if (position < 1 || position > cfg_.n)
    throw DomainError("position must be in [1, n], got " + std::to_string(position));
  const int max_k = max_condition(treatment_, position);
  if (condition < 0 || condition > max_k)
    throw DomainError("condition c" + std::to_string(condition) +
                      " unreachable at position " + std::to_string(position) + " in " +
                      to_string(treatment_));

  switch (k) {
    case BehavioralType::Altruist:
      return 1.0;
    case BehavioralType::FreeRider:
      return 0.0;
    case BehavioralType::ConditionalCooperator:
      // Contribute first, and reciprocate any observed contribution.
      if (position == 1) return 1.0;
      return condition >= 1 ? 1.0 : 0.0;
    case BehavioralType::Gm:
      if (treatment_ == Treatment::T3) return 0.0;  // full unraveling
      if (treatment_ == Treatment::T2) {
        // Null sample or observed contribution -> contribute; observed
        // defection is forgiven with the mixed probability.
        if (position == 1 || condition == 1) return 1.0;
        return gamma_;
      }
      // Window >= 2: contribute only on samples without defection.
      return condition == max_k ? 1.0 : 0.0;
  }
  throw DomainError("invalid behavioral type value");
}

double TypePrescriptions::choice_probability(BehavioralType k, int position,
                                             int condition, double beta) const {
  if (!(beta > 0.5 && beta <= 1.0))
    throw DomainError("tremble beta must lie in (1/2, 1]; got " + std::to_string(beta));
  const double sigma = prescription(k, position, condition);
  return sigma * beta + (1.0 - sigma) * (1.0 - beta);
}

int TypePrescriptions::draw_choice(BehavioralType k, int position, int condition,
                                   double beta, RngStream& rng) const {
  return rng.bernoulli(choice_probability(k, position, condition, beta)) ? 1 : 0;
}

}  // namespace seqpgg
