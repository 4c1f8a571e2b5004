#pragma once

#include "seqpgg/game.hpp"
#include "seqpgg/rng.hpp"
#include "seqpgg/types.hpp"

namespace seqpgg {

/// Implementation-error parameter: a subject plays the prescribed action with
/// probability beta. Valid range is (1/2, 1); beta = 1 is the noiseless limit
/// used by deterministic checks and is accepted here, while estimation keeps
/// the open interval.
struct Tremble {
  double beta;
  explicit Tremble(double b);
  static Tremble noiseless() { return Tremble(1.0); }
};

/// Prescribed contribution probabilities for the four behavioral types in one
/// treatment design, per (position, condition) cell:
///
///                 P1    P2          P3/P4 (window 2)
///                 c0    c0  c1      c0  c1  c2
///   gm   (T1)     1     0   1       0   0   1
///   gm   (T2)     1     g   1       g   1   -      g = forgiveness prob.
///   gm   (T3)     0     0   0       0   0   0
///   free          0     0   0       0   0   0
///   alt           1     1   1       1   1   1
///   coop          1     0   1       0   1   1
///
/// The window-1 columns for T2 are c0/c1 only. gm's mixed entry is fixed at
/// the theoretical forgiveness probability for (n, r).
class TypePrescriptions {
 public:
  TypePrescriptions(Treatment t, const GameConfig& cfg);

  /// Contribution probability the type prescribes in a cell; throws
  /// DomainError for unreachable cells (e.g. c2 in T2).
  double prescription(BehavioralType k, int position, int condition) const;

  /// Prescription blended with the tremble: sigma*beta + (1-sigma)*(1-beta).
  double choice_probability(BehavioralType k, int position, int condition,
                            double beta) const;

  /// Bernoulli draw of a contribute/defect choice under the tremble.
  int draw_choice(BehavioralType k, int position, int condition, double beta,
                  RngStream& rng) const;

  Treatment treatment() const { return treatment_; }
  double gamma() const { return gamma_; }
  const GameConfig& config() const { return cfg_; }

 private:
  Treatment treatment_;
  GameConfig cfg_;
  double gamma_ = 0.0;  // solved once; only used by gm in T2
};

}  // namespace seqpgg
