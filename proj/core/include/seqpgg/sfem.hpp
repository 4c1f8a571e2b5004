#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "seqpgg/agents.hpp"
#include "seqpgg/dataset.hpp"
#include "seqpgg/game.hpp"

namespace seqpgg {

/// Candidate strategy set per treatment. In T3 gm and free-rider are
/// observationally identical, so the mixture carries a single merged gm
/// component and no free-rider share.
std::vector<BehavioralType> candidate_types(Treatment t);

/// Shared context for likelihood evaluation: game parameters plus the
/// prescription tables (including the solved forgiveness probability used by
/// gm's mixed cells in T2).
class SfemModel {
 public:
  explicit SfemModel(const GameConfig& cfg = GameConfig{});
  const GameConfig& config() const { return cfg_; }
  const TypePrescriptions& prescriptions(Treatment t) const;
  double gamma() const;

 private:
  GameConfig cfg_;
  std::vector<TypePrescriptions> tables_;
};

/// Mixture parameters for one treatment: tremble beta in (1/2, 1) and mixing
/// probabilities over candidate_types(treatment), summing to 1.
struct TreatmentParams {
  double beta = 0.9;
  std::vector<double> pi;
};
using ParamsByTreatment = std::map<Treatment, TreatmentParams>;

/// P(subject's elicited cells | type k, beta): product over cells of the
/// tremble-blended choice probability. Computed in log space.
double subject_log_likelihood(std::span<const DecisionRow> rows, BehavioralType k,
                              double beta, const SfemModel& model);
double subject_likelihood(std::span<const DecisionRow> rows, BehavioralType k,
                          double beta, const SfemModel& model);

/// Sum over subjects of ln sum_k pi_k P(subject | k, beta); treatments add.
/// Returns -inf when some subject has zero probability under every weighted
/// type (diagnosed by the caller, never thrown).
double total_log_likelihood(const SessionDataset& data, const ParamsByTreatment& params,
                            const SfemModel& model);

struct ParamInference {
  double estimate = 0.0;
  double se = 0.0;
  double p_value = 1.0;  // beta tested against 1/2, shares against 0
  double lower = 0.0;    // estimate -/+ 1.96 se; may leave [0,1]
  double upper = 0.0;
  bool se_valid = false;
  bool residual = false;  // share obtained as 1 - sum of the free shares
};

struct TreatmentEstimate {
  Treatment treatment = Treatment::T1;
  std::vector<BehavioralType> types;
  double beta = 0.0;
  std::vector<double> pi;  // full vector including the residual component
  double log_likelihood = 0.0;
  long n_obs = 0;
  int n_subjects = 0;

  ParamInference beta_inference;
  std::vector<ParamInference> pi_inference;

  // optimizer diagnostics
  int restarts = 0;
  int failed_restarts = 0;
  bool converged = false;
  bool boundary = false;  // some parameter ended on its constraint boundary
  double best_objective = 0.0;
};

struct SfemEstimate {
  std::vector<TreatmentEstimate> treatments;
  double log_likelihood = 0.0;
  long n_obs = 0;
  int n_free_parameters = 0;
  std::uint64_t seed = 0;
};

struct SfemOptions {
  int restarts = 50;
  std::uint64_t seed = 1;
  int threads = 1;  // parallelism across restarts
};

/// Maximum-likelihood fit of the mixture, one block per treatment present in
/// the dataset. Constraints are handled by reparameterization (scaled
/// logistic for beta, softmax for the shares); the best of `restarts`
/// random starts wins, deterministically given the seed. The free-rider
/// share in T1/T2 (the coop share in T3) is reported as the residual.
SfemEstimate fit(const SessionDataset& data, const SfemOptions& options = {},
                 const GameConfig& cfg = GameConfig{});

/// Wald inference in raw (beta, pi) coordinates from a finite-difference
/// Hessian of the negative log-likelihood; the residual share's s.e. comes
/// from the delta method. On a singular Hessian the s.e. fields stay
/// invalid and a boundary/warning flag is left set.
void wald_inference(TreatmentEstimate& estimate, const SessionDataset& data,
                    const SfemModel& model);

}  // namespace seqpgg
