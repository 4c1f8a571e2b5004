#include "seqpgg/sfem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "parallel_util.hpp"
#include "seqpgg/rng.hpp"

namespace seqpgg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
enum : std::uint64_t { kTagRestart = 11, kTagPolish = 12 };

// ---------------------------------------------------------------------------
// Sufficient statistics. All prescriptions are 0, 1 or gamma, so a subject's
// log-likelihood under one type collapses to four counts:
//   match    cells where the stated choice equals a pure prescription
//   mismatch cells where it differs
//   gc / gd  contribute / defect choices in gamma-mixed cells (gm in T2)
// and ll(beta) = match ln b + mismatch ln(1-b) + gc ln cp + gd ln(1-cp),
// cp = gamma b + (1-gamma)(1-b).
// ---------------------------------------------------------------------------
struct TypeCounts {
  int match = 0;
  int mismatch = 0;
  int gc = 0;
  int gd = 0;
};

struct TreatmentData {
  Treatment treatment = Treatment::T1;
  std::vector<int> subject_ids;                   // ascending
  std::vector<std::vector<TypeCounts>> counts;    // [subject][type]
  std::vector<BehavioralType> types;
  long n_obs = 0;
};

TypeCounts accumulate_counts(std::span<const DecisionRow> rows, BehavioralType k,
                             const TypePrescriptions& table) {
  TypeCounts c;
  for (const DecisionRow& row : rows) {
    const double sigma = table.prescription(k, row.position, row.condition);
    if (sigma == 1.0) {
      (row.choice ? c.match : c.mismatch)++;
    } else if (sigma == 0.0) {
      (row.choice ? c.mismatch : c.match)++;
    } else {
      (row.choice ? c.gc : c.gd)++;
    }
  }
  return c;
}

// Logs shared by every subject and type at one (beta, gamma) point.
struct LogTerms {
  double lb, l1b, lcp, l1cp;
  LogTerms(double beta, double gamma)
      : lb(std::log(beta)), l1b(std::log1p(-beta)) {
    const double cp = gamma * beta + (1.0 - gamma) * (1.0 - beta);
    lcp = std::log(cp);
    l1cp = std::log1p(-cp);
  }
};

// Guards keep 0 * (-inf) out at the beta -> 1 boundary.
double counts_log_likelihood(const TypeCounts& c, const LogTerms& lt) {
  double ll = 0.0;
  if (c.match) ll += c.match * lt.lb;
  if (c.mismatch) ll += c.mismatch * lt.l1b;
  if (c.gc) ll += c.gc * lt.lcp;
  if (c.gd) ll += c.gd * lt.l1cp;
  return ll;
}

double counts_log_likelihood(const TypeCounts& c, double beta, double gamma) {
  return counts_log_likelihood(c, LogTerms(beta, gamma));
}

TreatmentData build_treatment_data(const SessionDataset& data, Treatment t,
                                   const SfemModel& model) {
  // Keyed by subject id, so row and subject order in the input never affect
  // the summation order.
  std::map<int, std::vector<DecisionRow>> by_subject;
  for (const DecisionRow& row : data.rows)
    if (row.treatment == t) by_subject[row.subject_id].push_back(row);

  TreatmentData out;
  out.treatment = t;
  out.types = candidate_types(t);
  const TypePrescriptions& table = model.prescriptions(t);
  for (auto& [sid, rows] : by_subject) {
    out.subject_ids.push_back(sid);
    std::vector<TypeCounts> per_type;
    per_type.reserve(out.types.size());
    for (BehavioralType k : out.types)
      per_type.push_back(accumulate_counts(rows, k, table));
    out.counts.push_back(std::move(per_type));
    out.n_obs += static_cast<long>(rows.size());
  }
  return out;
}

// Mixture log-likelihood for one treatment from precomputed counts.
double mixture_log_likelihood(const TreatmentData& td, double beta,
                              std::span<const double> pi, double gamma) {
  const std::size_t K = td.types.size();
  const LogTerms lt(beta, gamma);
  double log_pi[8];
  double terms[8];
  for (std::size_t k = 0; k < K; ++k)
    log_pi[k] = pi[k] > 0.0 ? std::log(pi[k]) : -kInf;

  double total = 0.0;
  for (const auto& per_type : td.counts) {
    double hi = -kInf;
    for (std::size_t k = 0; k < K; ++k) {
      terms[k] = log_pi[k] == -kInf
                     ? -kInf
                     : log_pi[k] + counts_log_likelihood(per_type[k], lt);
      hi = std::max(hi, terms[k]);
    }
    if (hi == -kInf) return -kInf;  // zero probability under every weighted type
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      if (terms[k] != -kInf) acc += std::exp(terms[k] - hi);
    total += hi + std::log(acc);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Constraint handling: beta through a scaled logistic onto (1/2, 1), shares
// through a softmax with the last logit pinned to zero.
// ---------------------------------------------------------------------------
double beta_from_raw(double x) { return 0.5 + 0.5 / (1.0 + std::exp(-x)); }
double raw_from_beta(double beta) {
  const double u = (beta - 0.5) / 0.5;
  return std::log(u / (1.0 - u));
}

std::vector<double> pi_from_logits(std::span<const double> logits) {
  const std::size_t K = logits.size() + 1;
  std::vector<double> pi(K);
  double hi = 0.0;  // pinned logit
  for (double l : logits) hi = std::max(hi, l);
  double sum = std::exp(0.0 - hi);
  pi[K - 1] = sum;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    pi[k] = std::exp(logits[k] - hi);
    sum += pi[k];
  }
  for (double& v : pi) v /= sum;
  return pi;
}

// ---------------------------------------------------------------------------
// Nelder-Mead on the unconstrained parameterization. Dimensions here are 3-4,
// where the plain simplex method with a tight function tolerance is reliable;
// global coverage comes from the random restarts.
// ---------------------------------------------------------------------------
struct NmResult {
  std::vector<double> x;
  double f = kInf;
  bool converged = false;
};

template <typename F>
NmResult nelder_mead(F&& f, std::vector<double> x0, double step, double ftol,
                     int max_evals) {
  const std::size_t dim = x0.size();
  std::vector<std::vector<double>> xs(dim + 1, x0);
  std::vector<double> fs(dim + 1);
  for (std::size_t i = 0; i < dim; ++i) xs[i + 1][i] += step;
  int evals = 0;
  for (std::size_t i = 0; i <= dim; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }

  std::vector<std::size_t> order(dim + 1);
  NmResult res;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order[0], worst = order[dim], second = order[dim - 1];

    if (std::abs(fs[worst] - fs[best]) <= ftol * (1.0 + std::abs(fs[best]))) {
      res.converged = true;
      break;
    }
    if (evals >= max_evals) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += xs[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    auto blend = [&](double coef) {
      std::vector<double> p(dim);
      for (std::size_t d = 0; d < dim; ++d)
        p[d] = centroid[d] + coef * (xs[worst][d] - centroid[d]);
      return p;
    };

    std::vector<double> reflected = blend(-1.0);
    const double fr = f(reflected);
    ++evals;
    if (fr < fs[order[0]]) {
      std::vector<double> expanded = blend(-2.0);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        xs[worst] = std::move(expanded);
        fs[worst] = fe;
      } else {
        xs[worst] = std::move(reflected);
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = std::move(reflected);
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      std::vector<double> contracted = blend(outside ? -0.5 : 0.5);
      const double fc = f(contracted);
      ++evals;
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = std::move(contracted);
        fs[worst] = fc;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= dim; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < dim; ++d)
            xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
          fs[i] = f(xs[i]);
          ++evals;
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= dim; ++i)
    if (fs[i] < fs[best]) best = i;
  res.x = xs[best];
  res.f = fs[best];
  return res;
}

struct FitOutcome {
  double beta = 0.0;
  std::vector<double> pi;
  double log_likelihood = -kInf;
  bool converged = false;
  int failed_restarts = 0;
};

FitOutcome maximize_treatment(const TreatmentData& td, double gamma,
                              const SfemOptions& options) {
  const std::size_t K = td.types.size();
  const std::size_t dim = K;  // beta raw + K-1 logits

  auto objective = [&](const std::vector<double>& x) {
    const double beta = beta_from_raw(x[0]);
    const std::vector<double> pi =
        pi_from_logits(std::span<const double>(x).subspan(1));
    const double ll = mixture_log_likelihood(td, beta, pi, gamma);
    return std::isfinite(ll) ? -ll : kInf;
  };

  std::vector<NmResult> runs(options.restarts);
  detail::parallel_for(options.restarts, options.threads, [&](int r) {
    RngStream rng(derive_seed(options.seed, kTagRestart, static_cast<std::uint64_t>(r),
                              static_cast<std::uint64_t>(td.treatment)));
    std::vector<double> x0(dim);
    x0[0] = raw_from_beta(rng.uniform(0.55, 0.95));
    // Uniform Dirichlet start for the shares.
    std::vector<double> g(K);
    double gsum = 0.0;
    for (double& v : g) {
      v = -std::log(1.0 - rng.next_double());
      gsum += v;
    }
    for (std::size_t k = 0; k + 1 < K; ++k) x0[1 + k] = std::log(g[k] / g[K - 1]);
    runs[r] = nelder_mead(objective, std::move(x0), 0.8, 1e-12, 4000);
  });

  FitOutcome out;
  int best = -1;
  int failed = 0;
  for (int r = 0; r < options.restarts; ++r) {
    if (!std::isfinite(runs[r].f)) {
      ++failed;
      continue;
    }
    if (best < 0 || runs[r].f < runs[best].f) best = r;
  }
  out.failed_restarts = failed;
  if (best < 0)
    throw OptimizationError("all " + std::to_string(options.restarts) +
                            " restarts failed for " + to_string(td.treatment));

  // Tight local polish from the winning start.
  NmResult polish = nelder_mead(objective, runs[best].x, 0.05, 1e-13, 4000);
  const NmResult& final_run = polish.f <= runs[best].f ? polish : runs[best];

  out.beta = beta_from_raw(final_run.x[0]);
  out.pi = pi_from_logits(std::span<const double>(final_run.x).subspan(1));
  out.log_likelihood = -final_run.f;
  out.converged = final_run.converged || runs[best].converged;
  return out;
}

// ---------------------------------------------------------------------------
// Wald inference in raw coordinates theta = (beta, pi_1..pi_{K-1}); the last
// share is the residual 1 - sum.
// ---------------------------------------------------------------------------
double nll_raw(const TreatmentData& td, double gamma, std::span<const double> theta) {
  const std::size_t K = td.types.size();
  const double beta = std::clamp(theta[0], 0.5 + 1e-9, 1.0 - 1e-9);
  std::vector<double> pi(K);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    pi[k] = std::max(theta[1 + k], 0.0);
    sum += pi[k];
  }
  pi[K - 1] = std::max(1.0 - sum, 0.0);
  const double ll = mixture_log_likelihood(td, beta, pi, gamma);
  return std::isfinite(ll) ? -ll : kInf;
}

// Gauss-Jordan inverse with partial pivoting; false when singular.
bool invert_matrix(std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t rr = col + 1; rr < n; ++rr)
      if (std::abs(a[rr][col]) > std::abs(a[pivot][col])) pivot = rr;
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const double scale = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= scale;
      inv[col][j] /= scale;
    }
    for (std::size_t rr = 0; rr < n; ++rr) {
      if (rr == col) continue;
      const double factor = a[rr][col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[rr][j] -= factor * a[col][j];
        inv[rr][j] -= factor * inv[col][j];
      }
    }
  }
  a = std::move(inv);
  return true;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

ParamInference make_inference(double estimate, double variance, double null_value) {
  ParamInference inf;
  inf.estimate = estimate;
  if (variance > 0.0 && std::isfinite(variance)) {
    inf.se = std::sqrt(variance);
    inf.se_valid = true;
    inf.p_value = 2.0 * normal_sf(std::abs(estimate - null_value) / inf.se);
    inf.lower = estimate - 1.96 * inf.se;
    inf.upper = estimate + 1.96 * inf.se;
  }
  return inf;
}

void wald_for_treatment(TreatmentEstimate& est, const TreatmentData& td, double gamma) {
  const std::size_t K = td.types.size();
  const std::size_t dim = K;  // beta + K-1 free shares
  std::vector<double> theta(dim);
  theta[0] = est.beta;
  for (std::size_t k = 0; k + 1 < K; ++k) theta[1 + k] = est.pi[k];

  auto f = [&](std::span<const double> t) { return nll_raw(td, gamma, t); };

  // Central-difference Hessian; steps shrink near the constraint boundary so
  // every evaluation point stays feasible.
  std::vector<double> h(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double room;
    if (i == 0) {
      room = std::min(theta[0] - 0.5, 1.0 - theta[0]);
    } else {
      double sum = 0.0;
      for (std::size_t k = 0; k + 1 < K; ++k) sum += theta[1 + k];
      room = std::min(theta[i], 1.0 - sum);
    }
    h[i] = std::min(1e-4, std::max(room / 4.0, 1e-7));
  }

  const double f0 = f(theta);
  std::vector<std::vector<double>> hess(dim, std::vector<double>(dim, 0.0));
  bool ok = std::isfinite(f0);
  for (std::size_t i = 0; i < dim && ok; ++i) {
    for (std::size_t j = i; j < dim && ok; ++j) {
      std::vector<double> t = theta;
      double v;
      if (i == j) {
        t[i] = theta[i] + h[i];
        const double fp = f(t);
        t[i] = theta[i] - h[i];
        const double fm = f(t);
        v = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        ok = ok && std::isfinite(fp) && std::isfinite(fm);
      } else {
        t[i] = theta[i] + h[i];
        t[j] = theta[j] + h[j];
        const double fpp = f(t);
        t[j] = theta[j] - h[j];
        const double fpm = f(t);
        t[i] = theta[i] - h[i];
        t[j] = theta[j] + h[j];
        const double fmp = f(t);
        t[j] = theta[j] - h[j];
        const double fmm = f(t);
        v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
        ok = ok && std::isfinite(fpp) && std::isfinite(fpm) && std::isfinite(fmp) &&
             std::isfinite(fmm);
      }
      hess[i][j] = hess[j][i] = v;
    }
  }

  std::vector<std::vector<double>> cov = hess;
  const bool invertible = ok && invert_matrix(cov);

  est.beta_inference = ParamInference{};
  est.pi_inference.assign(K, ParamInference{});
  if (invertible) {
    est.beta_inference = make_inference(est.beta, cov[0][0], 0.5);
    for (std::size_t k = 0; k + 1 < K; ++k)
      est.pi_inference[k] = make_inference(est.pi[k], cov[1 + k][1 + k], 0.0);
    // Residual share: var(1 - sum of free shares) = 1' Sigma_pi 1.
    double var = 0.0;
    for (std::size_t a = 1; a < dim; ++a)
      for (std::size_t b = 1; b < dim; ++b) var += cov[a][b];
    est.pi_inference[K - 1] = make_inference(est.pi[K - 1], var, 0.0);
  } else {
    est.beta_inference.estimate = est.beta;
    for (std::size_t k = 0; k < K; ++k) est.pi_inference[k].estimate = est.pi[k];
  }
  est.pi_inference[K - 1].residual = true;
}

}  // namespace

std::vector<BehavioralType> candidate_types(Treatment t) {
  if (t == Treatment::T3)
    return {BehavioralType::Gm, BehavioralType::Altruist,
            BehavioralType::ConditionalCooperator};
  return {BehavioralType::Gm, BehavioralType::Altruist,
          BehavioralType::ConditionalCooperator, BehavioralType::FreeRider};
}

SfemModel::SfemModel(const GameConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  for (Treatment t : kAllTreatments) {
    GameConfig tc = cfg_;
    tc.m = sample_window(t);
    tc.position_known = position_is_known(t);
    tables_.emplace_back(t, tc);
  }
}

const TypePrescriptions& SfemModel::prescriptions(Treatment t) const {
  return tables_[static_cast<std::size_t>(t)];
}

double SfemModel::gamma() const {
  return prescriptions(Treatment::T2).gamma();
}

double subject_log_likelihood(std::span<const DecisionRow> rows, BehavioralType k,
                              double beta, const SfemModel& model) {
  if (rows.empty()) return 0.0;
  if (!(beta > 0.5 && beta <= 1.0))
    throw DomainError("beta must lie in (1/2, 1], got " + std::to_string(beta));
  const Treatment t = rows.front().treatment;
  for (const DecisionRow& row : rows)
    if (row.treatment != t)
      throw DataIntegrityError("subject rows span multiple treatments");
  const TypeCounts c = accumulate_counts(rows, k, model.prescriptions(t));
  return counts_log_likelihood(c, beta, model.gamma());
}

double subject_likelihood(std::span<const DecisionRow> rows, BehavioralType k,
                          double beta, const SfemModel& model) {
  return std::exp(subject_log_likelihood(rows, k, beta, model));
}

double total_log_likelihood(const SessionDataset& data, const ParamsByTreatment& params,
                            const SfemModel& model) {
  double total = 0.0;
  for (const auto& [t, p] : params) {
    const TreatmentData td = build_treatment_data(data, t, model);
    if (td.subject_ids.empty()) continue;
    if (p.pi.size() != td.types.size())
      throw DomainError("pi size " + std::to_string(p.pi.size()) + " does not match " +
                        std::to_string(td.types.size()) + " candidate types for " +
                        to_string(t));
    double sum = 0.0;
    for (double v : p.pi) {
      if (v < 0.0 || v > 1.0) throw DomainError("pi components must lie in [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-8) throw DomainError("pi must sum to 1");
    if (!(p.beta > 0.5 && p.beta <= 1.0))
      throw DomainError("beta must lie in (1/2, 1]");
    // A subject with zero probability under every weighted type makes this
    // -inf (possible only in the noiseless limit); diagnosed, not thrown.
    total += mixture_log_likelihood(td, p.beta, p.pi, model.gamma());
  }
  return total;
}

SfemEstimate fit(const SessionDataset& data, const SfemOptions& options,
                 const GameConfig& cfg) {
  if (options.restarts < 1) throw DomainError("restarts must be >= 1");
  if (data.rows.empty()) throw DataIntegrityError("cannot fit an empty dataset");
  const SfemModel model(cfg);

  SfemEstimate out;
  out.seed = options.seed;
  for (Treatment t : data.treatments_present()) {
    const TreatmentData td = build_treatment_data(data, t, model);
    const double gamma = model.gamma();
    const FitOutcome fitted = maximize_treatment(td, gamma, options);

    TreatmentEstimate est;
    est.treatment = t;
    est.types = td.types;
    est.beta = fitted.beta;
    est.pi = fitted.pi;
    est.log_likelihood = fitted.log_likelihood;
    est.n_obs = td.n_obs;
    est.n_subjects = static_cast<int>(td.subject_ids.size());
    est.restarts = options.restarts;
    est.failed_restarts = fitted.failed_restarts;
    est.converged = fitted.converged;
    est.best_objective = -fitted.log_likelihood;
    est.boundary = fitted.beta > 1.0 - 1e-5 || fitted.beta < 0.5 + 1e-5;
    for (double v : fitted.pi)
      if (v < 1e-5 || v > 1.0 - 1e-5) est.boundary = true;

    wald_for_treatment(est, td, gamma);

    out.n_obs += est.n_obs;
    out.log_likelihood += est.log_likelihood;
    out.n_free_parameters += static_cast<int>(td.types.size());  // beta + K-1 shares
    out.treatments.push_back(std::move(est));
  }
  return out;
}

void wald_inference(TreatmentEstimate& estimate, const SessionDataset& data,
                    const SfemModel& model) {
  const TreatmentData td = build_treatment_data(data, estimate.treatment, model);
  wald_for_treatment(estimate, td, model.gamma());
}

}  // namespace seqpgg
