#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>

namespace seqpgg {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<std::pair<double, double>> interval;
  std::string method;
  std::string inputs;   // echo of the inputs for report output
  std::string warning;  // empty when clean
};

/// Two-sided exact binomial test of H0: p = p0. The p-value sums the
/// probabilities of all outcomes no more likely than the observed one
/// (minimum-likelihood convention). Statistic is the observed proportion.
TestResult binomial_test(int successes, int trials, double p0);

struct HpdInterval {
  double lower = 0.0;
  double upper = 1.0;
  bool equal_tail_fallback = false;  // set when the posterior is not unimodal
};

/// Shortest interval holding `mass` posterior probability of
/// Beta(prior_a + successes, prior_b + failures). For unimodal posteriors the
/// endpoints have equal density; otherwise falls back to the equal-tail
/// interval.
HpdInterval beta_hpd(double successes, double failures, double prior_a, double prior_b,
                     double mass);

/// McNemar test on discordant pair counts: exact binomial form below 25
/// discordant pairs, continuity-corrected chi-square above.
TestResult mcnemar_test(int b, int c);

/// Pearson chi-square test of independence on a 2x2 table, 1 df, optional
/// continuity correction (off by default). Rows are groups, columns outcomes.
TestResult chisq_independence(const std::array<std::array<long, 2>, 2>& table,
                              bool continuity_correction = false);

/// Two-sample proportion z-test with pooled variance, two-sided.
TestResult two_prop_ztest(int s1, int n1, int s2, int n2);

}  // namespace seqpgg
