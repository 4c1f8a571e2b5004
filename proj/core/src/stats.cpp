#include "seqpgg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/distributions/beta.hpp>

#include "seqpgg/types.hpp"

namespace seqpgg {

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Upper tail of chi-square with 1 df.
double chisq1_sf(double x) { return std::erfc(std::sqrt(x / 2.0)); }

double log_binom_pmf(int k, int n, double p) {
  const double lc =
      std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  const double lp = (k == 0) ? 0.0 : k * std::log(p);
  const double lq = (k == n) ? 0.0 : (n - k) * std::log1p(-p);
  return lc + lp + lq;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

TestResult binomial_test(int successes, int trials, double p0) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw DomainError("successes must be in [0, trials]");
  if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("p0 must be in (0, 1)");

  // Sum the probability of every outcome at most as likely as the observed
  // one. The relative slack absorbs ties lost to rounding.
  const double log_obs = log_binom_pmf(successes, trials, p0);
  const double cutoff = log_obs + 1e-7;
  double p = 0.0;
  for (int i = 0; i <= trials; ++i) {
    const double lp = log_binom_pmf(i, trials, p0);
    if (lp <= cutoff) p += std::exp(lp);
  }
  TestResult out;
  out.statistic = static_cast<double>(successes) / trials;
  out.p_value = std::min(1.0, p);
  out.method = "exact binomial (two-sided)";
  out.inputs = "k=" + std::to_string(successes) + " n=" + std::to_string(trials) +
               " p0=" + fmt(p0);
  return out;
}

HpdInterval beta_hpd(double successes, double failures, double prior_a, double prior_b,
                     double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw DomainError("mass must be in (0, 1)");
  if (!(prior_a > 0.0 && prior_b > 0.0)) throw DomainError("prior shapes must be > 0");
  if (successes < 0.0 || failures < 0.0)
    throw DomainError("counts must be nonnegative");

  const double a = prior_a + successes;
  const double b = prior_b + failures;
  boost::math::beta_distribution<double> post(a, b);

  HpdInterval out;
  if (a < 1.0 || b < 1.0) {
    // Not unimodal on (0,1): fall back to the equal-tail interval.
    out.lower = boost::math::quantile(post, (1.0 - mass) / 2.0);
    out.upper = boost::math::quantile(post, 1.0 - (1.0 - mass) / 2.0);
    out.equal_tail_fallback = true;
    return out;
  }

  // Shortest interval of given mass: minimize width over the left tail
  // probability. The beta density with both shapes >= 1 is log-concave, so
  // the width is unimodal in t and golden-section search converges to the
  // unique minimum, where the endpoint densities are equal.
  auto width = [&](double t) {
    return boost::math::quantile(post, t + mass) - boost::math::quantile(post, t);
  };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0 - mass;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = width(x1), f2 = width(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = width(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = width(x2);
    }
  }
  const double t = 0.5 * (lo + hi);
  out.lower = boost::math::quantile(post, t);
  out.upper = boost::math::quantile(post, t + mass);
  return out;
}

TestResult mcnemar_test(int b, int c) {
  if (b < 0 || c < 0) throw DomainError("discordant counts must be nonnegative");
  TestResult out;
  out.inputs = "b=" + std::to_string(b) + " c=" + std::to_string(c);
  const int nd = b + c;
  if (nd == 0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    out.method = "mcnemar (degenerate)";
    out.warning = "no discordant pairs; p = 1 by convention";
    return out;
  }
  if (nd < 25) {
    // Exact binomial form on the discordant pairs.
    const int k = std::min(b, c);
    double tail = 0.0;
    for (int i = 0; i <= k; ++i) tail += std::exp(log_binom_pmf(i, nd, 0.5));
    out.statistic = static_cast<double>(k);
    out.p_value = std::min(1.0, 2.0 * tail);
    out.method = "mcnemar (exact binomial)";
    return out;
  }
  const double stat = (std::abs(b - c) - 1.0) * (std::abs(b - c) - 1.0) / nd;
  out.statistic = stat;
  out.p_value = chisq1_sf(stat);
  out.method = "mcnemar (chi-square, continuity-corrected)";
  return out;
}

TestResult chisq_independence(const std::array<std::array<long, 2>, 2>& table,
                              bool continuity_correction) {
  for (const auto& row : table)
    for (long v : row)
      if (v < 0) throw DomainError("counts must be nonnegative");
  const double r0 = static_cast<double>(table[0][0] + table[0][1]);
  const double r1 = static_cast<double>(table[1][0] + table[1][1]);
  const double c0 = static_cast<double>(table[0][0] + table[1][0]);
  const double c1 = static_cast<double>(table[0][1] + table[1][1]);
  if (r0 == 0 || r1 == 0 || c0 == 0 || c1 == 0)
    throw DomainError("chi-square test undefined with a zero marginal");
  const double n = r0 + r1;

  double stat = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = (i == 0 ? r0 : r1) * (j == 0 ? c0 : c1) / n;
      double dev = std::abs(table[i][j] - expected);
      if (continuity_correction) dev = std::max(0.0, dev - 0.5);
      stat += dev * dev / expected;
    }
  }
  TestResult out;
  out.statistic = stat;
  out.p_value = chisq1_sf(stat);
  out.method = continuity_correction ? "chi-square independence (Yates)"
                                     : "chi-square independence";
  out.inputs = "[[" + std::to_string(table[0][0]) + "," + std::to_string(table[0][1]) +
               "],[" + std::to_string(table[1][0]) + "," + std::to_string(table[1][1]) +
               "]]";
  return out;
}

TestResult two_prop_ztest(int s1, int n1, int s2, int n2) {
  if (n1 < 1 || n2 < 1) throw DomainError("sample sizes must be >= 1");
  if (s1 < 0 || s1 > n1 || s2 < 0 || s2 > n2)
    throw DomainError("successes must be in [0, n]");
  TestResult out;
  out.inputs = std::to_string(s1) + "/" + std::to_string(n1) + " vs " +
               std::to_string(s2) + "/" + std::to_string(n2);
  out.method = "two-proportion z (pooled)";
  const double p1 = static_cast<double>(s1) / n1;
  const double p2 = static_cast<double>(s2) / n2;
  const double pooled = static_cast<double>(s1 + s2) / (n1 + n2);
  if (pooled == 0.0 || pooled == 1.0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    out.warning = "pooled proportion degenerate; p = 1 by convention";
    return out;
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
  out.statistic = (p1 - p2) / se;
  out.p_value = 2.0 * normal_sf(std::abs(out.statistic));
  return out;
}

}  // namespace seqpgg
