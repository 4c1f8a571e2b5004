#include "seqpgg/equilibrium.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace seqpgg {

namespace {

void check_window(int n, int m) {
  if (n < 2) throw DomainError("n must be >= 2, got " + std::to_string(n));
  if (m < 1 || m > n - 1)
    throw DomainError("m must be in [1, n-1], got m=" + std::to_string(m) +
                      " with n=" + std::to_string(n));
}

double binom(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// The forgiveness fixed point is
//   2/g - (n-1)(1-(1-g)^n) / (g n - 1 + (1-g)^n) = n/r.
// Both 1-(1-g)^n and g n - 1 + (1-g)^n vanish at g=0, which makes the direct
// form catastrophically ill-conditioned for small g. Expanding (1-g)^n
// binomially and cancelling the common factors of g exactly gives
//   F(g) = H(g)/P(g) - n/r,
//   H(g) = sum_{j>=1} (-1)^j [2 C(n,j+2) - (n-1) C(n,j+1)] g^{j-1},
//   P(g) = sum_{k>=2} (-1)^k C(n,k) g^{k-2},
// (the j=0 coefficient of H is identically zero). F decreases from
// (n+1)/3 - n/r at g=0+ to 1 - n/r at g=1, so a sign change exists exactly
// when r lies in (3n/(n+1), n].
struct FixedPoint {
  std::vector<double> h;  // H coefficients, degree n-2
  std::vector<double> p;  // P coefficients, degree n-2

  explicit FixedPoint(int n) {
    for (int j = 1; j <= n - 1; ++j) {
      double c = 2.0 * binom(n, j + 2) - (n - 1) * binom(n, j + 1);
      h.push_back((j % 2 == 0) ? c : -c);
    }
    for (int k = 2; k <= n; ++k) {
      double c = binom(n, k);
      p.push_back((k % 2 == 0) ? c : -c);
    }
  }

  static double horner(const std::vector<double>& coeff, double x) {
    double v = 0.0;
    for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) v = v * x + *it;
    return v;
  }

  double operator()(double g, int n, double r) const {
    return horner(h, g) / horner(p, g) - n / r;
  }
};

}  // namespace

double pure_threshold(int n, int m) {
  check_window(n, m);
  return 2.0 * (1.0 + static_cast<double>(m - 1) / (n - m + 1));
}

double expected_defect_payoff_full_sample(int n, int m, double r) {
  check_window(n, m);
  if (!(r > 0.0)) throw DomainError("r must be positive");
  return r / n * (n + m - 1) / 2.0;
}

double mixed_region_lower(int n) {
  if (n < 2) throw DomainError("n must be >= 2");
  return 3.0 - 3.0 / (n + 1);
}

double solve_gamma(int n, double r) {
  if (n < 2) throw DomainError("n must be >= 2");
  const double lo_r = mixed_region_lower(n);
  if (!(r > lo_r) || r > static_cast<double>(n))
    throw RegionError("r=" + std::to_string(r) + " outside the mixed region (" +
                      std::to_string(lo_r) + ", " + std::to_string(n) + "]");

  const FixedPoint f(n);
  // Bracket excludes 0: the equation has a spurious root there once the
  // common g factors are cancelled analytically.
  double a = 1e-6, b = 1.0;
  double fa = f(a, n, r), fb = f(b, n, r);
  if (fb == 0.0) return 1.0;  // r == n exactly
  if (fa == 0.0) return a;
  if (fa * fb > 0.0)
    throw SolverError("no sign change on [1e-6, 1] for n=" + std::to_string(n) +
                      ", r=" + std::to_string(r));

  // Bisection to near machine precision; F' is O(1) on the bracket so the
  // residual of the defining equation ends far below the 1e-9 contract.
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid, n, r);
    if (fm == 0.0) return mid;
    if (fa * fm < 0.0) {
      b = mid;
    } else {
      a = mid;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

std::optional<int> unravel_position(int n, double r) {
  if (n < 2) throw DomainError("n must be >= 2");
  if (!(r > 1.0)) throw DomainError("r must exceed 1");
  GameConfig cfg;
  cfg.n = n;
  cfg.r = r;
  // Smallest position whose defection payoff (r/n)(t-1), after t-1
  // contributions, beats the r-1 from keeping full contribution alive.
  for (int t = 2; t <= n; ++t) {
    if (payoff_defect(t - 1, cfg) > r - 1.0) return t;
  }
  return std::nullopt;
}

EquilibriumSummary classify_regime(const GameConfig& cfg) {
  cfg.validate();
  EquilibriumSummary out;
  out.pure_threshold = pure_threshold(cfg.n, cfg.m);

  if (cfg.position_known) {
    // With r < n, late positions prefer defecting and full contribution
    // unravels by backward induction.
    out.pure_exists = false;
    out.unravel_position = unravel_position(cfg.n, cfg.r);
    return out;
  }

  if (cfg.m >= 2) {
    // Ties count as existing: the threshold inequality is weak.
    out.pure_exists = cfg.r >= out.pure_threshold;
    return out;
  }

  // Window of one: pure profile up to 3 - 3/(n+1), mixed forgiveness beyond.
  const double lo = mixed_region_lower(cfg.n);
  out.mixed_region = {lo, static_cast<double>(cfg.n)};
  if (cfg.r <= lo) {
    out.pure_exists = cfg.r >= out.pure_threshold;
  } else {
    out.pure_exists = false;
    out.gamma = solve_gamma(cfg.n, cfg.r);
  }
  return out;
}

}  // namespace seqpgg
