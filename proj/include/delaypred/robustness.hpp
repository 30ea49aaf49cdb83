#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "delaypred/numerics.hpp"

namespace delaypred {

/// Uncertainty bounds for the scalar integrator under u = -(x + y_1 + ... + y_r).
/// The robustness margin A_r lies in [sufficient, necessary].
struct RobustnessBound {
  int r = 0;
  double necessary = 0.0;
  double sufficient = 0.0;
  /// Optimising c (r >= 2 only).
  std::optional<double> c_star;
  /// Optimising s = c(1 + phi) - 1 (r >= 1).
  std::optional<double> s_star;
};

/// 1/(r+1): above it, d = 1/(r+1) admits a constant non-zero solution.
double necessary_bound(int r);

/// (c^{r+1} - c^r + c^{r-1} - c) / (c-1)^2, the weight that multiplies s in
/// the sufficient condition for r >= 2.
double delay_weight(int r, double c);

/// Right-hand side s / (1 + s(1+h) + s^2 h) of the sufficient condition on a^2.
double sufficient_objective(int r, double c, double s);

/// Maximiser of sufficient_objective over s for fixed c.
double optimal_s(int r, double c);

/// Certified lower estimate of A_r. r = 0 is analytic (1); r = 1 maximises
/// (q-1)/q^2 over q = c(1+phi); r >= 2 maximises over c > 1 with s = optimal_s.
RobustnessBound sufficient_bound(int r);

/// Rows r = 0..10, 15, 20.
std::vector<RobustnessBound> table1();

/// Closed loop with constant disturbance d and y_i(0) = -x0/(r+1); returns
/// max_t |x(t) - x0| over T steps.
double constant_solution_check(int r, double x0, int T, double d);
/// Same with d = 1/(r+1), the counterexample to robust stability.
double constant_solution_check(int r, double x0, int T);

/// Heuristic Monte Carlo check: random and greedy-adversarial disturbances of
/// magnitude a, random initial states; true iff every trajectory ends with
/// V-bar(200) < 1e-6 V-bar(0).
bool empirical_margin(int r, double a, int trials,
                      std::uint64_t seed = kDefaultSeed);

}  // namespace delaypred
