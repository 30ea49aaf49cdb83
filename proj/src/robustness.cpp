#include "delaypred/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delaypred/backstepping.hpp"
#include "delaypred/core_model.hpp"
#include "delaypred/errors.hpp"
#include "delaypred/simulation.hpp"

namespace delaypred {

double necessary_bound(int r) {
  if (r < 0) throw ArgumentError("r must be >= 0");
  return 1.0 / (r + 1);
}

double delay_weight(int r, double c) {
  if (r < 2) throw ArgumentError("delay_weight needs r >= 2");
  if (!(c > 1.0)) throw ArgumentError("delay_weight needs c > 1");
  // (c^{r+1} - c^r + c^{r-1} - c) / (c-1)^2 with the common factor (c-1)
  // cancelled: [c^r + c (1 + c + ... + c^{r-3})] / (c-1).
  double geometric = 0.0;
  double cj = 1.0;
  for (int j = 0; j <= r - 3; ++j) {
    geometric += cj;
    cj *= c;
  }
  return (std::pow(c, r) + c * geometric) / (c - 1.0);
}

double sufficient_objective(int r, double c, double s) {
  const double h = delay_weight(r, c);
  return s / (1.0 + s * (1.0 + h) + s * s * h);
}

double optimal_s(int r, double c) { return 1.0 / std::sqrt(delay_weight(r, c)); }

RobustnessBound sufficient_bound(int r) {
  if (r < 0) throw ArgumentError("r must be >= 0");
  RobustnessBound out;
  out.r = r;
  out.necessary = necessary_bound(r);
  if (r == 0) {
    out.sufficient = 1.0;
    return out;
  }
  if (r == 1) {
    const auto opt = golden_section_maximize(
        [](double q) { return (q - 1.0) / (q * q); }, 1.0, 64.0, 1e-10);
    out.sufficient = std::sqrt(opt.value);
    out.s_star = opt.argmax - 1.0;
    return out;
  }

  const auto objective = [r](double c) {
    return sufficient_objective(r, c, optimal_s(r, c));
  };
  constexpr int kGrid = 200;
  const double log_lo = std::log(1e-6);
  const double log_hi = std::log(63.0);
  std::vector<double> grid(kGrid);
  for (int j = 0; j < kGrid; ++j)
    grid[j] = 1.0 + std::exp(log_lo + (log_hi - log_lo) * j / (kGrid - 1));
  int best = 0;
  double best_value = objective(grid[0]);
  for (int j = 1; j < kGrid; ++j) {
    const double v = objective(grid[j]);
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  if (best == 0 || best == kGrid - 1) {
    std::ostringstream os;
    os << "sufficient_bound(r=" << r << "): maximiser at the bracket edge c = "
       << grid[best] << " (objective " << best_value << ")";
    throw NumericalError(os.str());
  }
  const auto opt =
      golden_section_maximize(objective, grid[best - 1], grid[best + 1], 1e-10);
  out.sufficient = std::sqrt(opt.value);
  out.c_star = opt.argmax;
  out.s_star = optimal_s(r, opt.argmax);
  return out;
}

std::vector<RobustnessBound> table1() {
  std::vector<int> rows;
  for (int r = 0; r <= 10; ++r) rows.push_back(r);
  rows.push_back(15);
  rows.push_back(20);
  std::vector<RobustnessBound> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(sufficient_bound(r));
  return out;
}

namespace {

Policy integrator_feedback(const LinearPlant& plant) {
  const ScalarExamplePlant example(plant.a(), plant.r(), 1.0);
  const NominalStabilizer stab = example.stabilizer();
  return [plant, stab](const ExtendedState& z) {
    return nominal_predictor_feedback(plant, stab, z);
  };
}

}  // namespace

double constant_solution_check(int r, double x0, int T, double d) {
  if (r < 1) throw ArgumentError("r must be >= 1");
  if (x0 == 0.0) throw ArgumentError("x0 must be non-zero");
  if (T < 1) throw ArgumentError("T must be >= 1");
  const LinearPlant plant = LinearPlant::scalar_integrator(std::abs(d), r);
  ExtendedState z0 = ExtendedState::zero(1, r);
  z0.x(0) = x0;
  z0.y.setConstant(-x0 / (r + 1));
  const Trajectory traj = simulate(plant, integrator_feedback(plant),
                                   DisturbanceStrategy::constant(d), z0, T);
  double deviation = 0.0;
  for (const auto& rec : traj.steps)
    deviation = std::max(deviation, std::abs(rec.x(0) - x0));
  return deviation;
}

double constant_solution_check(int r, double x0, int T) {
  return constant_solution_check(r, x0, T, 1.0 / (r + 1));
}

bool empirical_margin(int r, double a, int trials, std::uint64_t seed) {
  if (r < 0) throw ArgumentError("r must be >= 0");
  if (!(a >= 0.0)) throw ArgumentError("a must be >= 0");
  if (trials < 1) throw ArgumentError("trials must be >= 1");
  const LinearPlant plant = LinearPlant::scalar_integrator(a, r);
  const NominalStabilizer stab = ScalarExamplePlant(a, r, 1.0).stabilizer();

  // V-bar with the constants that certify the sufficient bound.
  BacksteppingCertificate cert;
  if (r == 1) {
    cert = BacksteppingCertificate::make(2.0, 0.0, 0.0, 0.0);
  } else if (r >= 2) {
    const RobustnessBound bound = sufficient_bound(r);
    const double c = *bound.c_star;
    cert = BacksteppingCertificate::make(c, (*bound.s_star + 1.0) / c - 1.0,
                                         0.0, 0.0);
  }
  const QuadraticLyapunov vbar(plant, stab, cert);
  const Policy policy = integrator_feedback(plant);
  const SimulationContext ctx{&vbar, nullptr};
  constexpr int kSteps = 200;

  std::vector<char> ok(static_cast<std::size_t>(trials), 0);
  parallel_chunks(ok.size(), [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      const std::uint64_t trial_seed = seed_for(seed, i);
      Rng rng(trial_seed);
      ExtendedState z0 = ExtendedState::zero(1, r);
      z0.x(0) = rng.normal();
      for (int j = 0; j < r; ++j) z0.y(j) = rng.normal();
      DisturbanceStrategy strategy;
      switch (i % 4) {
        case 0:
          strategy = DisturbanceStrategy::uniform_random(splitmix64(trial_seed));
          break;
        case 1:
          strategy = DisturbanceStrategy::greedy_adversary();
          break;
        case 2:
          strategy = DisturbanceStrategy::constant(a);
          break;
        default:
          strategy = DisturbanceStrategy::constant(-a);
          break;
      }
      const Trajectory traj = simulate(plant, policy, strategy, z0, kSteps, ctx);
      const double v0 = *traj.steps.front().vbar;
      ok[i] = !traj.diverged && v0 > 0.0 &&
              *traj.steps.back().vbar < 1e-6 * v0;
    }
  });
  return std::all_of(ok.begin(), ok.end(), [](char v) { return v != 0; });
}

}  // namespace delaypred
