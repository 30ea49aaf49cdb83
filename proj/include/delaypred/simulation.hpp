#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "delaypred/backstepping.hpp"
#include "delaypred/core_model.hpp"
#include "delaypred/numerics.hpp"
#include "delaypred/redesign.hpp"

namespace delaypred {

/// How d(t) is chosen; the magnitude bound a comes from the plant.
struct DisturbanceStrategy {
  enum class Kind { zero, constant, uniform_random, greedy_adversary };

  Kind kind = Kind::zero;
  double value = 0.0;  // constant only
  std::uint64_t seed = kDefaultSeed;  // uniform_random only

  static DisturbanceStrategy zero() { return {}; }
  static DisturbanceStrategy constant(double v) { return {Kind::constant, v}; }
  static DisturbanceStrategy uniform_random(std::uint64_t seed) {
    return {Kind::uniform_random, 0.0, seed};
  }
  static DisturbanceStrategy greedy_adversary() {
    return {Kind::greedy_adversary};
  }
};

struct TrajectoryRecord {
  int t = 0;
  VectorXd x;
  VectorXd y;
  double u = 0.0;
  double d = 0.0;
  std::optional<double> vbar;
};

/// steps[t] holds z(t) together with the u(t), d(t) applied to it, so a run of
/// T steps has T + 1 records.
struct Trajectory {
  std::vector<TrajectoryRecord> steps;
  bool diverged = false;

  /// CSV `t,x_1..x_n,y_1..y_r,u,d,vbar`, 17 significant digits; vbar is empty
  /// when no Lyapunov function was attached.
  void write_csv(std::ostream& out) const;
};

/// Optional certificate attached to a run. With `setup` the greedy adversary
/// plays d = a sign(kappa + L u), sign(0) = 0; otherwise it maximises
/// V-bar(z+) over {0, -a, a}, ties keeping the earlier candidate. V-bar is
/// recorded from `lyapunov`, or from the setup.
struct SimulationContext {
  const QuadraticLyapunov* lyapunov = nullptr;
  const RedesignSetup* setup = nullptr;
};

/// Iterates z(t+1) = step_extended(plant, z(t), policy(z(t)), d(t)). A
/// non-finite state ends the run with `diverged` set.
Trajectory simulate(const LinearPlant& plant, const Policy& policy,
                    const DisturbanceStrategy& strategy,
                    const ExtendedState& z0, int T,
                    const SimulationContext& ctx = {});

/// Runs one trajectory per initial state in parallel. uniform_random runs use
/// seed_for(strategy.seed, index).
std::vector<Trajectory> simulate_batch(const LinearPlant& plant,
                                       const Policy& policy,
                                       const DisturbanceStrategy& strategy,
                                       const std::vector<ExtendedState>& z0s,
                                       int T,
                                       const SimulationContext& ctx = {});

/// max_t vbar(t+1)/vbar(t) over steps with vbar(t) >= 1e-300 (0 if none).
double decay_rate(const Trajectory& traj);

/// True iff the maximum of V-bar(z+) over a 1000-point grid on [-a, a] is
/// attained at an endpoint.
bool adversary_endpoint_check(const RedesignSetup& setup,
                              const ExtendedState& z, double u);

}  // namespace delaypred
