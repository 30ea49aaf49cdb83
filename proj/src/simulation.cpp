#include "delaypred/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "delaypred/errors.hpp"

namespace delaypred {

namespace {

// Keeps all-zero rows free of "-0".
std::string cell(double v) { return format_double(v == 0.0 ? 0.0 : v); }

bool finite(const ExtendedState& z) {
  return z.x.allFinite() && z.y.allFinite();
}

}  // namespace

void Trajectory::write_csv(std::ostream& out) const {
  if (steps.empty()) return;
  const Eigen::Index n = steps.front().x.size();
  const Eigen::Index r = steps.front().y.size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= r; ++i) out << ",y_" << i;
  out << ",u,d,vbar\n";
  for (const auto& rec : steps) {
    out << rec.t;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << cell(rec.x(i));
    for (Eigen::Index i = 0; i < r; ++i) out << ',' << cell(rec.y(i));
    out << ',' << cell(rec.u) << ',' << cell(rec.d) << ',';
    if (rec.vbar) out << cell(*rec.vbar);
    out << '\n';
  }
}

Trajectory simulate(const LinearPlant& plant, const Policy& policy,
                    const DisturbanceStrategy& strategy,
                    const ExtendedState& z0, int T,
                    const SimulationContext& ctx) {
  if (T < 1) throw ArgumentError("T must be >= 1");
  if (z0.x.size() != plant.n() || z0.y.size() != plant.r())
    throw ArgumentError("initial state dimension does not match the plant");
  const double a = plant.a();
  if (strategy.kind == DisturbanceStrategy::Kind::constant &&
      !(std::abs(strategy.value) <= a))
    throw ArgumentError("constant disturbance exceeds the bound a");
  const QuadraticLyapunov* vbar =
      ctx.lyapunov ? ctx.lyapunov : (ctx.setup ? &ctx.setup->lyapunov() : nullptr);
  if (strategy.kind == DisturbanceStrategy::Kind::greedy_adversary && !vbar)
    throw ArgumentError("greedy adversary needs a Lyapunov function or setup");

  Rng rng(strategy.seed);
  Trajectory traj;
  traj.steps.reserve(static_cast<std::size_t>(T) + 1);
  ExtendedState z = z0;
  for (int t = 0; t <= T; ++t) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.x = z.x;
    rec.y = z.y;
    rec.u = policy(z);
    switch (strategy.kind) {
      case DisturbanceStrategy::Kind::zero:
        rec.d = 0.0;
        break;
      case DisturbanceStrategy::Kind::constant:
        rec.d = strategy.value;
        break;
      case DisturbanceStrategy::Kind::uniform_random:
        rec.d = rng.uniform(-a, a);
        break;
      case DisturbanceStrategy::Kind::greedy_adversary:
        if (ctx.setup) {
          const double s = eval_kappa(*ctx.setup, z) +
                           eval_L(*ctx.setup, z.x) * rec.u;
          rec.d = s > 0.0 ? a : (s < 0.0 ? -a : 0.0);
        } else {
          double best = -1.0;
          for (double d : {0.0, -a, a}) {
            const double v = (*vbar)(step_extended(plant, z, rec.u, d));
            if (v > best) {
              best = v;
              rec.d = d;
            }
          }
        }
        break;
    }
    if (vbar) rec.vbar = (*vbar)(z);
    const bool ok = std::isfinite(rec.u);
    traj.steps.push_back(std::move(rec));
    if (!ok) {
      traj.diverged = true;
      break;
    }
    if (t == T) break;
    const auto& last = traj.steps.back();
    ExtendedState next = step_extended(plant, z, last.u, last.d);
    if (!finite(next)) {
      traj.diverged = true;
      break;
    }
    z = std::move(next);
  }
  return traj;
}

std::vector<Trajectory> simulate_batch(const LinearPlant& plant,
                                       const Policy& policy,
                                       const DisturbanceStrategy& strategy,
                                       const std::vector<ExtendedState>& z0s,
                                       int T, const SimulationContext& ctx) {
  std::vector<Trajectory> out(z0s.size());
  parallel_chunks(z0s.size(), [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      DisturbanceStrategy s = strategy;
      s.seed = seed_for(strategy.seed, i);
      out[i] = simulate(plant, policy, s, z0s[i], T, ctx);
    }
  });
  return out;
}

double decay_rate(const Trajectory& traj) {
  double worst = 0.0;
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    if (!traj.steps[t].vbar)
      throw ArgumentError("trajectory has no vbar column");
    if (t + 1 == traj.steps.size()) break;
    const double v = *traj.steps[t].vbar;
    if (v < 1e-300) continue;
    if (!traj.steps[t + 1].vbar)
      throw ArgumentError("trajectory has no vbar column");
    worst = std::max(worst, *traj.steps[t + 1].vbar / v);
  }
  return worst;
}

bool adversary_endpoint_check(const RedesignSetup& setup,
                              const ExtendedState& z, double u) {
  const double a = setup.plant().a();
  if (a == 0.0) return true;
  constexpr int kGrid = 1000;
  const auto value = [&](double d) {
    return setup.lyapunov()(step_extended(setup.plant(), z, u, d));
  };
  const double ends = std::max(value(-a), value(a));
  const double tol = 1e-12 * std::max(1.0, std::abs(ends));
  for (int i = 1; i < kGrid - 1; ++i) {
    const double d = -a + 2.0 * a * i / (kGrid - 1);
    if (value(d) > ends + tol) return false;
  }
  return true;
}

}  // namespace delaypred
