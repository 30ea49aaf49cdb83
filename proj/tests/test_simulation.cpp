#include <doctest.h>

#include <cmath>
#include <sstream>

#include "delaypred/errors.hpp"
#include "delaypred/simulation.hpp"
#include "test_util.hpp"

using namespace delaypred;
using namespace delaypred::testing;

namespace {

ExtendedState scalar_state(double x, std::vector<double> y) {
  VectorXd yv(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) yv(static_cast<Eigen::Index>(i)) = y[i];
  return {VectorXd::Constant(1, x), yv};
}

Policy nominal(const LinearPlant& plant, const NominalStabilizer& stab) {
  return [&plant, &stab](const ExtendedState& z) {
    return nominal_predictor_feedback(plant, stab, z);
  };
}

}  // namespace

TEST_CASE("predictor feedback is dead-beat on the delayed integrator") {
  const ScalarExamplePlant ex(0.0, 3);
  const LinearPlant plant = ex.plant();
  const NominalStabilizer stab = ex.stabilizer();
  const auto traj = simulate(plant, nominal(plant, stab), DisturbanceStrategy::zero(),
                             scalar_state(1.0, {0, 0, 0}), 10);
  REQUIRE(traj.steps.size() == 11);
  CHECK_FALSE(traj.diverged);
  for (int t = 0; t <= 3; ++t) CHECK(traj.steps[t].x(0) == 1.0);
  for (int t = 4; t <= 10; ++t) CHECK(traj.steps[t].x(0) == 0.0);
  CHECK(traj.steps[0].u == -1.0);
  CHECK_FALSE(traj.steps[0].vbar.has_value());
  for (std::size_t t = 0; t < traj.steps.size(); ++t) CHECK(traj.steps[t].t == static_cast<int>(t));
}

TEST_CASE("constant disturbance at 1/(r+1) holds the state") {
  for (int r : {1, 2, 4}) {
    const double a = 1.0 / (r + 1);
    const ScalarExamplePlant ex(a, r);
    const LinearPlant plant = ex.plant();
    const NominalStabilizer stab = ex.stabilizer();
    const double x0 = 2.0;
    const ExtendedState z0{VectorXd::Constant(1, x0), VectorXd::Constant(r, -x0 * a)};
    const auto traj = simulate(plant, nominal(plant, stab), DisturbanceStrategy::constant(a),
                               z0, 60);
    for (const auto& rec : traj.steps) {
      CHECK(std::abs(rec.x(0) - x0) <= 1e-12);
      CHECK(rec.d == a);
    }
  }
  const ScalarExamplePlant ex(0.2, 1);
  const LinearPlant plant = ex.plant();
  const NominalStabilizer stab = ex.stabilizer();
  CHECK_THROWS_AS(simulate(plant, nominal(plant, stab), DisturbanceStrategy::constant(0.3),
                           scalar_state(1.0, {0.0}), 5),
                  ArgumentError);
}

TEST_CASE("zero state stays at zero") {
  Rng rng(5);
  const auto sp = random_stabilized(rng, 3, 2, 0.3);
  const auto cert = BacksteppingCertificate::make(2.0 / (1.0 - sp.stab.lambda()), 1.0, 0.9,
                                                  sp.stab.lambda());
  const RedesignSetup setup(sp.plant, sp.stab, cert);
  const Policy pol = [&setup](const ExtendedState& z) {
    return redesigned_feedback(setup, z, setup.plant().a());
  };
  for (const auto& strat : {DisturbanceStrategy::zero(), DisturbanceStrategy::greedy_adversary(),
                            DisturbanceStrategy::uniform_random(9)}) {
    SimulationContext ctx;
    ctx.setup = &setup;
    const auto traj = simulate(sp.plant, pol, strat, ExtendedState::zero(3, 2), 20, ctx);
    for (const auto& rec : traj.steps) {
      CHECK(rec.x.norm() == 0.0);
      CHECK(rec.y.norm() == 0.0);
      CHECK(*rec.vbar == 0.0);
    }
    CHECK(decay_rate(traj) == 0.0);
  }
}

TEST_CASE("uniform random disturbances replay and stay in range") {
  const ScalarExamplePlant ex(0.3, 2);
  const LinearPlant plant = ex.plant();
  const NominalStabilizer stab = ex.stabilizer();
  const auto z0 = scalar_state(1.0, {0.5, -0.5});
  const auto a = simulate(plant, nominal(plant, stab), DisturbanceStrategy::uniform_random(77),
                          z0, 50);
  const auto b = simulate(plant, nominal(plant, stab), DisturbanceStrategy::uniform_random(77),
                          z0, 50);
  const auto c = simulate(plant, nominal(plant, stab), DisturbanceStrategy::uniform_random(78),
                          z0, 50);
  bool differs = false;
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    CHECK(a.steps[t].d == b.steps[t].d);
    CHECK(a.steps[t].x(0) == b.steps[t].x(0));
    CHECK(std::abs(a.steps[t].d) <= 0.3);
    differs = differs || a.steps[t].d != c.steps[t].d;
  }
  CHECK(differs);

  // Batches are independent of the thread count and match single runs.
  std::vector<ExtendedState> z0s;
  for (int i = 0; i < 9; ++i) z0s.push_back(scalar_state(0.1 * i, {0.0, 1.0}));
  const auto batch = simulate_batch(plant, nominal(plant, stab),
                                    DisturbanceStrategy::uniform_random(5), z0s, 30);
  REQUIRE(batch.size() == z0s.size());
  for (std::size_t i = 0; i < z0s.size(); ++i) {
    const auto single = simulate(plant, nominal(plant, stab),
                                 DisturbanceStrategy::uniform_random(seed_for(5, i)), z0s[i], 30);
    for (std::size_t t = 0; t < single.steps.size(); ++t)
      CHECK(batch[i].steps[t].x(0) == single.steps[t].x(0));
  }
}

TEST_CASE("greedy adversary picks the worse endpoint") {
  Rng rng(21);
  const auto sp = random_stabilized(rng, 2, 2, 0.4);
  const auto cert = BacksteppingCertificate::make(2.0 / (1.0 - sp.stab.lambda()), 1.0, 0.9,
                                                  sp.stab.lambda());
  const RedesignSetup setup(sp.plant, sp.stab, cert);
  const QuadraticLyapunov& V = setup.lyapunov();
  const Policy pol = nominal(sp.plant, sp.stab);
  SimulationContext with_setup;
  with_setup.setup = &setup;
  SimulationContext lyap_only;
  lyap_only.lyapunov = &V;
  const auto z0 = random_state(rng, 2, 2);
  const auto t1 = simulate(sp.plant, pol, DisturbanceStrategy::greedy_adversary(), z0, 15,
                           with_setup);
  const auto t2 = simulate(sp.plant, pol, DisturbanceStrategy::greedy_adversary(), z0, 15,
                           lyap_only);
  for (std::size_t t = 0; t + 1 < t1.steps.size(); ++t) {
    const auto& rec = t1.steps[t];
    const ExtendedState z{rec.x, rec.y};
    const double here = V(step_extended(sp.plant, z, rec.u, rec.d));
    const double other = V(step_extended(sp.plant, z, rec.u, -rec.d));
    CHECK(here >= other - 1e-12 * (1.0 + here));
    CHECK(std::abs(rec.d) == doctest::Approx(0.4));
    CHECK(t2.steps[t].d == doctest::Approx(rec.d));
  }
  CHECK_THROWS_AS(simulate(sp.plant, pol, DisturbanceStrategy::greedy_adversary(), z0, 3),
                  ArgumentError);
}

TEST_CASE("divergence is flagged") {
  const LinearPlant plant(MatrixXd::Constant(1, 1, 1e200), VectorXd::Ones(1),
                          MatrixXd::Ones(1, 1), 0.0, 1);
  const Policy zero = [](const ExtendedState&) { return 0.0; };
  const auto traj = simulate(plant, zero, DisturbanceStrategy::zero(), scalar_state(1.0, {0.0}), 10);
  CHECK(traj.diverged);
  CHECK(traj.steps.size() < 11);
}

TEST_CASE("decay rate") {
  Trajectory traj;
  for (int t = 0; t < 4; ++t) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.vbar = std::pow(0.5, t) * (t == 2 ? 1.5 : 1.0);
    traj.steps.push_back(rec);
  }
  // Ratios 0.5, 0.75, 1/3.
  CHECK(decay_rate(traj) == doctest::Approx(0.75));
  traj.steps[1].vbar.reset();
  CHECK_THROWS_AS(decay_rate(traj), ArgumentError);
}

TEST_CASE("endpoint check") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto sp = random_stabilized(rng, 1 + trial % 3, 1 + trial % 3, 0.5);
    const auto cert = BacksteppingCertificate::make(2.0 / (1.0 - sp.stab.lambda()),
                                                    rng.uniform(0.0, 2.0), 0.9,
                                                    sp.stab.lambda());
    const RedesignSetup setup(sp.plant, sp.stab, cert);
    const auto z = random_state(rng, sp.plant.n(), sp.plant.r());
    CHECK(adversary_endpoint_check(setup, z, rng.normal()));
  }
}

TEST_CASE("csv layout") {
  const ScalarExamplePlant ex(0.0, 2);
  const LinearPlant plant = ex.plant();
  const NominalStabilizer stab = ex.stabilizer();
  const QuadraticLyapunov V(plant, stab, BacksteppingCertificate{});
  SimulationContext ctx;
  ctx.lyapunov = &V;
  const auto traj = simulate(plant, nominal(plant, stab), DisturbanceStrategy::zero(),
                             scalar_state(0.25, {0.0, 0.0}), 2, ctx);
  std::ostringstream out;
  traj.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x_1,y_1,y_2,u,d,vbar");
  std::getline(in, line);
  CHECK(line.rfind("0,0.25,0,0,-0.25,0,", 0) == 0);
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);

  Trajectory bare = simulate(plant, nominal(plant, stab), DisturbanceStrategy::zero(),
                             scalar_state(1.0, {0.0, 0.0}), 1);
  std::ostringstream out2;
  bare.write_csv(out2);
  CHECK(out2.str().find("0,1,0,0,-1,0,\n") != std::string::npos);
}
