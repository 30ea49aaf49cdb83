#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "delaypred/errors.hpp"
#include "delaypred/redesign.hpp"
#include "delaypred/simulation.hpp"
#include "test_util.hpp"

using namespace delaypred;
using namespace delaypred::testing;

namespace {

RedesignSetup random_setup(Rng& rng, int n, int r, double a) {
  const auto sp = random_stabilized(rng, n, r, a);
  const double lambda = sp.stab.lambda();
  const auto cert = BacksteppingCertificate::make(
      2.0 / (1.0 - lambda), rng.uniform(0.1, 2.0), rng.uniform(0.5, 0.95), lambda);
  return RedesignSetup(sp.plant, sp.stab, cert);
}

RedesignSetup scalar_setup(double a, double q, double sigma, double beta = 1.0) {
  const ScalarExamplePlant ex(a, 1, beta);
  return RedesignSetup(ex.plant(), ex.stabilizer(),
                       BacksteppingCertificate::make(2.0, q / 2.0 - 1.0, sigma,
                                                     ex.stabilizer().lambda()));
}

double next_value(const RedesignSetup& s, const ExtendedState& z, double u, double d) {
  return s.lyapunov()(step_extended(s.plant(), z, u, d));
}

/// max over a d grid (including both endpoints) of V-bar(z+).
double brute_inner(const RedesignSetup& s, const ExtendedState& z, double u, int grid) {
  const double a = s.plant().a();
  double best = -1.0;
  for (int i = 0; i < grid; ++i) {
    const double d = grid == 1 ? 0.0 : std::clamp(-a + 2.0 * a * i / (grid - 1), -a, a);
    best = std::max(best, next_value(s, z, u, d));
  }
  return best;
}

/// Zooming u grid around the minimiser of the brute-force inner maximum.
double brute_minimax(const RedesignSetup& s, const ExtendedState& z, double centre,
                     double half_width) {
  double best_u = centre;
  double best = brute_inner(s, z, centre, 21);
  for (int round = 0; round < 8; ++round) {
    const double lo = best_u - half_width;
    for (int i = 0; i <= 40; ++i) {
      const double u = lo + 2.0 * half_width * i / 40.0;
      const double v = brute_inner(s, z, u, 21);
      if (v < best) {
        best = v;
        best_u = u;
      }
    }
    half_width /= 10.0;
  }
  return best;
}

}  // namespace

TEST_CASE("setup preconditions") {
  const ScalarExamplePlant ex0(0.2, 0, 1.0);
  CHECK_THROWS_AS(RedesignSetup(ex0.plant(), ex0.stabilizer(), BacksteppingCertificate{}),
                  ArgumentError);
  const ScalarExamplePlant ex(0.2, 1, 1.0);
  // B'PB + phi = 1 + phi <= 0 is impossible for phi > -1; use a zero B instead.
  const LinearPlant no_input(MatrixXd::Constant(1, 1, 0.5), VectorXd::Zero(1),
                             MatrixXd::Ones(1, 1), 0.2, 1);
  const NominalStabilizer stab(VectorXd::Zero(1), MatrixXd::Ones(1, 1), 0.25);
  CHECK_THROWS_AS(RedesignSetup(no_input, stab,
                                BacksteppingCertificate::make(8.0, -0.5, 0.0, 0.25)),
                  ArgumentError);
  CHECK_NOTHROW(RedesignSetup(ex.plant(), ex.stabilizer(), BacksteppingCertificate{}));
}

TEST_CASE("scalar coefficients by hand") {
  // Integrator, k = -1, P = 1, r = 1: with s = x + y1,
  // V-bar(z+) = ((1+d)x + y1)^2 + q((1+d)x + y1 + u)^2.
  const double q = 1.8;
  const RedesignSetup s = scalar_setup(0.4, q, 0.6);
  CHECK(s.p() == doctest::Approx(q));
  const ExtendedState z{VectorXd::Constant(1, 0.7), VectorXd::Constant(1, -0.2)};
  CHECK(eval_L(s, z.x) == doctest::Approx(q * 0.7));
  CHECK(eval_b(s, z) == doctest::Approx(q * 0.5));
  CHECK(eval_kappa(s, z) == doctest::Approx((1.0 + q) * 0.5 * 0.7));
}

TEST_CASE("V-bar(z+) decomposes into the coefficient functions") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    const int r = 1 + trial % 5;
    const double a = rng.uniform(0.05, 1.0);
    const RedesignSetup s = random_setup(rng, n, r, a);
    const double sigma = s.certificate().sigma;
    const ExtendedState z = random_state(rng, n, r);
    const double u = rng.normal();
    const double p = s.p(), b = eval_b(s, z), kappa = eval_kappa(s, z),
                 L = eval_L(s, z.x), resid = eval_resid(s, z, a, sigma),
                 v = s.lyapunov()(z);
    const auto model = [&](double d) {
      return p * u * u + 2 * b * u + 2 * d * (kappa + L * u) + resid + sigma * v;
    };
    const double scale = 1.0 + std::abs(next_value(s, z, u, a)) + std::abs(model(a));
    CHECK(std::abs(next_value(s, z, u, a) - model(a)) <= 1e-10 * scale);
    CHECK(std::abs(next_value(s, z, u, -a) - model(-a)) <= 1e-10 * scale);
    // The remainder is (d^2 - a^2) N with N >= 0.
    const double N = -(next_value(s, z, u, 0.0) - model(0.0)) / (a * a);
    CHECK(N >= -1e-9 * scale / (a * a));
    for (double f : {-0.7, -0.3, 0.2, 0.9}) {
      const double d = f * a;
      CHECK(std::abs(next_value(s, z, u, d) - model(d) - (d * d - a * a) * N) <=
            1e-9 * scale);
    }
    // d/dd V-bar(z+) at d = 0 equals 2(kappa + L u).
    const double h = 1e-6;
    const double fd = (next_value(s, z, u, h) - next_value(s, z, u, -h)) / (2 * h);
    CHECK(std::abs(fd - 2 * (kappa + L * u)) <= 1e-5 * (1.0 + std::abs(fd)));
    // Exact inner maximum.
    const double wcv = worst_case_value(s, z, u, a);
    CHECK(std::abs(wcv - std::max(next_value(s, z, u, a), next_value(s, z, u, -a))) <=
          1e-10 * scale);
  }
}

TEST_CASE("r = 1 setups use the collapsed index ranges") {
  Rng rng(103);
  for (int trial = 0; trial < 30; ++trial) {
    const RedesignSetup s = random_setup(rng, 1 + trial % 3, 1, 0.5);
    const ExtendedState z = random_state(rng, s.plant().n(), 1);
    const double u = rng.normal();
    const double wcv = worst_case_value(s, z, u, 0.5);
    const double brute = std::max(next_value(s, z, u, 0.5), next_value(s, z, u, -0.5));
    CHECK(std::abs(wcv - brute) <= 1e-10 * (1.0 + brute));
  }
}

TEST_CASE("compiled forms agree with the evaluators") {
  Rng rng(107);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const int r = 1 + trial % 4;
    const double a = rng.uniform(0.1, 0.8);
    const RedesignSetup s = random_setup(rng, n, r, a);
    const CompiledCoefficients cc = compile_coefficients(s, a);
    for (int k = 0; k < 10; ++k) {
      const ExtendedState z = random_state(rng, n, r);
      const VectorXd v = z.stacked();
      const double kappa = eval_kappa(s, z);
      const double resid = eval_resid(s, z, a, s.certificate().sigma);
      CHECK(std::abs(v.dot(cc.kappa * v) - kappa) <= 1e-9 * (1.0 + std::abs(kappa)));
      CHECK(std::abs(v.dot(cc.resid * v) - resid) <= 1e-9 * (1.0 + std::abs(resid)));
      const VectorXd av = v.cwiseAbs();
      CHECK(std::abs(cc.l.dot(v) - eval_L(s, z.x)) <= 1e-12 * (1.0 + cc.l.cwiseAbs().dot(av)));
      CHECK(std::abs(cc.b.dot(v) - eval_b(s, z)) <= 1e-12 * (1.0 + cc.b.cwiseAbs().dot(av)));
    }
  }
}

TEST_CASE("redesigned feedback is the minimax input") {
  Rng rng(109);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const int r = 1 + trial % 3;
    const double a = rng.uniform(0.05, 1.0);
    const RedesignSetup s = random_setup(rng, n, r, a);
    const ExtendedState z = random_state(rng, n, r);
    const double u = redesigned_feedback(s, z, a);
    const double mine = worst_case_value(s, z, u, a);
    const double brute = brute_minimax(s, z, u, 2.0 * (1.0 + std::abs(u)));
    CHECK(mine <= brute * (1.0 + 1e-6) + 1e-12);
    CHECK(std::abs(mine - brute) <= 1e-6 * std::abs(brute) + 1e-12);
    CHECK(adversary_endpoint_check(s, z, u));
  }
}

TEST_CASE("feedback structure") {
  Rng rng(113);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 3;
    const int r = 1 + trial % 4;
    const double a = rng.uniform(0.05, 1.0);
    const RedesignSetup s = random_setup(rng, n, r, a);
    CHECK(redesigned_feedback(s, ExtendedState::zero(n, r), a) == 0.0);
    const ExtendedState z = random_state(rng, n, r);
    const double u = redesigned_feedback(s, z, a);
    for (double tau : {1e-3, 0.5, 3.0, 1e4}) {
      const ExtendedState zt{tau * z.x, tau * z.y};
      CHECK(std::abs(redesigned_feedback(s, zt, a) - tau * u) <=
            1e-12 * tau * (1.0 + std::abs(u)) * 10);
    }
    // a = 0 collapses to the unconstrained minimiser -b/p.
    CHECK(redesigned_feedback(s, z, 0.0) == doctest::Approx(-eval_b(s, z) / s.p()));
  }
}

TEST_CASE("branch continuity at region boundaries") {
  Rng rng(127);
  int crossings = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 3;
    const int r = 1 + trial % 3;
    const double a = rng.uniform(0.1, 1.0);
    const RedesignSetup s = random_setup(rng, n, r, a);
    const ExtendedState z0 = random_state(rng, n, r);
    const ExtendedState z1 = random_state(rng, n, r);
    auto at = [&](double t) {
      return ExtendedState{(1 - t) * z0.x + t * z1.x, (1 - t) * z0.y + t * z1.y};
    };
    // Walk the segment and bisect every change of region to the boundary.
    Region prev = classify_region(s, at(0.0), a);
    const int steps = 400;
    for (int i = 1; i <= steps; ++i) {
      const double t1 = static_cast<double>(i) / steps;
      const Region cur = classify_region(s, at(t1), a);
      if (cur == prev) continue;
      double lo = t1 - 1.0 / steps, hi = t1;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (classify_region(s, at(mid), a) == prev ? lo : hi) = mid;
      }
      const double ulo = redesigned_feedback(s, at(lo), a);
      const double uhi = redesigned_feedback(s, at(hi), a);
      CHECK(std::abs(ulo - uhi) <= 1e-9 * (1.0 + std::abs(ulo)));
      ++crossings;
      prev = cur;
    }
  }
  CHECK(crossings > 10);
}

TEST_CASE("sigma grid") {
  const auto grid = sigma_grid(BacksteppingCertificate::make(2.0, 1.0, 0.0, 0.0));
  REQUIRE(grid.size() == 100);
  CHECK(grid.front() == 0.5);
  CHECK(grid.back() == doctest::Approx(0.995));
  CHECK(sigma_grid(BacksteppingCertificate::make(1.0, 1.0, 0.0, 0.2)).empty());
}

TEST_CASE("certification directions are unit vectors") {
  CertifyOptions opts;
  opts.random_samples = 100;
  opts.low_discrepancy_samples = 50;
  const auto dirs = certification_directions(4, opts);
  CHECK(dirs.size() == 100 + 50 + 8 + 24);
  for (const auto& d : dirs) CHECK(std::abs(d.norm() - 1.0) < 1e-12);
  const auto again = certification_directions(4, opts);
  for (std::size_t i = 0; i < dirs.size(); ++i) CHECK(dirs[i] == again[i]);
}

TEST_CASE("certify on the scalar integrator") {
  CertifyOptions opts;
  opts.random_samples = 2000;
  opts.low_discrepancy_samples = 1000;
  // q = 2 at sigma = 0.995: the nominal law certifies iff a^2 < 1/4 roughly.
  const RedesignSetup s = scalar_setup(0.0, 2.0, 0.995);
  opts.law = FeedbackLaw::nominal;
  CHECK(certify(s, 0.45, opts).pass);
  CHECK_FALSE(certify(s, 0.55, opts).pass);
  const auto nominal = max_certified_a(s, 1.0, opts);
  CHECK(nominal.a == doctest::Approx(0.5).epsilon(0.01));
  CHECK(nominal.report.largest_certified_a.has_value());

  opts.law = FeedbackLaw::redesigned;
  const auto redesigned = max_certified_a(s, 1.0, opts);
  CHECK(redesigned.a > nominal.a);
  CHECK_FALSE(redesigned.saturated);
  CHECK_FALSE(certify(s, 0.9, opts).pass);

  const auto rep = certify(s, 0.5, opts);
  CHECK(rep.samples == 3000 + 4 + 4);
  const std::string text = rep.to_text();
  CHECK(text.find("law=redesigned") != std::string::npos);
  CHECK(text.find("pass=true") != std::string::npos);
  CHECK(text.find("note=certified up to sampling") != std::string::npos);

  // With phi = 0 the best a = 0 ratio approaches 1/2 as x -> 0, so sigma = 0.45 fails.
  CHECK_THROWS_AS(max_certified_a(scalar_setup(0.0, 2.0, 0.45), 1.0, opts),
                  ConfigurationError);
}

TEST_CASE("certified inequality holds along sampled states") {
  Rng rng(131);
  CertifyOptions opts;
  opts.random_samples = 4000;
  opts.low_discrepancy_samples = 2000;
  const RedesignSetup s = scalar_setup(0.0, 1.6, 0.99);
  const auto res = max_certified_a(s, 1.0, opts);
  REQUIRE(res.a > 0.5);
  const double a = res.a;
  const RedesignSetup sa(s.plant().with_uncertainty(a), s.stabilizer(), s.certificate());
  for (int k = 0; k < 2000; ++k) {
    const ExtendedState z = random_state(rng, 1, 1);
    const double u = redesigned_feedback(sa, z, a);
    const double v = sa.lyapunov()(z);
    CHECK(worst_case_value(sa, z, u, a) <= (s.certificate().sigma + 1e-6) * v);
  }
}

TEST_CASE("scalar law by hand") {
  const double a = 0.5, q = 2.0;
  // Region boundaries at x^2 + x y1 = +-(a/q) x^2.
  CHECK(scalar_redesign_feedback(1.0, 1.0, a, q) == doctest::Approx(-(1.25) - 1.0));
  CHECK(scalar_redesign_feedback(1.0, -3.0, a, q) == doctest::Approx(-(0.75) + 3.0));
  CHECK(scalar_redesign_feedback(1.0, -1.0, a, q) == doctest::Approx(0.0));
  CHECK(scalar_redesign_feedback(0.0, 0.0, a, q) == 0.0);
  // Continuity on both boundaries: y1 = -(1 -+ a/q) x.
  for (double y : {-(1.0 - a / q), -(1.0 + a / q)}) {
    CHECK(scalar_redesign_feedback(1.0, y + 1e-12, a, q) ==
          doctest::Approx(scalar_redesign_feedback(1.0, y - 1e-12, a, q)));
  }
}

TEST_CASE("theta inequalities") {
  const auto pass = scalar_certify(0.535, 1.81, 100000);
  CHECK(pass.pass);
  CHECK(pass.worst_margin < 0.0);
  CHECK_FALSE(scalar_certify(0.9, 1.81, 100000).pass);
  CHECK(scalar_certify(0.0, 1.81, 10000).pass);
  CHECK_THROWS_AS(scalar_certify(0.5, 1.81, 100), ArgumentError);

  const double best = scalar_max_certified_a(1.81, 1.0, 100000);
  CHECK(best >= 0.535);
  CHECK(best < 0.54);
  const auto search = scalar_q_search(1.0, 20000, 1.5, 2.2, 0.05);
  CHECK(search.a >= 0.535);
}

TEST_CASE("beta sweep") {
  const std::vector<std::pair<double, double>> grid{{4.0, 0.0}, {4.0, 1.0}, {8.0, 0.0}};
  CertifyOptions opts;
  opts.random_samples = 500;
  opts.low_discrepancy_samples = 500;
  const auto rows = beta_sweep(1, {0.5, 1.0, 1.5}, grid, 1.0, FeedbackLaw::redesigned, opts);
  REQUIRE(rows.size() == 3);
  for (const auto& [beta, a] : rows) {
    CHECK(a > 0.0);
    CHECK(a < 1.0);
  }
}

TEST_CASE("scalar law matches the general minimax law at q = 1") {
  Rng rng(137);
  for (double a : {0.1, 0.3, 0.6}) {
    const RedesignSetup s = scalar_setup(a, 1.0, 0.9);
    for (int k = 0; k < 200; ++k) {
      const ExtendedState z = random_state(rng, 1, 1);
      const double general = redesigned_feedback(s, z, a);
      const double scalar = scalar_redesign_feedback(z.x(0), z.y(0), a, 1.0);
      CHECK(std::abs(general - scalar) <= 1e-12 * (1.0 + std::abs(general)));
    }
  }
}

TEST_CASE("ill-conditioned Lyapunov matrix does not hide violations") {
  MatrixXd A(3, 3), P(3, 3);
  A << 1.1, 0.2, 0.0, 0.0, 0.9, 0.3, 0.1, 0.0, 0.8;
  P << 1.0, 0.4380176622, 0.0936317262, 0.4380176622, 0.1968037174, 0.0427338246,
      0.0936317262, 0.0427338246, 0.0096764146;
  VectorXd B(3), k(3);
  B << 0.0, 0.0, 1.0;
  k << -5.7, -3.6, -1.6;
  const LinearPlant plant(A, B, 0.1 * MatrixXd::Identity(3, 3), 0.2, 2);
  const auto stab = NominalStabilizer::auto_validated(plant, k, P);
  const auto cert = BacksteppingCertificate::make(4.0, 1.0, 0.95, stab.lambda());
  const RedesignSetup s(plant, stab, cert);
  const auto rep = certify(s, 0.2);
  CHECK_FALSE(rep.pass);
  for (const auto& z : rep.argmax)
    if (z.size() > 0) CHECK(s.lyapunov()(z) == doctest::Approx(1.0));

  // The greedy adversary confirms a step with V-bar(z+) > sigma V-bar(z).
  const Policy pol = [&s](const ExtendedState& z) { return redesigned_feedback(s, z, 0.2); };
  SimulationContext ctx;
  ctx.setup = &s;
  const ExtendedState z0{Eigen::Vector3d(1.0, -1.0, 0.5), VectorXd::Zero(2)};
  const auto traj = simulate(plant, pol, DisturbanceStrategy::greedy_adversary(), z0, 200, ctx);
  CHECK(decay_rate(traj) > 0.95);
}

TEST_CASE("certification does not depend on the thread count") {
  Rng rng(139);
  const RedesignSetup s = random_setup(rng, 3, 2, 0.1);
  setenv("DELAYPRED_THREADS", "1", 1);
  const std::string one = certify(s, 0.1).to_text();
  setenv("DELAYPRED_THREADS", "5", 1);
  const std::string five = certify(s, 0.1).to_text();
  unsetenv("DELAYPRED_THREADS");
  CHECK(one == five);
}
