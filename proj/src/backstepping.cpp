#include "delaypred/backstepping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "delaypred/errors.hpp"

namespace delaypred {

BacksteppingCertificate BacksteppingCertificate::make(double c, double phi,
                                                      double sigma,
                                                      double lambda) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("c must be > 0");
  if (!(phi > -1.0) || !std::isfinite(phi))
    throw ArgumentError("phi must be > -1");
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw ArgumentError("sigma must lie in [0, 1)");
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ArgumentError("lambda must lie in [0, 1)");
  return {c, phi, sigma, lambda};
}

bool BacksteppingCertificate::guarantees_decay() const {
  return c > 1.0 / (1.0 - lambda) && phi > 0.0;
}

double nominal_predictor_feedback(const LinearPlant& plant,
                                  const NominalStabilizer& stab,
                                  const ExtendedState& z) {
  if (stab.n() != plant.n())
    throw ArgumentError("stabilizer dimension does not match plant");
  return stab.k().dot(predictor_map(plant, z, plant.r()));
}

double lyapunov_bar(const LinearPlant& plant, const NominalStabilizer& stab,
                    const BacksteppingCertificate& cert,
                    const ExtendedState& z) {
  const int r = plant.r();
  if (r == 0)
    throw ArgumentError("lyapunov_bar needs r >= 1; use V(x) = x'Px for r = 0");
  if (stab.n() != plant.n())
    throw ArgumentError("stabilizer dimension does not match plant");
  const MatrixXd& P = stab.P();
  const VectorXd& k = stab.k();
  const double c = cert.c;

  double value = z.x.dot(P * z.x);
  double ci = 1.0;
  VectorXd previous = z.x;  // F_{i-1}
  for (int i = 1; i <= r; ++i) {
    ci *= c;
    const VectorXd Fi = predictor_map(plant, z, i);
    const double gap = z.y(i - 1) - k.dot(previous);
    value += ci * Fi.dot(P * Fi) + cert.phi * ci * gap * gap;
    previous = Fi;
  }
  return value;
}

QuadraticLyapunov::QuadraticLyapunov(const LinearPlant& plant,
                                     const NominalStabilizer& stab,
                                     const BacksteppingCertificate& cert) {
  if (stab.n() != plant.n())
    throw ArgumentError("stabilizer dimension does not match plant");
  const int n = plant.n();
  const int r = plant.r();
  const int dim = n + r;
  const MatrixXd& P = stab.P();
  Q_ = MatrixXd::Zero(dim, dim);
  Q_.topLeftCorner(n, n) = P;
  double ci = 1.0;
  MatrixXd previous = plant.predictor_matrix(0);
  for (int i = 1; i <= r; ++i) {
    ci *= cert.c;
    const MatrixXd Mi = plant.predictor_matrix(i);
    Q_ += ci * Mi.transpose() * P * Mi;
    RowVectorXd gap = -stab.k().transpose() * previous;
    gap(n + i - 1) += 1.0;
    Q_ += cert.phi * ci * gap.transpose() * gap;
    previous = Mi;
  }
  Q_ = (0.5 * (Q_ + Q_.transpose())).eval();
}

double QuadraticLyapunov::operator()(const ExtendedState& z) const {
  return (*this)(z.stacked());
}

double QuadraticLyapunov::operator()(const VectorXd& stacked) const {
  if (stacked.size() != Q_.rows())
    throw ArgumentError("state dimension does not match Lyapunov form");
  return stacked.dot(Q_ * stacked);
}

double QuadraticLyapunov::min_sphere_value() const {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

GenericSystem::GenericSystem(int n, int m, Dynamics f, Feedback k, Energy V,
                             double lambda)
    : n_(n), m_(m), f_(std::move(f)), k_(std::move(k)), V_(std::move(V)),
      lambda_(lambda) {
  if (n <= 0 || m <= 0) throw ArgumentError("dimensions must be positive");
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ArgumentError("lambda must lie in [0, 1)");
  const VectorXd x0 = VectorXd::Zero(n);
  const VectorXd u0 = VectorXd::Zero(m);
  const VectorXd f0 = f_(x0, u0);
  if (f0.size() != n) throw ArgumentError("f must return a state of length n");
  if (f0.norm() != 0.0) throw ValidationError("f(0, 0) must be 0");
  const VectorXd k0 = k_(x0);
  if (k0.size() != m) throw ArgumentError("k must return an input of length m");
  if (k0.norm() != 0.0) throw ValidationError("k(0) must be 0");
  if (V_(x0) != 0.0) throw ValidationError("V(0) must be 0");
}

double GenericSystem::spot_check_decay(std::span<const VectorXd> samples) const {
  double worst = 0.0;
  for (const auto& x : samples) {
    const double v = V_(x);
    if (v <= 0.0) continue;
    worst = std::max(worst, V_(f_(x, k_(x))) / v);
  }
  if (worst > lambda_ + 1e-9) {
    std::ostringstream os;
    os << "V(f(x, k(x))) / V(x) reaches " << worst << " > lambda = " << lambda_;
    throw ValidationError(os.str());
  }
  return worst;
}

VectorXd GenericSystem::predictor(const GenericState& z, int i) const {
  if (i < 0 || i > static_cast<int>(z.y.size()))
    throw ArgumentError("predictor index out of range");
  VectorXd F = z.x;
  for (int j = 0; j < i; ++j) F = f_(F, z.y[j]);
  return F;
}

VectorXd GenericSystem::predictor_feedback(const GenericState& z) const {
  return k_(predictor(z, static_cast<int>(z.y.size())));
}

GenericState GenericSystem::step(const GenericState& z,
                                 const VectorXd& u) const {
  GenericState next;
  if (z.y.empty()) {
    next.x = f_(z.x, u);
    return next;
  }
  next.x = f_(z.x, z.y.front());
  next.y.assign(z.y.begin() + 1, z.y.end());
  next.y.push_back(u);
  return next;
}

void check_gauges(std::span<const Gauge> gauges) {
  constexpr int kGrid = 64;
  std::vector<double> grid(kGrid);
  for (int g = 0; g < kGrid; ++g)
    grid[g] = std::pow(10.0, -6.0 + 12.0 * g / (kGrid - 1));
  for (std::size_t i = 0; i < gauges.size(); ++i) {
    if (gauges[i](0.0) != 0.0) {
      std::ostringstream os;
      os << "gauge a_" << i + 1 << " is not zero at zero";
      throw ArgumentError(os.str());
    }
    double last = 0.0;
    for (double s : grid) {
      const double v = gauges[i](s);
      if (!(v > last)) {
        std::ostringstream os;
        os << "gauge a_" << i + 1 << " is not strictly increasing near s = "
           << s;
        throw ArgumentError(os.str());
      }
      last = v;
      if (i + 1 < gauges.size() && gauges[i + 1](s) < v) {
        std::ostringstream os;
        os << "gauges violate a_" << i + 1 << "(s) <= a_" << i + 2
           << "(s) at s = " << s;
        throw ArgumentError(os.str());
      }
    }
  }
}

double backstep_lyapunov_generic(const GenericSystem& sys,
                                 const BacksteppingCertificate& cert,
                                 std::span<const Gauge> gauges,
                                 const GenericState& z) {
  const std::size_t r = z.y.size();
  if (gauges.size() != r)
    throw ArgumentError("need one gauge function per delay step");
  check_gauges(gauges);
  double value = sys.V(z.x);
  double ci = 1.0;
  VectorXd previous = z.x;
  for (std::size_t i = 1; i <= r; ++i) {
    ci *= cert.c;
    const VectorXd Fi = sys.f(previous, z.y[i - 1]);
    value += ci * sys.V(Fi);
    value += ci * gauges[i - 1]((z.y[i - 1] - sys.k(previous)).norm());
    previous = Fi;
  }
  return value;
}

std::vector<VectorXd> default_decay_samples(int dim, int count,
                                            std::uint64_t seed) {
  static constexpr double kScales[] = {1e-2, 1.0, 1e2};
  Rng rng(seed);
  std::vector<VectorXd> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    VectorXd z(dim);
    for (int j = 0; j < dim; ++j) z(j) = rng.uniform(-1.0, 1.0);
    out.push_back(kScales[s % 3] * z);
  }
  return out;
}

namespace {

void require_decay_range(const BacksteppingCertificate& cert) {
  if (!(cert.c > 1.0 / (1.0 - cert.lambda))) {
    std::ostringstream os;
    os << "decay verification needs c > 1/(1 - lambda) = "
       << 1.0 / (1.0 - cert.lambda) << ", got c = " << cert.c;
    throw ArgumentError(os.str());
  }
}

}  // namespace

double verify_decay(const LinearPlant& plant, const NominalStabilizer& stab,
                    const BacksteppingCertificate& cert,
                    std::span<const VectorXd> samples) {
  require_decay_range(cert);
  const int n = plant.n();
  const int r = plant.r();
  const QuadraticLyapunov vbar(plant, stab, cert);

  std::vector<double> chunk_max(chunk_count(samples.size()), 0.0);
  parallel_chunks(samples.size(), [&](std::size_t b, std::size_t e,
                                      std::size_t c) {
    double worst = 0.0;
    for (std::size_t s = b; s < e; ++s) {
      const ExtendedState z = ExtendedState::from_stacked(samples[s], n, r);
      const double v = vbar(z);
      if (!(v > 0.0)) continue;
      const double u = nominal_predictor_feedback(plant, stab, z);
      const ExtendedState next = step_extended(plant, z, u, 0.0);
      worst = std::max(worst, vbar(next) / v);
    }
    chunk_max[c] = worst;
  });
  double worst = 0.0;
  for (double w : chunk_max) worst = std::max(worst, w);
  return worst;
}

double verify_decay(const GenericSystem& sys,
                    const BacksteppingCertificate& cert,
                    std::span<const Gauge> gauges,
                    std::span<const GenericState> samples) {
  require_decay_range(cert);
  double worst = 0.0;
  for (const auto& z : samples) {
    const double v = backstep_lyapunov_generic(sys, cert, gauges, z);
    if (!(v > 0.0)) continue;
    const GenericState next = sys.step(z, sys.predictor_feedback(z));
    worst = std::max(worst,
                     backstep_lyapunov_generic(sys, cert, gauges, next) / v);
  }
  return worst;
}

}  // namespace delaypred
