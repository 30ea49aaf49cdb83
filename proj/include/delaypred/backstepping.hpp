#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "delaypred/core_model.hpp"
#include "delaypred/numerics.hpp"

namespace delaypred {

/// Backstepping constants: geometric weight c, quadratic gauge a_i(s) = phi s^2,
/// target contraction sigma for redesign and the nominal contraction lambda.
struct BacksteppingCertificate {
  double c = 2.0;
  double phi = 1.0;
  double sigma = 0.0;
  double lambda = 0.0;

  /// Admits c > 0, phi > -1, sigma and lambda in [0, 1).
  static BacksteppingCertificate make(double c, double phi, double sigma,
                                      double lambda);

  /// c > 1/(1 - lambda) and phi > 0: the range where the decay rate
  /// lambda + 1/c is guaranteed.
  [[nodiscard]] bool guarantees_decay() const;
  [[nodiscard]] double decay_bound() const { return lambda + 1.0 / c; }
};

/// u = k' F_r(z).
double nominal_predictor_feedback(const LinearPlant& plant,
                                  const NominalStabilizer& stab,
                                  const ExtendedState& z);

/// V-bar(z) = x'Px + sum_i c^i F_i'P F_i + phi sum_i c^i (y_i - k'F_{i-1})^2,
/// evaluated term by term. Requires r >= 1.
double lyapunov_bar(const LinearPlant& plant, const NominalStabilizer& stab,
                    const BacksteppingCertificate& cert,
                    const ExtendedState& z);

/// V-bar materialised as a symmetric (n+r) x (n+r) matrix Q, V-bar(z) = z'Qz.
/// For r = 0 this is P.
class QuadraticLyapunov {
 public:
  QuadraticLyapunov(const LinearPlant& plant, const NominalStabilizer& stab,
                    const BacksteppingCertificate& cert);

  [[nodiscard]] double operator()(const ExtendedState& z) const;
  [[nodiscard]] double operator()(const VectorXd& stacked) const;
  [[nodiscard]] const MatrixXd& matrix() const { return Q_; }
  /// min over the unit sphere, i.e. the smallest eigenvalue of Q.
  [[nodiscard]] double min_sphere_value() const;

 private:
  MatrixXd Q_;
};

/// Extended state for the generic (possibly multi-input) construction.
struct GenericState {
  VectorXd x;
  std::vector<VectorXd> y;
};

/// Nominal system x+ = f(x, u) with a stabilizer k and Lyapunov function V
/// contracting at rate lambda along x+ = f(x, k(x)).
class GenericSystem {
 public:
  using Dynamics = std::function<VectorXd(const VectorXd&, const VectorXd&)>;
  using Feedback = std::function<VectorXd(const VectorXd&)>;
  using Energy = std::function<double(const VectorXd&)>;

  /// Checks f(0,0) = 0, k(0) = 0, V(0) = 0.
  GenericSystem(int n, int m, Dynamics f, Feedback k, Energy V, double lambda);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] VectorXd f(const VectorXd& x, const VectorXd& u) const {
    return f_(x, u);
  }
  [[nodiscard]] VectorXd k(const VectorXd& x) const { return k_(x); }
  [[nodiscard]] double V(const VectorXd& x) const { return V_(x); }

  /// max V(f(x,k(x))) / V(x) over the samples; throws ValidationError when it
  /// exceeds lambda + 1e-9.
  double spot_check_decay(std::span<const VectorXd> samples) const;

  /// F_i(z_i) by the recursion F_{i+1} = f(F_i, y_{i+1}), F_0 = x.
  [[nodiscard]] VectorXd predictor(const GenericState& z, int i) const;
  /// k(F_r(z)).
  [[nodiscard]] VectorXd predictor_feedback(const GenericState& z) const;
  /// (f(x, y_1), y_2, ..., y_r, u); for r = 0 returns (f(x, u)).
  [[nodiscard]] GenericState step(const GenericState& z,
                                  const VectorXd& u) const;

 private:
  int n_;
  int m_;
  Dynamics f_;
  Feedback k_;
  Energy V_;
  double lambda_;
};

/// Gauge a_i: strictly increasing, unbounded, a_i(0) = 0.
using Gauge = std::function<double(double)>;

/// a_i(s) <= a_{i+1}(s), a_i increasing and zero at zero, checked on a
/// 64-point log-spaced grid over [1e-6, 1e6]. Throws ArgumentError.
void check_gauges(std::span<const Gauge> gauges);

/// sum_{i=0..r} c^i V(F_i) + sum_{i=1..r} c^i a_i(|y_i - k(F_{i-1})|).
double backstep_lyapunov_generic(const GenericSystem& sys,
                                 const BacksteppingCertificate& cert,
                                 std::span<const Gauge> gauges,
                                 const GenericState& z);

/// Seeded samples uniform on [-1,1]^dim, scaled cyclically by 1e-2, 1, 1e2.
std::vector<VectorXd> default_decay_samples(int dim, int count,
                                            std::uint64_t seed = kDefaultSeed);

/// max V-bar(z+)/V-bar(z) with z+ the disturbance-free successor under the
/// nominal predictor feedback. Samples with V-bar(z) = 0 are skipped.
double verify_decay(const LinearPlant& plant, const NominalStabilizer& stab,
                    const BacksteppingCertificate& cert,
                    std::span<const VectorXd> samples);

/// Generic counterpart of verify_decay.
double verify_decay(const GenericSystem& sys,
                    const BacksteppingCertificate& cert,
                    std::span<const Gauge> gauges,
                    std::span<const GenericState> samples);

}  // namespace delaypred
