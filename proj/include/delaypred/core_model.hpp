#pragma once

#include <deque>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace delaypred {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Single-input plant x(t+1) = A x(t) + B u(t-r) + d(t) G x(t), |d(t)| <= a.
///
/// Immutable after construction. The powers A^i and A^i B for 0 <= i <= r are
/// computed once here; predictor maps and redesign coefficients read them
/// from the cache.
class LinearPlant {
 public:
  LinearPlant(MatrixXd A, VectorXd B, MatrixXd G, double a, int r);

  /// Scalar integrator x(t+1) = x + d x + u(t-r).
  static LinearPlant scalar_integrator(double a, int r);

  /// Same plant with a different uncertainty bound (the power cache is shared).
  [[nodiscard]] LinearPlant with_uncertainty(double a) const;

  [[nodiscard]] const MatrixXd& A() const { return A_; }
  [[nodiscard]] const VectorXd& B() const { return B_; }
  [[nodiscard]] const MatrixXd& G() const { return G_; }
  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] int r() const { return r_; }
  [[nodiscard]] int n() const { return static_cast<int>(A_.rows()); }
  /// Dimension of the extended state (x, y_1..y_r).
  [[nodiscard]] int extended_dim() const { return n() + r_; }

  /// A^i, 0 <= i <= r.
  [[nodiscard]] const MatrixXd& power(int i) const;
  /// A^i B, 0 <= i <= r.
  [[nodiscard]] const VectorXd& power_b(int i) const;

  /// n x (n+r) matrix M_i with F_i(z) = M_i * stacked(z).
  [[nodiscard]] MatrixXd predictor_matrix(int i) const;

 private:
  MatrixXd A_;
  VectorXd B_;
  MatrixXd G_;
  double a_;
  int r_;
  std::vector<MatrixXd> powers_;
  std::vector<VectorXd> powers_b_;
};

/// Nominal delay-free design u = k'x with V(x) = x'Px and V(closed loop) <= lambda V.
class NominalStabilizer {
 public:
  NominalStabilizer(VectorXd k, MatrixXd P, double lambda);

  /// Builds the stabilizer with lambda set to the minimal feasible value for `plant`.
  static NominalStabilizer auto_validated(const LinearPlant& plant,
                                          VectorXd k, MatrixXd P);

  [[nodiscard]] const VectorXd& k() const { return k_; }
  [[nodiscard]] const MatrixXd& P() const { return P_; }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] int n() const { return static_cast<int>(k_.size()); }

 private:
  VectorXd k_;
  MatrixXd P_;
  double lambda_;
};

/// (x, y_1, ..., y_r) with y_i = u(t - r - 1 + i); y is stored oldest-first.
struct ExtendedState {
  VectorXd x;
  VectorXd y;

  [[nodiscard]] VectorXd stacked() const;
  static ExtendedState from_stacked(const VectorXd& z, int n, int r);
  static ExtendedState zero(int n, int r);
};

/// Scalar integrator x+ = x + u(t-r) + d x with nominal gain k(x) = -beta x.
struct ScalarExamplePlant {
  double a = 0.0;
  int r = 0;
  double beta = 1.0;

  ScalarExamplePlant(double a, int r, double beta = 1.0);

  [[nodiscard]] LinearPlant plant() const;
  /// k = -beta, P = 1, lambda = (1 - beta)^2.
  [[nodiscard]] NominalStabilizer stabilizer() const;
};

/// Feedback acting on the extended state.
using Policy = std::function<double(const ExtendedState&)>;

/// One step of the delay-free reformulation.
ExtendedState step_extended(const LinearPlant& plant, const ExtendedState& z,
                            double u, double d);

struct DelayedStep {
  VectorXd x;
  std::deque<double> buffer;
};

/// One step of the delayed form; `buffer` holds u(t-r)..u(t-1), oldest first.
DelayedStep step_delayed(const LinearPlant& plant, const VectorXd& x,
                         const std::deque<double>& buffer, double u_new,
                         double d);

/// F_i(z_i) = A^i x + sum_{j=1..i} A^{i-j} B y_j.
VectorXd predictor_map(const LinearPlant& plant, const ExtendedState& z, int i);

/// Largest generalized eigenvalue of ((A+Bk')'P(A+Bk'), P).
double validate_stabilizer(const LinearPlant& plant,
                           const NominalStabilizer& stab);

/// States and inputs seen so far, most recent last.
struct MeasurementHistory {
  std::vector<VectorXd> states;
  std::vector<double> inputs;
};

/// K(x(t-r), u(t-r), ..., u(t-1)) for a plant whose measurements lag by r steps.
double measurement_delay_wrap(const Policy& feedback, int r,
                              const MeasurementHistory& history);

}  // namespace delaypred
