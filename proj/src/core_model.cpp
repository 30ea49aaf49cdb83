#include "delaypred/core_model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "delaypred/errors.hpp"

namespace delaypred {

namespace {

void check_vector(const VectorXd& v, int n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << ": expected length " << n << ", got " << v.size();
    throw ArgumentError(os.str());
  }
}

void check_state(const LinearPlant& plant, const ExtendedState& z) {
  check_vector(z.x, plant.n(), "extended state x");
  check_vector(z.y, plant.r(), "extended state y");
}

void check_disturbance(const LinearPlant& plant, double d) {
  if (std::abs(d) > plant.a()) {
    std::ostringstream os;
    os << "disturbance " << d << " outside [-" << plant.a() << ", "
       << plant.a() << "]";
    throw ArgumentError(os.str());
  }
}

// Scale-free positive-definiteness test; returns the eigenvalues.
VectorXd require_positive_definite(const MatrixXd& P) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(P, Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i) > 1e-12 * largest) || largest == 0.0) {
      std::ostringstream os;
      os << "P is not positive definite: eigenvalue " << ev(i)
         << " (largest " << largest << ")";
      throw ValidationError(os.str());
    }
  }
  return ev;
}

}  // namespace

LinearPlant::LinearPlant(MatrixXd A, VectorXd B, MatrixXd G, double a, int r)
    : A_(std::move(A)), B_(std::move(B)), G_(std::move(G)), a_(a), r_(r) {
  const auto n = A_.rows();
  if (n == 0 || A_.cols() != n)
    throw ArgumentError("A must be a non-empty square matrix");
  if (G_.rows() != n || G_.cols() != n)
    throw ArgumentError("G must have the same dimension as A");
  if (B_.size() != n) throw ArgumentError("B must have length n");
  if (!(a_ >= 0.0) || !std::isfinite(a_))
    throw ArgumentError("uncertainty bound a must be finite and >= 0");
  if (r_ < 0) throw ArgumentError("delay r must be >= 0");

  powers_.reserve(r_ + 1);
  powers_b_.reserve(r_ + 1);
  powers_.push_back(MatrixXd::Identity(n, n));
  powers_b_.push_back(B_);
  for (int i = 1; i <= r_; ++i) {
    powers_.push_back(A_ * powers_.back());
    powers_b_.push_back(A_ * powers_b_.back());
  }
}

LinearPlant LinearPlant::scalar_integrator(double a, int r) {
  return LinearPlant(MatrixXd::Ones(1, 1), VectorXd::Ones(1),
                     MatrixXd::Ones(1, 1), a, r);
}

LinearPlant LinearPlant::with_uncertainty(double a) const {
  if (!(a >= 0.0) || !std::isfinite(a))
    throw ArgumentError("uncertainty bound a must be finite and >= 0");
  LinearPlant copy = *this;
  copy.a_ = a;
  return copy;
}

const MatrixXd& LinearPlant::power(int i) const {
  if (i < 0 || i > r_) throw ArgumentError("power index out of range");
  return powers_[i];
}

const VectorXd& LinearPlant::power_b(int i) const {
  if (i < 0 || i > r_) throw ArgumentError("power index out of range");
  return powers_b_[i];
}

MatrixXd LinearPlant::predictor_matrix(int i) const {
  if (i < 0 || i > r_) throw ArgumentError("predictor index out of range");
  MatrixXd M = MatrixXd::Zero(n(), n() + r_);
  M.leftCols(n()) = powers_[i];
  for (int j = 1; j <= i; ++j) M.col(n() + j - 1) = powers_b_[i - j];
  return M;
}

NominalStabilizer::NominalStabilizer(VectorXd k, MatrixXd P, double lambda)
    : k_(std::move(k)), P_(std::move(P)), lambda_(lambda) {
  const auto n = k_.size();
  if (n == 0) throw ArgumentError("gain k must be non-empty");
  if (P_.rows() != n || P_.cols() != n)
    throw ArgumentError("P must be n x n with n = length of k");
  const double scale = std::max(1.0, P_.cwiseAbs().maxCoeff());
  if ((P_ - P_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("P is not symmetric");
  require_positive_definite(P_);
  if (!(lambda_ >= 0.0 && lambda_ < 1.0))
    throw ValidationError("lambda must lie in [0, 1)");
}

NominalStabilizer NominalStabilizer::auto_validated(const LinearPlant& plant,
                                                    VectorXd k, MatrixXd P) {
  NominalStabilizer probe(k, P, 0.0);
  const double lambda = validate_stabilizer(plant, probe);
  if (!(lambda < 1.0)) {
    std::ostringstream os;
    os << "closed loop A+Bk' does not contract V = x'Px (lambda* = " << lambda
       << ")";
    throw ValidationError(os.str());
  }
  return NominalStabilizer(std::move(k), std::move(P), std::max(0.0, lambda));
}

VectorXd ExtendedState::stacked() const {
  VectorXd z(x.size() + y.size());
  z << x, y;
  return z;
}

ExtendedState ExtendedState::from_stacked(const VectorXd& z, int n, int r) {
  if (z.size() != n + r) throw ArgumentError("stacked state has wrong length");
  return {z.head(n), z.tail(r)};
}

ExtendedState ExtendedState::zero(int n, int r) {
  return {VectorXd::Zero(n), VectorXd::Zero(r)};
}

ScalarExamplePlant::ScalarExamplePlant(double a_, int r_, double beta_)
    : a(a_), r(r_), beta(beta_) {
  if (!(a >= 0.0)) throw ArgumentError("a must be >= 0");
  if (r < 0) throw ArgumentError("r must be >= 0");
  if (!(beta > 0.0 && beta < 2.0)) throw ArgumentError("beta must lie in (0, 2)");
}

LinearPlant ScalarExamplePlant::plant() const {
  return LinearPlant::scalar_integrator(a, r);
}

NominalStabilizer ScalarExamplePlant::stabilizer() const {
  return NominalStabilizer(VectorXd::Constant(1, -beta), MatrixXd::Ones(1, 1),
                           (1.0 - beta) * (1.0 - beta));
}

ExtendedState step_extended(const LinearPlant& plant, const ExtendedState& z,
                            double u, double d) {
  check_state(plant, z);
  check_disturbance(plant, d);
  const int r = plant.r();
  ExtendedState next;
  if (r == 0) {
    next.x = plant.A() * z.x + plant.B() * u + d * (plant.G() * z.x);
    next.y.resize(0);
    return next;
  }
  next.x = plant.A() * z.x + plant.B() * z.y(0) + d * (plant.G() * z.x);
  next.y.resize(r);
  next.y.head(r - 1) = z.y.tail(r - 1);
  next.y(r - 1) = u;
  return next;
}

DelayedStep step_delayed(const LinearPlant& plant, const VectorXd& x,
                         const std::deque<double>& buffer, double u_new,
                         double d) {
  check_vector(x, plant.n(), "state x");
  if (static_cast<int>(buffer.size()) != plant.r()) {
    std::ostringstream os;
    os << "input buffer must hold exactly r = " << plant.r()
       << " past inputs, got " << buffer.size();
    throw ArgumentError(os.str());
  }
  check_disturbance(plant, d);
  DelayedStep out;
  out.buffer = buffer;
  out.buffer.push_back(u_new);
  const double acting = out.buffer.front();
  out.buffer.pop_front();
  out.x = plant.A() * x + plant.B() * acting + d * (plant.G() * x);
  return out;
}

VectorXd predictor_map(const LinearPlant& plant, const ExtendedState& z,
                       int i) {
  check_state(plant, z);
  if (i < 0 || i > plant.r()) {
    std::ostringstream os;
    os << "predictor index " << i << " outside [0, " << plant.r() << "]";
    throw ArgumentError(os.str());
  }
  VectorXd F = plant.power(i) * z.x;
  for (int j = 1; j <= i; ++j) F += plant.power_b(i - j) * z.y(j - 1);
  return F;
}

double validate_stabilizer(const LinearPlant& plant,
                           const NominalStabilizer& stab) {
  if (stab.n() != plant.n())
    throw ArgumentError("stabilizer dimension does not match plant");
  const MatrixXd& P = stab.P();
  require_positive_definite(P);
  const MatrixXd closed = plant.A() + plant.B() * stab.k().transpose();
  const MatrixXd M = closed.transpose() * P * closed;

  // With P = LL', the pencil (M, P) has the spectrum of L^{-1} M L^{-T}.
  Eigen::LLT<MatrixXd> llt(P);
  if (llt.info() != Eigen::Success)
    throw ValidationError("P is not positive definite (Cholesky failed)");
  const MatrixXd Linv_M =
      llt.matrixL().solve(M);  // L^{-1} M
  MatrixXd S = llt.matrixL().solve(Linv_M.transpose()).transpose();
  S = (0.5 * (S + S.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double measurement_delay_wrap(const Policy& feedback, int r,
                              const MeasurementHistory& history) {
  if (r < 0) throw ArgumentError("r must be >= 0");
  if (history.states.size() < static_cast<std::size_t>(r) + 1 ||
      history.inputs.size() < static_cast<std::size_t>(r)) {
    std::ostringstream os;
    os << "measurement history too short: need " << r + 1 << " states and "
       << r << " inputs";
    throw ArgumentError(os.str());
  }
  ExtendedState z;
  z.x = history.states[history.states.size() - 1 - r];
  z.y.resize(r);
  const std::size_t first = history.inputs.size() - r;
  for (int i = 0; i < r; ++i) z.y(i) = history.inputs[first + i];
  return feedback(z);
}

}  // namespace delaypred
