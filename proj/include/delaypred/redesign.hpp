#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delaypred/backstepping.hpp"
#include "delaypred/core_model.hpp"
#include "delaypred/numerics.hpp"

namespace delaypred {

/// Plant, nominal design and backstepping constants for the minimax
/// (Lyapunov-redesigned) feedback, with the matrix products the coefficient
/// functions need cached. Requires r >= 1 and p = c^r (B'PB + phi) > 0.
class RedesignSetup {
 public:
  RedesignSetup(LinearPlant plant, NominalStabilizer stab,
                BacksteppingCertificate cert);

  [[nodiscard]] const LinearPlant& plant() const { return plant_; }
  [[nodiscard]] const NominalStabilizer& stabilizer() const { return stab_; }
  [[nodiscard]] const BacksteppingCertificate& certificate() const {
    return cert_;
  }
  [[nodiscard]] const QuadraticLyapunov& lyapunov() const { return vbar_; }

  /// Same plant and nominal design with a different target contraction.
  [[nodiscard]] RedesignSetup with_sigma(double sigma) const;

  [[nodiscard]] double p() const { return p_; }
  /// c^i for 0 <= i <= r.
  [[nodiscard]] double c_power(int i) const { return c_powers_[i]; }
  /// B'PA - phi k'.
  [[nodiscard]] const RowVectorXd& coupling() const { return coupling_; }
  /// A'PA + phi k k'.
  [[nodiscard]] const MatrixXd& curvature() const { return curvature_; }
  /// Row vector l with L(x) = l x.
  [[nodiscard]] const RowVectorXd& l_row() const { return l_row_; }
  /// A^i G for 0 <= i <= r.
  [[nodiscard]] const MatrixXd& power_g(int i) const { return power_g_[i]; }
  /// n x (n+r) predictor matrices M_i, F_i = M_i z.
  [[nodiscard]] const MatrixXd& predictor(int i) const {
    return predictors_[i];
  }

 private:
  LinearPlant plant_;
  NominalStabilizer stab_;
  BacksteppingCertificate cert_;
  QuadraticLyapunov vbar_;
  double p_ = 0.0;
  std::vector<double> c_powers_;
  RowVectorXd coupling_;
  MatrixXd curvature_;
  RowVectorXd l_row_;
  std::vector<MatrixXd> power_g_;
  std::vector<MatrixXd> predictors_;
};

/// L(x) = c^r (B'PA - phi k') A^{r-1} G x.
double eval_L(const RedesignSetup& setup, const VectorXd& x);
/// Coefficient of 2d in V-bar(z+) apart from the L(x)u part.
double eval_kappa(const RedesignSetup& setup, const ExtendedState& z);
/// b(z) = c^r (B'PA - phi k') F_r(z).
double eval_b(const RedesignSetup& setup, const ExtendedState& z);
/// The residual quadratic c(z) (renamed to avoid the constant c).
double eval_resid(const RedesignSetup& setup, const ExtendedState& z,
                  double a, double sigma);

/// p u^2 + 2 b u + 2 a |kappa + L u| + resid + sigma V-bar:
/// the exact maximum of V-bar(z+) over d in [-a, a].
double worst_case_value(const RedesignSetup& setup, const ExtendedState& z,
                        double u, double a);

/// The three pieces of the minimax feedback.
enum class Region : int {
  kink = 0,   // |p kappa - b L| < a L^2, u = -kappa / L
  upper = 1,  // p kappa - b L >= a L^2,  u = -(a L + b) / p
  lower = 2,  // p kappa - b L <= -a L^2, u = (a L - b) / p
};

Region classify_region(const RedesignSetup& setup, const ExtendedState& z,
                       double a);

/// Minimiser over u of worst_case_value; continuous, homogeneous of degree 1.
double redesigned_feedback(const RedesignSetup& setup, const ExtendedState& z,
                           double a);

/// Linear and quadratic forms in the stacked state, assembled from the
/// term-by-term evaluators, used for bulk evaluation.
struct CompiledCoefficients {
  RowVectorXd l;      // L(x) = l z
  RowVectorXd b;      // b(z) = b z
  MatrixXd kappa;     // kappa(z) = z' K z (symmetric part)
  MatrixXd resid;     // resid(z) = z' R z at the compiled (a, sigma)
  MatrixXd vbar;      // V-bar(z) = z' Q z
  double a = 0.0;
  double sigma = 0.0;
};

CompiledCoefficients compile_coefficients(const RedesignSetup& setup,
                                          double a);

enum class FeedbackLaw { redesigned, nominal };

struct CertificationReport {
  FeedbackLaw law = FeedbackLaw::redesigned;
  double a = 0.0;
  double sigma = 0.0;
  /// Worst left-hand side per region (kink, upper, lower); -inf if no sample
  /// fell into the region.
  std::array<double, 3> worst{};
  std::array<std::size_t, 3> counts{};
  std::array<VectorXd, 3> argmax;
  double margin = 0.0;  // -max(worst)
  std::size_t samples = 0;
  std::size_t skipped_singular = 0;
  bool pass = false;
  std::optional<double> largest_certified_a;
  bool saturated = false;

  /// key = value lines; floats with 17 significant digits.
  [[nodiscard]] std::string to_text() const;
};

struct CertifyOptions {
  int random_samples = 10000;
  int low_discrepancy_samples = 4096;
  std::uint64_t seed = kDefaultSeed;
  FeedbackLaw law = FeedbackLaw::redesigned;
};

inline constexpr double kMarginFloor = 1e-9;

/// Unit-sphere directions used by certify: Halton points, seeded Gaussian
/// directions, coordinate axes and pairwise diagonals.
std::vector<VectorXd> certification_directions(int dim,
                                               const CertifyOptions& options);

/// Sampling-based check of the three region inequalities (certified up to
/// sampling). The directions are mapped onto V-bar(z) = 1, so margin is
/// sigma minus the worst sampled V-bar(z+). For the nominal law the left-hand side is
/// worst_case_value(z, k'F_r) - sigma V-bar(z).
CertificationReport certify(const RedesignSetup& setup, double a,
                            const CertifyOptions& options = {});

/// sigma grid lo + (1 - lo) j / 100, j = 0..99, lo = lambda + 1/c.
std::vector<double> sigma_grid(const BacksteppingCertificate& cert);

/// Certify with the smallest grid sigma that passes (last report if none).
CertificationReport certify_auto_sigma(const RedesignSetup& setup, double a,
                                       const CertifyOptions& options = {});

struct MaxCertifiedResult {
  double a = 0.0;
  bool saturated = false;
  CertificationReport report;
};

/// Largest a in [0, a_hi] (bisection to 1e-4) at which certify passes with the
/// setup's sigma. Throws ConfigurationError if a = 0 does not certify.
MaxCertifiedResult max_certified_a(const RedesignSetup& setup, double a_hi,
                                   const CertifyOptions& options = {});

struct SweepPoint {
  double c;
  double phi;
  double sigma;
};

struct SweepResult {
  double a = 0.0;
  SweepPoint best{};
  std::vector<std::pair<SweepPoint, double>> table;
};

/// max_certified_a over a caller-given grid of (c, phi, sigma); points that do
/// not certify at a = 0 or violate p > 0 contribute a = 0.
SweepResult sweep_max_certified_a(const LinearPlant& plant,
                                  const NominalStabilizer& stab,
                                  const std::vector<SweepPoint>& grid,
                                  double a_hi,
                                  const CertifyOptions& options = {});

// Scalar integrator, r = 1, written in terms of q = c(1 + phi).

/// Closed-form piecewise-linear law for this plant.
double scalar_redesign_feedback(double x, double y1, double a, double q);

struct ScalarCertification {
  bool pass = false;
  /// max over applicable grid points of (left side - right side).
  double worst_margin = 0.0;
  std::array<double, 3> region_worst{};
  double worst_theta = 0.0;
};

/// The three theta-parametrised strict inequalities on a uniform grid.
ScalarCertification scalar_certify(double a, double q, int grid_size);

/// Largest a in [0, a_hi] passing scalar_certify at this q (bisection, 1e-5).
double scalar_max_certified_a(double q, double a_hi, int grid_size);

struct ScalarSearchResult {
  double q = 0.0;
  double a = 0.0;
};

/// q scan over [q_lo, q_hi] with step, then golden-section refinement.
ScalarSearchResult scalar_q_search(double a_hi, int grid_size,
                                   double q_lo = 1.0, double q_hi = 3.0,
                                   double step = 0.01);

/// Certification sweep for k(x) = -beta x on the scalar integrator: for each
/// beta, best max_certified_a over the (c, phi) grid with sigma at the top of
/// its grid.
std::vector<std::pair<double, double>> beta_sweep(
    int r, const std::vector<double>& betas,
    const std::vector<std::pair<double, double>>& c_phi_grid, double a_hi,
    FeedbackLaw law = FeedbackLaw::redesigned,
    const CertifyOptions& options = {});

}  // namespace delaypred
