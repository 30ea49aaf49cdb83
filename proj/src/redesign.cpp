#include "delaypred/redesign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "delaypred/errors.hpp"

namespace delaypred {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dims(const RedesignSetup& setup, const ExtendedState& z) {
  if (z.x.size() != setup.plant().n() || z.y.size() != setup.plant().r())
    throw ArgumentError("extended state dimension does not match the setup");
}

}  // namespace

RedesignSetup::RedesignSetup(LinearPlant plant, NominalStabilizer stab,
                             BacksteppingCertificate cert)
    : plant_(std::move(plant)), stab_(std::move(stab)), cert_(cert),
      vbar_(plant_, stab_, cert_) {
  const int r = plant_.r();
  if (r < 1) throw ArgumentError("redesign needs an input delay r >= 1");
  if (stab_.n() != plant_.n())
    throw ArgumentError("stabilizer dimension does not match plant");

  const MatrixXd& A = plant_.A();
  const VectorXd& B = plant_.B();
  const MatrixXd& P = stab_.P();
  const VectorXd& k = stab_.k();

  c_powers_.resize(r + 1);
  c_powers_[0] = 1.0;
  for (int i = 1; i <= r; ++i) c_powers_[i] = c_powers_[i - 1] * cert_.c;

  p_ = c_powers_[r] * (B.dot(P * B) + cert_.phi);
  if (!(p_ > 0.0)) {
    std::ostringstream os;
    os << "p = c^r (B'PB + phi) must be positive, got " << p_;
    throw ArgumentError(os.str());
  }

  coupling_ = B.transpose() * P * A - cert_.phi * k.transpose();
  curvature_ = A.transpose() * P * A + cert_.phi * k * k.transpose();

  power_g_.resize(r + 1);
  for (int i = 0; i <= r; ++i) power_g_[i] = plant_.power(i) * plant_.G();
  l_row_ = c_powers_[r] * coupling_ * power_g_[r - 1];

  predictors_.reserve(r + 1);
  for (int i = 0; i <= r; ++i) predictors_.push_back(plant_.predictor_matrix(i));
}

RedesignSetup RedesignSetup::with_sigma(double sigma) const {
  return RedesignSetup(
      plant_, stab_,
      BacksteppingCertificate::make(cert_.c, cert_.phi, sigma, cert_.lambda));
}

double eval_L(const RedesignSetup& setup, const VectorXd& x) {
  if (x.size() != setup.plant().n())
    throw ArgumentError("state dimension does not match the setup");
  return setup.l_row().dot(x);
}

double eval_kappa(const RedesignSetup& setup, const ExtendedState& z) {
  check_dims(setup, z);
  const int r = setup.plant().r();
  const MatrixXd& P = setup.stabilizer().P();

  const VectorXd F1 = setup.predictor(1) * z.stacked();
  double kappa = F1.dot(P * (setup.power_g(0) * z.x));
  for (int i = 1; i <= r - 1; ++i) {
    kappa += setup.c_power(i) * z.y(i) *
             setup.coupling().dot(setup.power_g(i - 1) * z.x);
  }
  const VectorXd stacked = z.stacked();
  for (int i = 1; i <= r; ++i) {
    const VectorXd Fi = setup.predictor(i) * stacked;
    kappa += setup.c_power(i) *
             Fi.dot(setup.curvature() * (setup.power_g(i - 1) * z.x));
  }
  return kappa;
}

double eval_b(const RedesignSetup& setup, const ExtendedState& z) {
  check_dims(setup, z);
  const int r = setup.plant().r();
  return setup.c_power(r) *
         setup.coupling().dot(setup.predictor(r) * z.stacked());
}

double eval_resid(const RedesignSetup& setup, const ExtendedState& z,
                  double a, double sigma) {
  check_dims(setup, z);
  const int r = setup.plant().r();
  const double c = setup.certificate().c;
  const double phi = setup.certificate().phi;
  const MatrixXd& P = setup.stabilizer().P();
  const VectorXd& k = setup.stabilizer().k();
  const VectorXd stacked = z.stacked();
  const double a2 = a * a;

  double value = 0.0;
  for (int i = 0; i <= r; ++i) {
    const VectorXd g = setup.power_g(i) * z.x;
    value += a2 * setup.c_power(i) * g.dot(P * g);
  }
  for (int i = 1; i <= r; ++i) {
    const double kg = k.dot(setup.power_g(i - 1) * z.x);
    value += a2 * phi * setup.c_power(i) * kg * kg;
  }
  for (int i = 1; i <= r; ++i) {
    const VectorXd Fi = setup.predictor(i) * stacked;
    value += (1.0 - sigma * c) * setup.c_power(i - 1) * Fi.dot(P * Fi);
  }
  const VectorXd Fr = setup.predictor(r) * stacked;
  value += setup.c_power(r) * Fr.dot(setup.curvature() * Fr);
  for (int i = 2; i <= r; ++i) {
    const VectorXd previous = setup.predictor(i - 1) * stacked;
    const double gap = z.y(i - 1) - k.dot(previous);
    value += (1.0 - sigma * c) * phi * setup.c_power(i - 1) * gap * gap;
  }
  const double gap1 = z.y(0) - k.dot(z.x);
  value -= sigma * z.x.dot(P * z.x) + sigma * c * phi * gap1 * gap1;
  return value;
}

double worst_case_value(const RedesignSetup& setup, const ExtendedState& z,
                        double u, double a) {
  if (!(a >= 0.0)) throw ArgumentError("a must be >= 0");
  const double sigma = setup.certificate().sigma;
  const double p = setup.p();
  const double b = eval_b(setup, z);
  const double kappa = eval_kappa(setup, z);
  const double L = eval_L(setup, z.x);
  return p * u * u + 2.0 * b * u + 2.0 * a * std::abs(kappa + L * u) +
         eval_resid(setup, z, a, sigma) + sigma * setup.lyapunov()(z);
}

namespace {

Region region_of(double p, double kappa, double b, double L, double a) {
  const double s = p * kappa - b * L;
  const double aL2 = a * L * L;
  if (L != 0.0 && std::abs(s) < aL2) return Region::kink;
  return s >= aL2 ? Region::upper : Region::lower;
}

double minimax_input(Region region, double p, double kappa, double b, double L,
                     double a) {
  switch (region) {
    case Region::kink:
      return -kappa / L;
    case Region::upper:
      return -(a * L + b) / p;
    case Region::lower:
      return (a * L - b) / p;
  }
  return 0.0;
}

}  // namespace

Region classify_region(const RedesignSetup& setup, const ExtendedState& z,
                       double a) {
  return region_of(setup.p(), eval_kappa(setup, z), eval_b(setup, z),
                   eval_L(setup, z.x), a);
}

double redesigned_feedback(const RedesignSetup& setup, const ExtendedState& z,
                           double a) {
  const double p = setup.p();
  const double kappa = eval_kappa(setup, z);
  const double b = eval_b(setup, z);
  const double L = eval_L(setup, z.x);
  return minimax_input(region_of(p, kappa, b, L, a), p, kappa, b, L, a);
}

CompiledCoefficients compile_coefficients(const RedesignSetup& setup,
                                          double a) {
  const int n = setup.plant().n();
  const int r = setup.plant().r();
  const int dim = n + r;
  const double sigma = setup.certificate().sigma;
  CompiledCoefficients out;
  out.a = a;
  out.sigma = sigma;
  out.l = RowVectorXd::Zero(dim);
  out.l.head(n) = setup.l_row();
  out.b = RowVectorXd::Zero(dim);
  out.kappa = MatrixXd::Zero(dim, dim);
  out.resid = MatrixXd::Zero(dim, dim);
  out.vbar = setup.lyapunov().matrix();

  auto basis = [&](int j) {
    VectorXd e = VectorXd::Zero(dim);
    e(j) = 1.0;
    return ExtendedState::from_stacked(e, n, r);
  };
  auto pair = [&](int j, int k) {
    VectorXd e = VectorXd::Zero(dim);
    e(j) = 1.0;
    e(k) = 1.0;
    return ExtendedState::from_stacked(e, n, r);
  };

  std::vector<double> kd(dim), rd(dim);
  for (int j = 0; j < dim; ++j) {
    const ExtendedState ej = basis(j);
    out.b(j) = eval_b(setup, ej);
    kd[j] = eval_kappa(setup, ej);
    rd[j] = eval_resid(setup, ej, a, sigma);
    out.kappa(j, j) = kd[j];
    out.resid(j, j) = rd[j];
  }
  // Polarisation: q(e_j + e_k) = q_jj + q_kk + 2 q_jk.
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      const ExtendedState ejk = pair(j, k);
      const double kjk = 0.5 * (eval_kappa(setup, ejk) - kd[j] - kd[k]);
      const double rjk = 0.5 * (eval_resid(setup, ejk, a, sigma) - rd[j] - rd[k]);
      out.kappa(j, k) = out.kappa(k, j) = kjk;
      out.resid(j, k) = out.resid(k, j) = rjk;
    }
  }
  return out;
}

std::string CertificationReport::to_text() const {
  static constexpr const char* kNames[] = {"kink", "upper", "lower"};
  std::ostringstream os;
  os << "law=" << (law == FeedbackLaw::redesigned ? "redesigned" : "nominal")
     << "\n";
  os << "a=" << format_double(a) << "\n";
  os << "sigma=" << format_double(sigma) << "\n";
  os << "samples=" << samples << "\n";
  os << "skipped_singular=" << skipped_singular << "\n";
  for (int i = 0; i < 3; ++i) {
    os << "region_" << kNames[i] << "_count=" << counts[i] << "\n";
    os << "region_" << kNames[i] << "_worst=" << format_double(worst[i])
       << "\n";
    if (counts[i] > 0 && argmax[i].size() > 0) {
      os << "region_" << kNames[i] << "_argmax=";
      for (Eigen::Index j = 0; j < argmax[i].size(); ++j)
        os << (j ? " " : "") << format_double(argmax[i](j));
      os << "\n";
    }
  }
  os << "margin=" << format_double(margin) << "\n";
  os << "pass=" << (pass ? "true" : "false") << "\n";
  if (largest_certified_a) {
    os << "largest_certified_a=" << format_double(*largest_certified_a) << "\n";
    os << "saturated=" << (saturated ? "true" : "false") << "\n";
  }
  os << "note=certified up to sampling\n";
  return os.str();
}

namespace {

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double value = 0.0;
  while (i > 0) {
    value += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return value;
}

std::vector<unsigned> first_primes(int count) {
  std::vector<unsigned> primes;
  for (unsigned candidate = 2; static_cast<int>(primes.size()) < count;
       ++candidate) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(candidate);
  }
  return primes;
}

void push_normalized(std::vector<VectorXd>& out, VectorXd v) {
  const double norm = v.norm();
  if (norm > 0.0) out.push_back(v / norm);
}

}  // namespace

std::vector<VectorXd> certification_directions(int dim,
                                               const CertifyOptions& options) {
  std::vector<VectorXd> out;
  out.reserve(options.low_discrepancy_samples + options.random_samples +
              2 * dim * dim);
  const auto primes = first_primes(dim);
  for (int i = 1; i <= options.low_discrepancy_samples; ++i) {
    VectorXd v(dim);
    for (int j = 0; j < dim; ++j)
      v(j) = 2.0 * radical_inverse(static_cast<std::uint64_t>(i), primes[j]) - 1.0;
    push_normalized(out, std::move(v));
  }
  Rng rng(options.seed);
  for (int i = 0; i < options.random_samples; ++i) {
    VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v(j) = rng.normal();
    push_normalized(out, std::move(v));
  }
  for (int j = 0; j < dim; ++j) {
    for (double sign : {1.0, -1.0}) {
      VectorXd v = VectorXd::Zero(dim);
      v(j) = sign;
      out.push_back(v);
    }
  }
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      for (double sj : {1.0, -1.0}) {
        for (double sk : {1.0, -1.0}) {
          VectorXd v = VectorXd::Zero(dim);
          v(j) = sj;
          v(k) = sk;
          push_normalized(out, std::move(v));
        }
      }
    }
  }
  return out;
}

namespace {

struct RegionTally {
  std::array<double, 3> worst{kNegInf, kNegInf, kNegInf};
  std::array<std::size_t, 3> counts{};
  std::array<std::size_t, 3> arg{};
  std::size_t skipped = 0;
};

double quad(const MatrixXd& M, const VectorXd& z) {
  const Eigen::Index dim = z.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) row += M(i, j) * z(j);
    total += z(i) * row;
  }
  return total;
}

}  // namespace

CertificationReport certify(const RedesignSetup& setup, double a,
                            const CertifyOptions& options) {
  if (!(a >= 0.0)) throw ArgumentError("a must be >= 0");
  const int dim = setup.plant().extended_dim();
  const CompiledCoefficients coeffs = compile_coefficients(setup, a);
  // Sphere directions are mapped onto the level set V-bar = 1, so the worst
  // left-hand side reads as max V-bar(z+) - sigma and badly conditioned
  // Lyapunov matrices do not hide thin violating cones.
  const Eigen::LLT<MatrixXd> llt(setup.lyapunov().matrix());
  if (llt.info() != Eigen::Success)
    throw NumericalError("Lyapunov matrix is not positive definite");
  auto directions = certification_directions(dim, options);
  for (auto& w : directions) w = llt.matrixU().solve(w);
  const double p = setup.p();
  const RowVectorXd nominal_row =
      setup.stabilizer().k().transpose() * setup.predictor(setup.plant().r());

  std::vector<RegionTally> tallies(chunk_count(directions.size()));
  parallel_chunks(directions.size(), [&](std::size_t begin, std::size_t end,
                                         std::size_t chunk) {
    RegionTally tally;
    for (std::size_t s = begin; s < end; ++s) {
      const VectorXd& z = directions[s];
      const double L = coeffs.l.dot(z);
      const double b = coeffs.b.dot(z);
      const double kappa = quad(coeffs.kappa, z);
      const double resid = quad(coeffs.resid, z);
      const Region region = region_of(p, kappa, b, L, a);
      double lhs = 0.0;
      if (options.law == FeedbackLaw::nominal) {
        const double u = nominal_row.dot(z);
        lhs = p * u * u + 2.0 * b * u + 2.0 * a * std::abs(kappa + L * u) +
              resid;
      } else {
        switch (region) {
          case Region::kink:
            if (std::abs(L) < 1e-12) {
              ++tally.skipped;
              continue;
            }
            lhs = p * (kappa / L) * (kappa / L) - 2.0 * b * kappa / L + resid;
            break;
          case Region::upper:
            lhs = -(a * L + b) * (a * L + b) / p + resid + 2.0 * a * kappa;
            break;
          case Region::lower:
            lhs = -(a * L - b) * (a * L - b) / p + resid - 2.0 * a * kappa;
            break;
        }
      }
      const auto idx = static_cast<int>(region);
      ++tally.counts[idx];
      if (lhs > tally.worst[idx]) {
        tally.worst[idx] = lhs;
        tally.arg[idx] = s;
      }
    }
    tallies[chunk] = tally;
  });

  CertificationReport report;
  report.law = options.law;
  report.a = a;
  report.sigma = setup.certificate().sigma;
  report.samples = directions.size();
  report.worst = {kNegInf, kNegInf, kNegInf};
  std::array<std::size_t, 3> arg{};
  for (const auto& t : tallies) {
    report.skipped_singular += t.skipped;
    for (int i = 0; i < 3; ++i) {
      report.counts[i] += t.counts[i];
      // Chunks are visited in index order, so strict '>' keeps the lowest index.
      if (t.counts[i] > 0 && t.worst[i] > report.worst[i]) {
        report.worst[i] = t.worst[i];
        arg[i] = t.arg[i];
      }
    }
  }
  double overall = kNegInf;
  for (int i = 0; i < 3; ++i) {
    if (report.counts[i] > 0) {
      report.argmax[i] = directions[arg[i]];
      overall = std::max(overall, report.worst[i]);
    }
  }
  report.margin = -overall;
  report.pass = overall <= -kMarginFloor;
  return report;
}

std::vector<double> sigma_grid(const BacksteppingCertificate& cert) {
  const double lo = cert.lambda + 1.0 / cert.c;
  std::vector<double> grid;
  if (!(lo < 1.0)) return grid;
  grid.reserve(100);
  for (int j = 0; j < 100; ++j) grid.push_back(lo + (1.0 - lo) * j / 100.0);
  return grid;
}

CertificationReport certify_auto_sigma(const RedesignSetup& setup, double a,
                                       const CertifyOptions& options) {
  const auto grid = sigma_grid(setup.certificate());
  if (grid.empty()) return certify(setup, a, options);
  CertificationReport last;
  for (double sigma : grid) {
    last = certify(setup.with_sigma(sigma), a, options);
    if (last.pass) return last;
  }
  return last;
}

MaxCertifiedResult max_certified_a(const RedesignSetup& setup, double a_hi,
                                   const CertifyOptions& options) {
  if (!(a_hi >= 0.0)) throw ArgumentError("a_hi must be >= 0");
  CertificationReport at_zero = certify(setup, 0.0, options);
  if (!at_zero.pass) {
    std::ostringstream os;
    os << "certification fails already at a = 0 (margin "
       << format_double(at_zero.margin) << ", sigma "
       << format_double(setup.certificate().sigma) << ")";
    throw ConfigurationError(os.str());
  }
  MaxCertifiedResult result;
  CertificationReport at_hi = certify(setup, a_hi, options);
  if (at_hi.pass) {
    result.a = a_hi;
    result.saturated = true;
    result.report = at_hi;
  } else {
    double lo = 0.0, hi = a_hi;
    CertificationReport best = at_zero;
    while (hi - lo > 1e-4) {
      const double mid = 0.5 * (lo + hi);
      CertificationReport rep = certify(setup, mid, options);
      if (rep.pass) {
        lo = mid;
        best = rep;
      } else {
        hi = mid;
      }
    }
    result.a = lo;
    result.report = best;
  }
  result.report.largest_certified_a = result.a;
  result.report.saturated = result.saturated;
  return result;
}

SweepResult sweep_max_certified_a(const LinearPlant& plant,
                                  const NominalStabilizer& stab,
                                  const std::vector<SweepPoint>& grid,
                                  double a_hi, const CertifyOptions& options) {
  SweepResult out;
  bool have = false;
  for (const SweepPoint& point : grid) {
    double a = 0.0;
    try {
      RedesignSetup setup(plant, stab,
                          BacksteppingCertificate::make(point.c, point.phi,
                                                        point.sigma,
                                                        stab.lambda()));
      a = max_certified_a(setup, a_hi, options).a;
    } catch (const ArgumentError&) {
      a = 0.0;
    } catch (const ConfigurationError&) {
      a = 0.0;
    }
    out.table.emplace_back(point, a);
    if (!have || a > out.a) {
      out.a = a;
      out.best = point;
      have = true;
    }
  }
  return out;
}

double scalar_redesign_feedback(double x, double y1, double a, double q) {
  if (!(q > 0.0)) throw ArgumentError("q must be > 0");
  const double zeta = a / q;
  const double w = x * x + x * y1;
  if (w >= zeta * x * x) return -(1.0 + zeta) * x - y1;
  if (w <= -zeta * x * x) return -(1.0 - zeta) * x - y1;
  return -2.0 * x - 2.0 * y1;
}

namespace {

struct ThetaTable {
  std::vector<double> cos2;
  std::vector<double> sin2t;
  std::vector<double> theta;

  explicit ThetaTable(int grid) : cos2(grid), sin2t(grid), theta(grid) {
    for (int i = 0; i < grid; ++i) {
      const double t = 2.0 * M_PI * i / grid;
      const double c = std::cos(t);
      theta[i] = t;
      cos2[i] = c * c;
      sin2t[i] = std::sin(2.0 * t);
    }
  }
};

ScalarCertification scalar_certify_on(const ThetaTable& table, double a,
                                      double q) {
  const double zeta = a / q;
  const double a2 = a * a;
  const double c1 = 2.0 * a - a2 / q + (1.0 + q) * a2 - 1.0;
  const double s1 = a + 1.0 - q;
  const double c2 = (1.0 + q) * a2 - 2.0 * a - a2 / q - 1.0;
  const double s2 = 1.0 - a - q;
  const double c3 = (1.0 + q) * a2 - 1.0;

  ScalarCertification out;
  out.region_worst = {kNegInf, kNegInf, kNegInf};
  double worst = kNegInf;
  auto record = [&](int region, double excess, double theta) {
    out.region_worst[region] = std::max(out.region_worst[region], excess);
    if (excess > worst) {
      worst = excess;
      out.worst_theta = theta;
    }
  };
  for (std::size_t i = 0; i < table.theta.size(); ++i) {
    const double cs = table.cos2[i];
    const double sn = table.sin2t[i];
    const bool upper = sn >= 2.0 * (zeta - 1.0) * cs;
    const bool lower = sn <= -2.0 * (zeta + 1.0) * cs;
    if (upper) record(1, c1 * cs + s1 * sn - (q - 1.0), table.theta[i]);
    if (lower) record(2, c2 * cs + s2 * sn - (q - 1.0), table.theta[i]);
    if (!upper && !lower) record(0, c3 * cs + 1.0 + sn, table.theta[i]);
  }
  out.worst_margin = worst;
  out.pass = worst < 0.0;
  return out;
}

double scalar_max_on(const ThetaTable& table, double q, double a_hi) {
  if (!scalar_certify_on(table, 0.0, q).pass) return 0.0;
  if (scalar_certify_on(table, a_hi, q).pass) return a_hi;
  double lo = 0.0, hi = a_hi;
  while (hi - lo > 1e-5) {
    const double mid = 0.5 * (lo + hi);
    if (scalar_certify_on(table, mid, q).pass)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

ScalarCertification scalar_certify(double a, double q, int grid_size) {
  if (!(q > 0.0)) throw ArgumentError("q must be > 0");
  if (!(a >= 0.0)) throw ArgumentError("a must be >= 0");
  if (grid_size < 10000) throw ArgumentError("theta grid must have >= 1e4 points");
  return scalar_certify_on(ThetaTable(grid_size), a, q);
}

double scalar_max_certified_a(double q, double a_hi, int grid_size) {
  if (!(q > 0.0)) throw ArgumentError("q must be > 0");
  if (grid_size < 10000) throw ArgumentError("theta grid must have >= 1e4 points");
  return scalar_max_on(ThetaTable(grid_size), q, a_hi);
}

ScalarSearchResult scalar_q_search(double a_hi, int grid_size, double q_lo,
                                   double q_hi, double step) {
  if (!(q_lo > 0.0 && q_hi > q_lo && step > 0.0))
    throw ArgumentError("invalid q search range");
  if (grid_size < 10000) throw ArgumentError("theta grid must have >= 1e4 points");
  const ThetaTable table(grid_size);
  ScalarSearchResult best{q_lo, -1.0};
  const int steps = static_cast<int>(std::floor((q_hi - q_lo) / step + 1e-9));
  for (int i = 0; i <= steps; ++i) {
    const double q = q_lo + i * step;
    const double a = scalar_max_on(table, q, a_hi);
    if (a > best.a) best = {q, a};
  }
  const double lo = std::max(q_lo, best.q - step);
  const double hi = std::min(q_hi, best.q + step);
  if (hi > lo) {
    const auto refined = golden_section_maximize(
        [&](double q) { return scalar_max_on(table, q, a_hi); }, lo, hi, 1e-4);
    if (refined.value > best.a) best = {refined.argmax, refined.value};
  }
  return best;
}

std::vector<std::pair<double, double>> beta_sweep(
    int r, const std::vector<double>& betas,
    const std::vector<std::pair<double, double>>& c_phi_grid, double a_hi,
    FeedbackLaw law, const CertifyOptions& options) {
  CertifyOptions opts = options;
  opts.law = law;
  std::vector<std::pair<double, double>> out;
  for (double beta : betas) {
    const ScalarExamplePlant example(0.0, r, beta);
    const NominalStabilizer stab = example.stabilizer();
    std::vector<SweepPoint> grid;
    for (const auto& [c, phi] : c_phi_grid) {
      const double lo = stab.lambda() + 1.0 / c;
      if (!(lo < 1.0)) continue;
      grid.push_back({c, phi, lo + 0.99 * (1.0 - lo)});
    }
    const SweepResult res =
        sweep_max_certified_a(example.plant(), stab, grid, a_hi, opts);
    out.emplace_back(beta, res.a);
  }
  return out;
}

}  // namespace delaypred
