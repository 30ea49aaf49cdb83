#include "delaypred/delaypred.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "delaypred/backstepping.hpp"
#include "delaypred/core_model.hpp"
#include "delaypred/errors.hpp"
#include "delaypred/redesign.hpp"
#include "delaypred/robustness.hpp"
#include "delaypred/scenario.hpp"

using namespace delaypred;

struct dp_plant {
  LinearPlant plant;
};

struct dp_stabilizer {
  NominalStabilizer stab;
};

struct dp_setup {
  RedesignSetup setup;
};

struct dp_report {
  bool pass = false;
  double margin = 0.0;
  std::optional<double> largest_a;
  std::string text;
};

struct dp_scenario {
  Scenario scenario;
};

namespace {

thread_local std::string g_last_error;

template <class F>
dp_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return DP_OK;
  } catch (const ArgumentError& e) {
    g_last_error = e.what();
    return DP_ERR_ARGUMENT;
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    return DP_ERR_VALIDATION;
  } catch (const NumericalError& e) {
    g_last_error = e.what();
    return DP_ERR_NUMERICAL;
  } catch (const ConfigurationError& e) {
    g_last_error = e.what();
    return DP_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " must not be NULL");
}

ExtendedState read_state(int n, int r, const double* x, const double* y) {
  need(x, "x");
  if (r > 0) need(y, "y");
  ExtendedState z;
  z.x = Eigen::Map<const VectorXd>(x, n);
  z.y = r > 0 ? VectorXd(Eigen::Map<const VectorXd>(y, r)) : VectorXd();
  return z;
}

ExtendedState read_state(const LinearPlant& p, const double* x,
                         const double* y) {
  return read_state(p.n(), p.r(), x, y);
}

MatrixXd read_matrix(const double* data, int n) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(data, n, n);
}

void copy_string(const std::string& s, char* buf, int size) {
  need(buf, "buf");
  if (size <= 0 || static_cast<std::size_t>(size) <= s.size())
    throw ArgumentError("buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

dp_report* make_report(const CertificationReport& rep) {
  return new dp_report{rep.pass, rep.margin, rep.largest_certified_a,
                       rep.to_text()};
}

}  // namespace

extern "C" {

const char* dp_last_error(void) { return g_last_error.c_str(); }

const char* dp_status_name(dp_status status) {
  switch (status) {
    case DP_OK:
      return "ok";
    case DP_ERR_ARGUMENT:
      return "argument error";
    case DP_ERR_VALIDATION:
      return "validation error";
    case DP_ERR_NUMERICAL:
      return "numerical error";
    case DP_ERR_CONFIG:
      return "configuration error";
    case DP_ERR_IO:
      return "i/o error";
    case DP_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

dp_status dp_plant_create(const double* A, const double* B, const double* G,
                          int n, double a, int r, dp_plant** out) {
  return guarded([&] {
    need(A, "A");
    need(B, "B");
    need(out, "out");
    if (n <= 0) throw ArgumentError("n must be positive");
    const MatrixXd Gm = G ? read_matrix(G, n) : MatrixXd::Zero(n, n);
    *out = new dp_plant{LinearPlant(read_matrix(A, n),
                                    Eigen::Map<const VectorXd>(B, n), Gm, a, r)};
  });
}

void dp_plant_destroy(dp_plant* plant) { delete plant; }

int dp_plant_n(const dp_plant* plant) { return plant ? plant->plant.n() : 0; }

int dp_plant_r(const dp_plant* plant) { return plant ? plant->plant.r() : 0; }

dp_status dp_step(const dp_plant* plant, const double* x, const double* y,
                  double u, double d, double* x_out, double* y_out) {
  return guarded([&] {
    need(plant, "plant");
    need(x_out, "x_out");
    const LinearPlant& p = plant->plant;
    if (p.r() > 0) need(y_out, "y_out");
    const ExtendedState next = step_extended(p, read_state(p, x, y), u, d);
    VectorXd::Map(x_out, p.n()) = next.x;
    if (p.r() > 0) VectorXd::Map(y_out, p.r()) = next.y;
  });
}

dp_status dp_predictor(const dp_plant* plant, const double* x, const double* y,
                       int i, double* out) {
  return guarded([&] {
    need(plant, "plant");
    need(out, "out");
    const LinearPlant& p = plant->plant;
    VectorXd::Map(out, p.n()) = predictor_map(p, read_state(p, x, y), i);
  });
}

dp_status dp_stabilizer_create(const dp_plant* plant, const double* k,
                               const double* P, double lambda,
                               dp_stabilizer** out) {
  return guarded([&] {
    need(plant, "plant");
    need(k, "k");
    need(P, "P");
    need(out, "out");
    const int n = plant->plant.n();
    const VectorXd kv = Eigen::Map<const VectorXd>(k, n);
    const MatrixXd Pm = read_matrix(P, n);
    if (lambda < 0.0) {
      *out = new dp_stabilizer{
          NominalStabilizer::auto_validated(plant->plant, kv, Pm)};
    } else {
      *out = new dp_stabilizer{NominalStabilizer(kv, Pm, lambda)};
    }
  });
}

void dp_stabilizer_destroy(dp_stabilizer* stab) { delete stab; }

double dp_stabilizer_lambda(const dp_stabilizer* stab) {
  return stab ? stab->stab.lambda() : std::numeric_limits<double>::quiet_NaN();
}

dp_status dp_validate_stabilizer(const dp_plant* plant,
                                 const dp_stabilizer* stab,
                                 double* lambda_star) {
  return guarded([&] {
    need(plant, "plant");
    need(stab, "stab");
    need(lambda_star, "lambda_star");
    *lambda_star = validate_stabilizer(plant->plant, stab->stab);
  });
}

dp_status dp_nominal_feedback(const dp_plant* plant, const dp_stabilizer* stab,
                              const double* x, const double* y, double* u) {
  return guarded([&] {
    need(plant, "plant");
    need(stab, "stab");
    need(u, "u");
    *u = nominal_predictor_feedback(plant->plant, stab->stab,
                                    read_state(plant->plant, x, y));
  });
}

dp_status dp_setup_create(const dp_plant* plant, const dp_stabilizer* stab,
                          double c, double phi, double sigma, dp_setup** out) {
  return guarded([&] {
    need(plant, "plant");
    need(stab, "stab");
    need(out, "out");
    *out = new dp_setup{RedesignSetup(
        plant->plant, stab->stab,
        BacksteppingCertificate::make(c, phi, sigma, stab->stab.lambda()))};
  });
}

void dp_setup_destroy(dp_setup* setup) { delete setup; }

dp_status dp_lyapunov(const dp_setup* setup, const double* x, const double* y,
                      double* out) {
  return guarded([&] {
    need(setup, "setup");
    need(out, "out");
    *out = setup->setup.lyapunov()(read_state(setup->setup.plant(), x, y));
  });
}

dp_status dp_redesigned_feedback(const dp_setup* setup, const double* x,
                                 const double* y, double a, double* u) {
  return guarded([&] {
    need(setup, "setup");
    need(u, "u");
    *u = redesigned_feedback(setup->setup,
                             read_state(setup->setup.plant(), x, y), a);
  });
}

dp_status dp_worst_case_value(const dp_setup* setup, const double* x,
                              const double* y, double u, double a,
                              double* out) {
  return guarded([&] {
    need(setup, "setup");
    need(out, "out");
    *out = worst_case_value(setup->setup,
                            read_state(setup->setup.plant(), x, y), u, a);
  });
}

dp_status dp_certify(const dp_setup* setup, double a, dp_law law,
                     dp_report** out) {
  return guarded([&] {
    need(setup, "setup");
    need(out, "out");
    CertifyOptions options;
    options.law = law == DP_LAW_NOMINAL ? FeedbackLaw::nominal
                                        : FeedbackLaw::redesigned;
    *out = make_report(certify(setup->setup, a, options));
  });
}

dp_status dp_max_certified_a(const dp_setup* setup, double a_hi, dp_law law,
                             dp_report** out) {
  return guarded([&] {
    need(setup, "setup");
    need(out, "out");
    CertifyOptions options;
    options.law = law == DP_LAW_NOMINAL ? FeedbackLaw::nominal
                                        : FeedbackLaw::redesigned;
    *out = make_report(max_certified_a(setup->setup, a_hi, options).report);
  });
}

int dp_report_pass(const dp_report* report) {
  return report && report->pass ? 1 : 0;
}

double dp_report_margin(const dp_report* report) {
  return report ? report->margin : std::numeric_limits<double>::quiet_NaN();
}

int dp_report_largest_a(const dp_report* report, double* a) {
  if (!report || !report->largest_a) return 0;
  if (a) *a = *report->largest_a;
  return 1;
}

const char* dp_report_text(const dp_report* report) {
  return report ? report->text.c_str() : "";
}

void dp_report_destroy(dp_report* report) { delete report; }

dp_status dp_bound(int r, double* necessary, double* sufficient,
                   double* c_star) {
  return guarded([&] {
    const RobustnessBound b = sufficient_bound(r);
    if (necessary) *necessary = b.necessary;
    if (sufficient) *sufficient = b.sufficient;
    if (c_star)
      *c_star = b.c_star ? *b.c_star : std::numeric_limits<double>::quiet_NaN();
  });
}

dp_status dp_bound_line(int r, char* buf, int size) {
  return guarded([&] { copy_string(bound_line(r), buf, size); });
}

dp_status dp_table1_write(const char* path) {
  if (!path) return guarded([&] { write_table1_csv(std::cout); });
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    g_last_error = std::string("cannot open ") + path + " for writing";
    return DP_ERR_IO;
  }
  const dp_status st = guarded([&] { write_table1_csv(out); });
  out.close();
  if (st == DP_OK && !out) {
    g_last_error = std::string("write to ") + path + " failed";
    return DP_ERR_IO;
  }
  return st;
}

dp_status dp_scalar_certify(double a, double q, int grid, int* pass,
                            double* worst_margin) {
  return guarded([&] {
    const ScalarCertification cert = scalar_certify(a, q, grid);
    if (pass) *pass = cert.pass ? 1 : 0;
    if (worst_margin) *worst_margin = cert.worst_margin;
  });
}

dp_status dp_scenario_load(const char* path, dp_scenario** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new dp_scenario{load_scenario(path)};
  });
}

void dp_scenario_destroy(dp_scenario* scenario) { delete scenario; }

dp_status dp_scenario_certify(const dp_scenario* scenario,
                              dp_certify_mode mode, double value,
                              dp_report** out) {
  return guarded([&] {
    need(scenario, "scenario");
    need(out, "out");
    const CommandReport rep = certify_scenario(
        scenario->scenario,
        mode == DP_CERTIFY_SEARCH ? CertifyMode::search : CertifyMode::at,
        value);
    *out = new dp_report{rep.pass, rep.margin, rep.largest_certified_a,
                         rep.text};
  });
}

dp_status dp_scenario_simulate(const dp_scenario* scenario,
                               const char* csv_path, double* decay_rate,
                               int* diverged) {
  if (!scenario) {
    g_last_error = "scenario must not be NULL";
    return DP_ERR_ARGUMENT;
  }
  SimulationSummary summary;
  dp_status st = DP_OK;
  if (!csv_path) {
    st = guarded([&] { summary = simulate_scenario(scenario->scenario, std::cout); });
  } else {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) {
      g_last_error = std::string("cannot open ") + csv_path + " for writing";
      return DP_ERR_IO;
    }
    st = guarded([&] { summary = simulate_scenario(scenario->scenario, out); });
    out.close();
    if (st == DP_OK && !out) {
      g_last_error = std::string("write to ") + csv_path + " failed";
      return DP_ERR_IO;
    }
  }
  if (st != DP_OK) return st;
  if (decay_rate) *decay_rate = summary.decay_rate;
  if (diverged) *diverged = summary.diverged ? 1 : 0;
  return DP_OK;
}

dp_status dp_format_real(double v, char* buf, int size) {
  return guarded([&] { copy_string(format_real(v), buf, size); });
}

}  // extern "C"
