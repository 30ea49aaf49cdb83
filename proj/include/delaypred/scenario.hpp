#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "delaypred/backstepping.hpp"
#include "delaypred/core_model.hpp"
#include "delaypred/simulation.hpp"

namespace delaypred {

enum class FeedbackKind { nominal, redesigned, scalar_redesign };

/// A scenario file: plant, nominal design, certificate constants, optional
/// simulation block and the feedback to analyse.
struct Scenario {
  LinearPlant plant;
  NominalStabilizer stabilizer;
  BacksteppingCertificate certificate;
  bool sigma_auto = true;

  FeedbackKind feedback = FeedbackKind::nominal;
  double q = 0.0;  // scalar_redesign only

  struct Simulation {
    int T = 200;
    VectorXd x0;
    VectorXd y0;
    DisturbanceStrategy strategy;
  };
  std::optional<Simulation> simulation;
};

/// Parses scenario JSON; errors are ConfigurationError naming the field path.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

enum class CertifyMode { at, search };

/// Result of the certify command: the report text plus what the exit code
/// depends on.
struct CommandReport {
  bool pass = false;
  double margin = 0.0;
  std::optional<double> largest_certified_a;
  std::string text;
};

/// `--a value` checks one uncertainty bound, `--search a_hi` bisects for the
/// largest certified one. scalar_redesign uses the theta inequalities on a
/// 1e5-point grid; the other laws use the sampled region inequalities.
CommandReport certify_scenario(const Scenario& sc, CertifyMode mode,
                               double value);

struct SimulationSummary {
  double decay_rate = 0.0;
  bool diverged = false;
};

/// Feedback policy selected by the scenario (owns whatever it captures).
Policy scenario_policy(const Scenario& sc);

/// Runs the simulation block and writes the trajectory CSV to `csv`.
SimulationSummary simulate_scenario(const Scenario& sc, std::ostream& csv);

/// `r,necessary,sufficient,c_star` rows, 6 decimals; c_star empty for r <= 1.
void write_table1_csv(std::ostream& out);

/// `necessary=... sufficient=... c_star=...` (c_star n/a for r <= 1).
std::string bound_line(int r);

/// Like format_double but always shows a decimal point ("1.0", not "1").
std::string format_real(double v);

}  // namespace delaypred
