#include "delaypred/scenario.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "delaypred/errors.hpp"
#include "delaypred/numerics.hpp"
#include "delaypred/redesign.hpp"
#include "delaypred/robustness.hpp"

namespace delaypred {

using nlohmann::json;

namespace {

constexpr int kThetaGrid = 100000;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigurationError(path + ": " + what);
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const json* v = find(obj, key);
  if (!v) fail(path.empty() ? key : path + "." + key, "missing");
  return *v;
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

VectorXd vector(const json& v, const std::string& path, Eigen::Index n) {
  if (v.is_number()) {
    if (n != 1) fail(path, "expected an array of length " + std::to_string(n));
    return VectorXd::Constant(1, v.get<double>());
  }
  if (!v.is_array()) fail(path, "expected an array of numbers");
  if (n >= 0 && static_cast<Eigen::Index>(v.size()) != n)
    fail(path, "expected " + std::to_string(n) + " entries, got " +
                   std::to_string(v.size()));
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) =
        number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

/// Row-major nested arrays; a bare number is read as a 1 x 1 matrix.
MatrixXd square_matrix(const json& v, const std::string& path,
                       Eigen::Index n) {
  if (v.is_number()) {
    if (n >= 0 && n != 1) fail(path, "expected a " + std::to_string(n) +
                                         " x " + std::to_string(n) + " matrix");
    return MatrixXd::Constant(1, 1, v.get<double>());
  }
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  if (n >= 0 && rows != n)
    fail(path, "expected " + std::to_string(n) + " rows, got " +
                   std::to_string(rows));
  MatrixXd out(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    out.row(i) = vector(v[static_cast<std::size_t>(i)], row_path, rows).transpose();
  }
  return out;
}

LinearPlant parse_plant(const json& root) {
  const json& p = require(root, "plant", "");
  require_object(p, "plant");
  const MatrixXd A = square_matrix(require(p, "A", "plant"), "plant.A", -1);
  const Eigen::Index n = A.rows();
  const VectorXd B = vector(require(p, "B", "plant"), "plant.B", n);
  MatrixXd G = MatrixXd::Zero(n, n);
  if (const json* g = find(p, "G")) G = square_matrix(*g, "plant.G", n);
  double a = 0.0;
  if (const json* v = find(p, "a")) a = number(*v, "plant.a");
  const int r = integer(require(p, "r", "plant"), "plant.r");
  try {
    return LinearPlant(A, B, G, a, r);
  } catch (const ArgumentError& e) {
    fail("plant", e.what());
  }
}

NominalStabilizer parse_stabilizer(const json& root, const LinearPlant& plant) {
  const json& s = require(root, "stabilizer", "");
  require_object(s, "stabilizer");
  const VectorXd k = vector(require(s, "k", "stabilizer"), "stabilizer.k", plant.n());
  const MatrixXd P =
      square_matrix(require(s, "P", "stabilizer"), "stabilizer.P", plant.n());
  const json* lam = find(s, "lambda");
  try {
    if (!lam || (lam->is_string() && lam->get<std::string>() == "auto-validate"))
      return NominalStabilizer::auto_validated(plant, k, P);
    const double lambda = number(*lam, "stabilizer.lambda");
    NominalStabilizer stab(k, P, lambda);
    const double needed = validate_stabilizer(plant, stab);
    if (needed > lambda + 1e-9) {
      std::ostringstream os;
      os << "(A+Bk')'P(A+Bk') <= lambda P needs lambda >= " << needed;
      fail("stabilizer.lambda", os.str());
    }
    return stab;
  } catch (const ArgumentError& e) {
    fail("stabilizer", e.what());
  } catch (const ValidationError& e) {
    fail("stabilizer", e.what());
  }
}

DisturbanceStrategy parse_strategy(const json& v, std::uint64_t seed) {
  const std::string path = "simulation.strategy";
  if (v.is_string()) {
    json wrapped = {{"kind", v}};
    return parse_strategy(wrapped, seed);
  }
  require_object(v, path);
  const json& kind_v = require(v, "kind", path);
  if (!kind_v.is_string()) fail(path + ".kind", "expected a string");
  const std::string kind = kind_v.get<std::string>();
  if (kind == "zero") return DisturbanceStrategy::zero();
  if (kind == "constant")
    return DisturbanceStrategy::constant(
        number(require(v, "value", path), path + ".value"));
  if (kind == "uniform_random") return DisturbanceStrategy::uniform_random(seed);
  if (kind == "greedy_adversary") return DisturbanceStrategy::greedy_adversary();
  fail(path + ".kind",
       "expected zero, constant, uniform_random or greedy_adversary, got \"" +
           kind + "\"");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("scenario is not valid JSON: ") +
                             e.what());
  }
  require_object(root, "scenario");

  LinearPlant plant = parse_plant(root);
  NominalStabilizer stab = parse_stabilizer(root, plant);

  double c = 2.0 / (1.0 - stab.lambda());
  double phi = 1.0;
  double sigma = 0.0;
  bool sigma_auto = true;
  if (const json* cert = find(root, "certificate")) {
    require_object(*cert, "certificate");
    if (const json* v = find(*cert, "c")) c = number(*v, "certificate.c");
    if (const json* v = find(*cert, "phi")) phi = number(*v, "certificate.phi");
    if (const json* v = find(*cert, "sigma")) {
      if (v->is_string() && v->get<std::string>() == "auto") {
        sigma_auto = true;
      } else {
        sigma = number(*v, "certificate.sigma");
        sigma_auto = false;
      }
    }
  }
  BacksteppingCertificate cert;
  try {
    cert = BacksteppingCertificate::make(c, phi, sigma, stab.lambda());
  } catch (const ArgumentError& e) {
    fail("certificate", e.what());
  }
  if (sigma_auto) {
    const auto grid = sigma_grid(cert);
    if (!grid.empty()) cert.sigma = grid.front();
  }

  Scenario sc{std::move(plant), std::move(stab), cert, sigma_auto,
              FeedbackKind::nominal, 0.0, std::nullopt};

  if (const json* fb = find(root, "feedback")) {
    require_object(*fb, "feedback");
    const json& kind_v = require(*fb, "kind", "feedback");
    if (!kind_v.is_string()) fail("feedback.kind", "expected a string");
    const std::string kind = kind_v.get<std::string>();
    if (kind == "nominal") {
      sc.feedback = FeedbackKind::nominal;
    } else if (kind == "redesigned") {
      sc.feedback = FeedbackKind::redesigned;
    } else if (kind == "scalar_redesign") {
      sc.feedback = FeedbackKind::scalar_redesign;
      sc.q = number(require(*fb, "q", "feedback"), "feedback.q");
      if (!(sc.q > 0.0)) fail("feedback.q", "must be > 0");
      const LinearPlant& p = sc.plant;
      if (p.n() != 1 || p.r() != 1 || p.A()(0, 0) != 1.0 || p.B()(0) != 1.0 ||
          p.G()(0, 0) != 1.0)
        fail("feedback.kind",
             "scalar_redesign needs the scalar integrator A = B = G = 1, r = 1");
    } else {
      fail("feedback.kind",
           "expected nominal, redesigned or scalar_redesign, got \"" + kind +
               "\"");
    }
  }

  if (const json* simv = find(root, "simulation")) {
    require_object(*simv, "simulation");
    Scenario::Simulation sim;
    if (const json* v = find(*simv, "T")) sim.T = integer(*v, "simulation.T");
    if (sim.T < 1) fail("simulation.T", "must be >= 1");
    sim.x0 = vector(require(*simv, "x0", "simulation"), "simulation.x0",
                    sc.plant.n());
    sim.y0 = VectorXd::Zero(sc.plant.r());
    if (const json* v = find(*simv, "y0"))
      sim.y0 = sc.plant.r() == 0 && v->is_array() && v->empty()
                   ? VectorXd()
                   : vector(*v, "simulation.y0", sc.plant.r());
    std::uint64_t seed = kDefaultSeed;
    if (const json* v = find(*simv, "seed")) {
      if (!v->is_number_unsigned()) fail("simulation.seed", "expected an unsigned integer");
      seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(*simv, "strategy"))
      sim.strategy = parse_strategy(*v, seed);
    if (sim.strategy.kind == DisturbanceStrategy::Kind::constant &&
        !(std::abs(sim.strategy.value) <= sc.plant.a()))
      fail("simulation.strategy.value", "exceeds plant.a");
    sc.simulation = std::move(sim);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace {

RedesignSetup make_setup(const Scenario& sc) {
  try {
    return RedesignSetup(sc.plant, sc.stabilizer, sc.certificate);
  } catch (const ArgumentError& e) {
    throw ConfigurationError(std::string("certificate: ") + e.what());
  }
}

CommandReport scalar_certify_command(const Scenario& sc, CertifyMode mode,
                                     double value) {
  CommandReport out;
  std::ostringstream os;
  os << "law=scalar_redesign\n";
  os << "q=" << format_double(sc.q) << "\n";
  os << "grid=" << kThetaGrid << "\n";
  if (mode == CertifyMode::at) {
    const ScalarCertification cert = scalar_certify(value, sc.q, kThetaGrid);
    static constexpr const char* kNames[] = {"kink", "upper", "lower"};
    os << "a=" << format_double(value) << "\n";
    for (int i = 0; i < 3; ++i)
      os << "region_" << kNames[i] << "_worst="
         << format_double(cert.region_worst[i]) << "\n";
    os << "worst_theta=" << format_double(cert.worst_theta) << "\n";
    os << "margin=" << format_double(-cert.worst_margin) << "\n";
    os << "pass=" << (cert.pass ? "true" : "false") << "\n";
    out.pass = cert.pass;
    out.margin = -cert.worst_margin;
  } else {
    const double a = scalar_max_certified_a(sc.q, value, kThetaGrid);
    const ScalarCertification cert = scalar_certify(a, sc.q, kThetaGrid);
    os << "a_hi=" << format_double(value) << "\n";
    os << "largest_certified_a=" << format_double(a) << "\n";
    os << "saturated=" << (a == value ? "true" : "false") << "\n";
    os << "margin=" << format_double(-cert.worst_margin) << "\n";
    os << "pass=" << (cert.pass ? "true" : "false") << "\n";
    out.pass = cert.pass;
    out.margin = -cert.worst_margin;
    out.largest_certified_a = a;
  }
  os << "note=certified up to grid resolution\n";
  out.text = os.str();
  return out;
}

}  // namespace

CommandReport certify_scenario(const Scenario& sc, CertifyMode mode,
                               double value) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw ArgumentError("uncertainty bound must be a finite number >= 0");
  if (sc.feedback == FeedbackKind::scalar_redesign)
    return scalar_certify_command(sc, mode, value);

  const RedesignSetup setup = make_setup(sc);
  CertifyOptions options;
  options.law = sc.feedback == FeedbackKind::nominal ? FeedbackLaw::nominal
                                                     : FeedbackLaw::redesigned;
  CommandReport out;
  if (mode == CertifyMode::at) {
    const CertificationReport rep = sc.sigma_auto
                                        ? certify_auto_sigma(setup, value, options)
                                        : certify(setup, value, options);
    out.pass = rep.pass;
    out.margin = rep.margin;
    out.text = rep.to_text();
    return out;
  }

  const RedesignSetup target = [&] {
    if (!sc.sigma_auto) return setup;
    const auto grid = sigma_grid(setup.certificate());
    if (grid.empty())
      throw ConfigurationError(
          "certificate: lambda + 1/c >= 1 leaves no sigma to certify");
    return setup.with_sigma(grid.back());
  }();
  try {
    const MaxCertifiedResult res = max_certified_a(target, value, options);
    out.pass = true;
    out.margin = res.report.margin;
    out.largest_certified_a = res.a;
    out.text = res.report.to_text();
  } catch (const ConfigurationError&) {
    CertificationReport rep = certify(target, 0.0, options);
    rep.largest_certified_a = 0.0;
    out.pass = false;
    out.margin = rep.margin;
    out.largest_certified_a = 0.0;
    out.text = rep.to_text();
  }
  return out;
}

Policy scenario_policy(const Scenario& sc) {
  switch (sc.feedback) {
    case FeedbackKind::nominal: {
      auto plant = std::make_shared<const LinearPlant>(sc.plant);
      auto stab = std::make_shared<const NominalStabilizer>(sc.stabilizer);
      return [plant, stab](const ExtendedState& z) {
        return nominal_predictor_feedback(*plant, *stab, z);
      };
    }
    case FeedbackKind::redesigned: {
      auto setup = std::make_shared<const RedesignSetup>(make_setup(sc));
      const double a = sc.plant.a();
      return [setup, a](const ExtendedState& z) {
        return redesigned_feedback(*setup, z, a);
      };
    }
    case FeedbackKind::scalar_redesign: {
      const double a = sc.plant.a();
      const double q = sc.q;
      return [a, q](const ExtendedState& z) {
        return scalar_redesign_feedback(z.x(0), z.y(0), a, q);
      };
    }
  }
  throw ConfigurationError("feedback: unknown kind");
}

SimulationSummary simulate_scenario(const Scenario& sc, std::ostream& csv) {
  if (!sc.simulation) throw ConfigurationError("simulation: missing");
  const Scenario::Simulation& sim = *sc.simulation;
  const QuadraticLyapunov vbar(sc.plant, sc.stabilizer, sc.certificate);
  std::optional<RedesignSetup> setup;
  if (sc.plant.r() >= 1) {
    try {
      setup.emplace(sc.plant, sc.stabilizer, sc.certificate);
    } catch (const ArgumentError&) {
    }
  }
  SimulationContext ctx{&vbar, setup ? &*setup : nullptr};
  const ExtendedState z0{sim.x0, sim.y0};
  const Trajectory traj =
      simulate(sc.plant, scenario_policy(sc), sim.strategy, z0, sim.T, ctx);
  traj.write_csv(csv);
  return {decay_rate(traj), traj.diverged};
}

void write_table1_csv(std::ostream& out) {
  out << "r,necessary,sufficient,c_star\n";
  for (const RobustnessBound& row : table1()) {
    out << row.r << ',' << format_fixed(row.necessary, 6) << ','
        << format_fixed(row.sufficient, 6) << ',';
    if (row.c_star) out << format_fixed(*row.c_star, 6);
    out << '\n';
  }
}

std::string bound_line(int r) {
  const RobustnessBound b = sufficient_bound(r);
  std::string line = "necessary=" + format_fixed(b.necessary, 6) +
                     " sufficient=" + format_fixed(b.sufficient, 6) +
                     " c_star=" + (b.c_star ? format_fixed(*b.c_star, 6) : "n/a");
  return line;
}

std::string format_real(double v) {
  std::string s = format_double(v);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos)
    s += ".0";
  return s;
}

}  // namespace delaypred
