// delaypred command-line front end; talks to the library only through the C API.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "delaypred/delaypred.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int report_error(dp_status st) {
  std::fprintf(stderr, "error: %s: %s\n", dp_status_name(st), dp_last_error());
  return st == DP_ERR_NUMERICAL ? kExitFail : kExitUsage;
}

std::string real(double v) {
  char buf[64];
  if (dp_format_real(v, buf, sizeof buf) != DP_OK) return "nan";
  return buf;
}

int cmd_table1(const std::string& out) {
  const dp_status st = dp_table1_write(out.empty() ? nullptr : out.c_str());
  return st == DP_OK ? kExitPass : report_error(st);
}

int cmd_bound(int r) {
  char line[256];
  const dp_status st = dp_bound_line(r, line, sizeof line);
  if (st != DP_OK) return report_error(st);
  std::printf("%s\n", line);
  return kExitPass;
}

int cmd_certify(const std::string& path, dp_certify_mode mode, double value) {
  dp_scenario* sc = nullptr;
  dp_status st = dp_scenario_load(path.c_str(), &sc);
  if (st != DP_OK) return report_error(st);
  dp_report* rep = nullptr;
  st = dp_scenario_certify(sc, mode, value, &rep);
  dp_scenario_destroy(sc);
  if (st != DP_OK) return report_error(st);
  std::fputs(dp_report_text(rep), stdout);
  const int code = dp_report_pass(rep) ? kExitPass : kExitFail;
  dp_report_destroy(rep);
  return code;
}

int cmd_simulate(const std::string& path, const std::string& out) {
  dp_scenario* sc = nullptr;
  dp_status st = dp_scenario_load(path.c_str(), &sc);
  if (st != DP_OK) return report_error(st);
  double rate = 0.0;
  int diverged = 0;
  st = dp_scenario_simulate(sc, out.c_str(), &rate, &diverged);
  dp_scenario_destroy(sc);
  if (st != DP_OK) return report_error(st);
  std::printf("decay_rate=%s diverged=%s\n", real(rate).c_str(),
              diverged ? "true" : "false");
  return diverged ? kExitFail : kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictor feedback, robustness bounds and minimax redesign "
               "for discrete-time plants with input delay"};
  app.require_subcommand(1);

  std::string table_out;
  auto* table = app.add_subcommand("table1", "Robustness bounds for r = 0..10, 15, 20 as CSV");
  table->add_option("-o,--output", table_out, "Output CSV (default stdout)");

  int r = 0;
  auto* bound = app.add_subcommand("bound", "Necessary and sufficient bound for one delay");
  bound->add_option("--r", r, "Input delay in steps")->required();

  std::string certify_path;
  double a_value = 0.0;
  double search_hi = 0.0;
  auto* certify = app.add_subcommand("certify", "Certify a scenario's feedback law");
  certify->add_option("scenario", certify_path, "Scenario JSON")->required();
  auto* opt_a = certify->add_option("--a", a_value, "Uncertainty bound to certify");
  auto* opt_search =
      certify->add_option("--search", search_hi, "Largest certified bound up to this value");
  opt_a->excludes(opt_search);
  opt_search->excludes(opt_a);

  std::string sim_path;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario and write the trajectory CSV");
  simulate->add_option("scenario", sim_path, "Scenario JSON")->required();
  simulate->add_option("-o,--output", sim_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*table) return cmd_table1(table_out);
  if (*bound) return cmd_bound(r);
  if (*certify) {
    if (opt_a->count() == 0 && opt_search->count() == 0) {
      std::fprintf(stderr, "error: certify needs --a or --search\n");
      return kExitUsage;
    }
    return opt_a->count() ? cmd_certify(certify_path, DP_CERTIFY_AT, a_value)
                          : cmd_certify(certify_path, DP_CERTIFY_SEARCH, search_hi);
  }
  if (*simulate) return cmd_simulate(sim_path, sim_out);
  return kExitUsage;
}
