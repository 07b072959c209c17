#pragma once

// Command-line front end. Every command writes its JSON report to `out`,
// diagnostics to `err`, and returns the process exit code:
//   0 pass, 1 model-level failure, 2 input error, 3 I/O error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hbeliefs/calibrate.hpp"
#include "hbeliefs/errors.hpp"
#include "hbeliefs/io.hpp"
#include "hbeliefs/model.hpp"
#include "hbeliefs/simulate.hpp"
#include "hbeliefs/snapshot.hpp"
#include "hbeliefs/verify.hpp"

namespace hbeliefs::cli {

enum ExitCode : int { kPass = 0, kModelFailure = 1, kInputError = 2, kIoError = 3 };

struct EvaluateOptions {
  double t = 0.0;
  double x = 0.0;
};

struct SimulateOptions {
  std::size_t paths = 1;
  double horizon = 1.0;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double x0 = 0.0;
  std::string out = "paths.csv";
};

struct VerifyCliOptions {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::size_t paths = 100'000;
  unsigned threads = 1;
  double riskless_rate_fault = 0.0;
};

struct CalibrateOptions {
  std::vector<double> shares;
  double tol = 1e-10;
  double t = 0.0;
  double x = 0.0;
};

namespace detail {

inline nlohmann::json offending_json(const NonpositiveDenominator& e) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& o : e.offending()) list.push_back({{"beta", o.beta}, {"denominator", o.denominator}});
  return list;
}

/// Loads and validates; on failure reports and sets `code`.
inline std::optional<DenominatorTable> load_table(const std::string& path, std::ostream& out, std::ostream& err,
                                                  int& code) {
  try {
    return validate(load_economy(path));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    code = kInputError;
  } catch (const InvalidParameters& e) {
    err << "error: " << e.what() << '\n';
    code = kInputError;
  } catch (const CompositionLimitExceeded& e) {
    err << "error: " << e.what() << '\n';
    code = kInputError;
  } catch (const NonpositiveDenominator& e) {
    write_json(out, {{"valid", false}, {"offending", offending_json(e)}});
    err << "error: " << e.what() << '\n';
    code = kModelFailure;
  }
  return std::nullopt;
}

}  // namespace detail

inline int cmd_validate(const std::string& config, std::ostream& out, std::ostream& err) {
  int code = kPass;
  const auto tab = detail::load_table(config, out, err, code);
  if (!tab) return code;
  write_json(out, {{"valid", true},
                   {"min_denominator", tab->min_denominator()},
                   {"footnote_condition_holds", tab->footnote_condition_holds()}});
  return kPass;
}

inline int cmd_evaluate(const std::string& config, const EvaluateOptions& opt, std::ostream& out,
                        std::ostream& err) {
  int code = kPass;
  const auto tab = detail::load_table(config, out, err, code);
  if (!tab) return code;
  try {
    write_json(out, snapshot_to_json(snapshot({opt.t, opt.x}, *tab)));
  } catch (const DegenerateStockVolatility& e) {
    err << "error: " << e.what() << '\n';
    return kModelFailure;
  } catch (const InvalidParameters& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kPass;
}

inline int cmd_simulate(const std::string& config, const SimulateOptions& opt, std::ostream& out,
                        std::ostream& err) {
  int code = kPass;
  const auto tab = detail::load_table(config, out, err, code);
  if (!tab) return code;
  const PathGrid grid{0.0, opt.horizon, opt.steps};
  try {
    grid.check();
  } catch (const InvalidParameters& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  std::ofstream file(opt.out, std::ios::binary);
  if (!file) {
    err << "error: cannot write '" << opt.out << "'\n";
    return kIoError;
  }

  const std::size_t J = tab->params().num_agents();
  std::vector<std::vector<EquilibriumSnapshot>> rows;
  try {
    rows = parallel_map<std::vector<EquilibriumSnapshot>>(opt.paths, opt.threads, [&](std::size_t i) {
      SimulatedPath path{grid, {}, opt.seed, i};
      fill_brownian_path(grid, opt.x0, opt.seed, i, path.x_values);
      return evaluate_series(path, *tab);
    });
  } catch (const DegenerateStockVolatility& e) {
    err << "error: " << e.what() << '\n';
    return kModelFailure;
  }

  file << series_csv_header(J) << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) write_series_csv_rows(file, i, rows[i]);
  file.flush();
  if (!file) {
    err << "error: failed writing '" << opt.out << "'\n";
    return kIoError;
  }

  // column means over the terminal rows
  std::vector<double> sums(10 + 3 * J, 0.0);
  for (const auto& path_rows : rows) {
    const auto& s = path_rows.back();
    const double agg[] = {s.state.t,          s.state.x,      s.dividend,  s.zeta,      s.stock_price,
                          s.pd_ratio,         s.rates.riskless_rate, s.rates.kappa, s.stock.vol, s.stock.drift};
    for (std::size_t k = 0; k < 10; ++k) sums[k] += agg[k];
    for (std::size_t j = 0; j < J; ++j) {
      sums[10 + 3 * j] += s.consumptions[j];
      sums[11 + 3 * j] += s.wealths[j];
      sums[12 + 3 * j] += s.portfolios[j];
    }
  }
  const auto header = series_csv_header(J);
  std::vector<std::string> names;
  std::stringstream hs(header);
  for (std::string col; std::getline(hs, col, ',');) names.push_back(col);
  nlohmann::json means;
  for (std::size_t k = 0; k < sums.size(); ++k)
    means[names[k + 1]] = rows.empty() ? 0.0 : sums[k] / static_cast<double>(rows.size());
  write_json(out, {{"output", opt.out},
                   {"n_paths", opt.paths},
                   {"n_steps", opt.steps},
                   {"horizon", opt.horizon},
                   {"seed", opt.seed},
                   {"terminal_means", means}});
  return kPass;
}

inline int cmd_verify(const std::string& config, const VerifyCliOptions& opt, std::ostream& out,
                      std::ostream& err) {
  int code = kPass;
  const auto tab = detail::load_table(config, out, err, code);
  if (!tab) return code;

  VerifyOptions v;
  v.seed = opt.seed;
  v.mc_paths = opt.paths;
  v.threads = opt.threads;
  v.riskless_rate_fault = opt.riskless_rate_fault;
  const bool all = opt.suite == "all";

  std::vector<CheckResult> results;
  nlohmann::json notes = nlohmann::json::object();
  try {
    auto append = [&](std::vector<CheckResult> r) { results.insert(results.end(), r.begin(), r.end()); };
    if (all || opt.suite == "clearing") append(verify_clearing(*tab, v));
    if (all || opt.suite == "fd") append(verify_fd(*tab, v));
    if (all || opt.suite == "mc") {
      notes["oracle_moment_ratio"] = oracle_moment_ratio(*tab);
      append(verify_mc(*tab, v));
    }
    if (all || opt.suite == "martingale") append(verify_martingale(*tab, v));
  } catch (const DegenerateStockVolatility& e) {
    err << "error: " << e.what() << '\n';
    return kModelFailure;
  } catch (const TruncationTooLoose& e) {
    err << "error: " << e.what() << '\n';
    return kModelFailure;
  }

  bool passed = true;
  nlohmann::json checks = nlohmann::json::array(), failures = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json rec{{"suite", r.suite},
                       {"quantity", r.quantity},
                       {"observed", r.observed},
                       {"threshold", r.threshold},
                       {"passed", r.passed}};
    checks.push_back(rec);
    if (!r.passed) {
      passed = false;
      failures.push_back(rec);
      err << "FAIL " << r.suite << ' ' << r.quantity << ": observed " << format_double(r.observed)
          << " > threshold " << format_double(r.threshold) << '\n';
    }
  }
  nlohmann::json report{{"suite", opt.suite}, {"seed", opt.seed}, {"passed", passed}, {"checks", checks},
                        {"failures", failures}};
  if (!notes.empty()) report["notes"] = notes;
  write_json(out, report);
  return passed ? kPass : kModelFailure;
}

inline int cmd_calibrate(const std::string& config, const CalibrateOptions& opt, std::ostream& out,
                         std::ostream& err) {
  int code = kPass;
  const auto tab = detail::load_table(config, out, err, code);
  if (!tab) return code;
  CalibrationOptions copt;
  copt.tol = opt.tol;
  try {
    const auto res = solve_gamma(tab->params(), {opt.shares, {opt.t, opt.x}}, copt);
    write_json(out, {{"gamma", res.gamma},
                     {"achieved_shares", res.achieved_shares},
                     {"residual", res.residual},
                     {"iterations", res.iterations},
                     {"used_newton", res.used_newton}});
  } catch (const InvalidParameters& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NoConvergence& e) {
    write_json(out, {{"converged", false}, {"iterations", e.iterations()}, {"residual", e.residual()}});
    err << "error: " << e.what() << '\n';
    return kModelFailure;
  } catch (const ValidationLost& e) {
    err << "error: " << e.what() << '\n';
    return kModelFailure;
  }
  return kPass;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous-beliefs CRRA equilibrium: evaluate, simulate, verify, calibrate"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(36);

  std::string config;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config, "Economy JSON config")->required();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check every discount denominator");
  add_config(validate_cmd);

  EvaluateOptions eval;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Print the equilibrium snapshot at (t, x)");
  add_config(evaluate_cmd);
  evaluate_cmd->add_option("--t", eval.t, "Time")->capture_default_str();
  evaluate_cmd->add_option("--x", eval.x, "Brownian state")->capture_default_str();

  SimulateOptions sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate paths and write a long-format CSV");
  add_config(simulate_cmd);
  simulate_cmd->add_option("--paths", sim.paths, "Number of paths")->capture_default_str()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--horizon", sim.horizon, "Final time")->capture_default_str()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--steps", sim.steps, "Time steps per path")->capture_default_str()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate_cmd->add_option("--threads", sim.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--x0", sim.x0, "Initial Brownian state")->capture_default_str();
  simulate_cmd->add_option("--out", sim.out, "Output CSV path")->capture_default_str();

  VerifyCliOptions ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run invariant and oracle suites");
  add_config(verify_cmd);
  verify_cmd->add_option("--suite", ver.suite, "Suite to run")
      ->capture_default_str()
      ->check(CLI::IsMember({"clearing", "fd", "mc", "martingale", "all"}));
  verify_cmd->add_option("--seed", ver.seed, "Random seed")->capture_default_str();
  verify_cmd->add_option("--paths", ver.paths, "Monte Carlo paths")->capture_default_str()->check(CLI::PositiveNumber);
  verify_cmd->add_option("--threads", ver.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  // test hook; hidden from --help
  verify_cmd->add_option("--fault-riskless-rate", ver.riskless_rate_fault)->group("");

  CalibrateOptions cal;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Solve agent weights for target wealth shares");
  add_config(calibrate_cmd);
  calibrate_cmd->add_option("--shares", cal.shares, "Target shares s1,...,sJ")->required()->delimiter(',');
  calibrate_cmd->add_option("--tol", cal.tol, "Max share residual")->capture_default_str();
  calibrate_cmd->add_option("--t", cal.t, "Time of the target state")->capture_default_str();
  calibrate_cmd->add_option("--x", cal.x, "Brownian state of the target")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(argc > 1 && app.got_subcommand(argv[1]) ? argv[1] : "");
    return kPass;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, ee;
    const int rc = app.exit(e, o, ee);
    out << o.str();
    err << ee.str();
    return rc == 0 ? kPass : kInputError;
  }

  if (*validate_cmd) return cmd_validate(config, out, err);
  if (*evaluate_cmd) return cmd_evaluate(config, eval, out, err);
  if (*simulate_cmd) return cmd_simulate(config, sim, out, err);
  if (*verify_cmd) return cmd_verify(config, ver, out, err);
  return cmd_calibrate(config, cal, out, err);
}

}  // namespace hbeliefs::cli
