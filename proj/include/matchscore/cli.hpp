// Implementations behind the command-line front end. Each command is a
// plain function over an options struct so behavior is testable without
// spawning a process; tools/matchscore.cpp only parses flags.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 numeric or
// solver failure. Artifact files contain no timestamps, so a rerun with the
// same options and seed is byte-identical.
#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "matchscore/io.hpp"

namespace matchscore::cli {

inline CaseKind parse_case(const std::string& s) {
  if (s == "case1") return CaseKind::case1;
  if (s == "case2") return CaseKind::case2;
  throw std::invalid_argument("unknown case: " + s + " (expected case1|case2)");
}

inline Model parse_model(const std::string& s) {
  if (s == "ut") return Model::ut;
  if (s == "t") return Model::t;
  if (s == "u") return Model::u;
  if (s == "none") return Model::none;
  throw std::invalid_argument("unknown model: " + s + " (expected ut|t|u|none)");
}

// "lo:hi:steps" grid axis syntax.
inline GridAxis parse_axis(const std::string& s) {
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("grid axis must be lo:hi:steps, got: " + s);
  GridAxis axis;
  axis.lo = std::stod(s.substr(0, c1));
  axis.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  axis.steps = std::stoi(s.substr(c2 + 1));
  return axis;
}

struct GenerateOptions {
  int n = 0;
  CaseKind case_kind = CaseKind::case2;
  double beta1 = 0.5;
  double beta2 = -2.0;
  double kappa = 8.0;
  std::uint64_t seed = 0;
};

struct EstimationOptions {
  Model model = Model::u;
  bool use_ir = false;
  double lambda = 100.0;
  bool ir_ignore_transfers = false;
  DEConfig de;
};

inline std::filesystem::path ensure_out_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct SimulatedMarket {
  Market market;
  Matrix values;
  MatchingOutcome outcome;
};

inline SimulatedMarket simulate_market(const GenerateOptions& gen) {
  SimulatedMarket sim;
  sim.market = generate_market(gen.n, gen.seed);
  const ProductionSpec truth{gen.case_kind, gen.beta1, gen.beta2, gen.kappa};
  sim.values = value_matrix(truth, sim.market);
  sim.outcome = solve_assignment(sim.values);
  return sim;
}

struct SimulateCommand {
  GenerateOptions gen;
  std::string out_dir = ".";
};

inline int run_simulate(const SimulateCommand& cmd) {
  const auto dir = ensure_out_dir(cmd.out_dir);
  const SimulatedMarket sim = simulate_market(cmd.gen);
  const StabilityReport report = verify_stability(sim.outcome, sim.values);
  write_json((dir / "market.json").string(), to_json(sim.market));
  write_file((dir / "covariates.csv").string(), covariates_csv(sim.market));
  write_json((dir / "outcome.json").string(), to_json(sim.outcome));
  write_json((dir / "stability.json").string(), to_json(report));
  std::cout << "simulate: n=" << cmd.gen.n << " matched=" << sim.outcome.matched_pairs.size()
            << " unmatched_buyers=" << sim.outcome.unmatched_buyers.size()
            << " stability: " << report.violations.size() << " violations\n";
  return report.pass() ? 0 : 3;
}

// Market/outcome inputs shared by estimate and grid: either artifact files
// or a fresh generation block when no market path is given.
struct LoadedProblem {
  Market market;
  MatchingOutcome outcome;
  CaseKind kind = CaseKind::case2;
  double kappa = 8.0;
};

inline LoadedProblem load_or_generate(const std::string& market_path,
                                      const std::string& outcome_path,
                                      const GenerateOptions& gen, CaseKind kind,
                                      double kappa) {
  LoadedProblem p;
  if (!market_path.empty()) {
    if (outcome_path.empty())
      throw std::invalid_argument("--outcome is required when --market is given");
    p.market = market_from_json(read_json(market_path));
    p.outcome = outcome_from_json(read_json(outcome_path));
    p.kind = kind;
    p.kappa = kappa;
  } else {
    const SimulatedMarket sim = simulate_market(gen);
    p.market = sim.market;
    p.outcome = sim.outcome;
    p.kind = gen.case_kind;
    p.kappa = gen.kappa;
  }
  return p;
}

inline ScoreConfig score_config(const EstimationOptions& est) {
  ScoreConfig config;
  config.has_unmatched = model_has_unmatched(est.model);
  config.has_transfers = model_has_transfers(est.model);
  config.use_ir = est.use_ir;
  config.lambda = est.lambda;
  config.ir_ignore_transfers = est.ir_ignore_transfers;
  return config;
}

struct EstimateCommand {
  std::string market_path;
  std::string outcome_path;
  GenerateOptions gen;
  CaseKind case_kind = CaseKind::case2;  // scoring specification
  double kappa = 8.0;
  EstimationOptions est;
  bool dump_inequalities = false;
  std::string out_dir = ".";
};

// Exact flatness probe: the weighted score is evaluated on a small
// beta1 x beta2 lattice; identical values across beta2 for every beta1 mean
// the objective cannot distinguish beta2 at all.
inline bool beta2_unidentified(const ScoreEvaluator& eval) {
  const double beta1_probe[] = {-5.0, 0.0, 0.5, 5.0};
  const double beta2_probe[] = {-10.0, -5.0, 0.0, 5.0, 10.0};
  for (double b1 : beta1_probe) {
    const double first = eval.weighted({b1, beta2_probe[0]});
    for (double b2 : beta2_probe)
      if (eval.weighted({b1, b2}) != first) return false;
  }
  return true;
}

inline int run_estimate(const EstimateCommand& cmd) {
  const auto dir = ensure_out_dir(cmd.out_dir);
  const LoadedProblem p = load_or_generate(cmd.market_path, cmd.outcome_path, cmd.gen,
                                           cmd.case_kind, cmd.kappa);
  const ScoreConfig config = score_config(cmd.est);
  const ObservedData data = observe(p.outcome, config.has_unmatched, config.has_transfers);
  const InequalitySet ineqs = build_inequalities(data, config);
  if (cmd.dump_inequalities)
    write_file((dir / "inequalities.csv").string(), inequalities_csv(ineqs));
  const ScoreEvaluator eval(ineqs, p.market, p.kind, p.kappa);
  const DEResult best =
      maximize([&](const Candidate& c) { return eval.weighted(c); }, cmd.est.de);
  const ScoreValue score = eval(best.best);

  json j;
  j["beta1"] = best.best.beta1;
  j["beta2"] = best.best.beta2;
  j["score"] = {{"pairwise_satisfied", score.pairwise_satisfied},
                {"ir_satisfied", score.ir_satisfied},
                {"weighted_total", score.weighted_total}};
  j["beta2_unidentified"] = beta2_unidentified(eval);
  j["regime"] = to_string(cmd.est.model);
  j["use_ir"] = cmd.est.use_ir;
  j["lambda"] = cmd.est.lambda;
  j["case"] = to_string(p.kind);
  j["kappa"] = p.kappa;
  j["de_seed"] = cmd.est.de.seed;
  j["trace"] = best.trace;
  write_json((dir / "estimate.json").string(), j);
  std::cout << "estimate: beta1=" << best.best.beta1 << " beta2=" << best.best.beta2
            << " weighted=" << score.weighted_total << "\n";
  return 0;
}

struct GridCommand {
  std::string market_path;
  std::string outcome_path;
  GenerateOptions gen;
  CaseKind case_kind = CaseKind::case2;
  double kappa = 8.0;
  EstimationOptions est;
  GridAxis beta1{-10.0, 10.0, 41};
  GridAxis beta2{-10.0, 10.0, 41};
  std::string out_dir = ".";
};

inline int run_grid(const GridCommand& cmd) {
  const auto dir = ensure_out_dir(cmd.out_dir);
  const LoadedProblem p = load_or_generate(cmd.market_path, cmd.outcome_path, cmd.gen,
                                           cmd.case_kind, cmd.kappa);
  const ScoreConfig config = score_config(cmd.est);
  const ObservedData data = observe(p.outcome, config.has_unmatched, config.has_transfers);
  const InequalitySet ineqs = build_inequalities(data, config);
  const ScoreEvaluator eval(ineqs, p.market, p.kind, p.kappa);
  const GridResult grid = objective_grid(eval, cmd.beta1, cmd.beta2);

  std::string regime = to_string(cmd.est.model);
  regime += cmd.est.use_ir ? "+ir" : "";
  write_file((dir / "grid.csv").string(), grid_csv(grid));
  write_json((dir / "grid.json").string(), grid_sidecar(grid, cmd.est.lambda, regime));
  std::cout << "grid: " << cmd.beta1.steps << "x" << cmd.beta2.steps << " argmax beta1="
            << grid.beta1_axis[grid.argmax_i] << " beta2=" << grid.beta2_axis[grid.argmax_j]
            << "\n";
  return 0;
}

struct ExperimentCommand {
  Scenario scenario;
  std::string profile;  // "", "desk", or "full"
  int jobs = 1;
  std::string out_dir = ".";
};

inline std::vector<Scenario> profile_scenarios(const Scenario& base, const std::string& profile) {
  if (profile.empty()) return {base};
  std::vector<int> sizes;
  int replications;
  if (profile == "desk") {
    sizes = {10, 50};
    replications = 20;
  } else if (profile == "full") {
    sizes = {10, 20, 30, 50, 100};
    replications = 100;
  } else {
    throw std::invalid_argument("unknown profile: " + profile + " (expected desk|full)");
  }
  const std::vector<double> beta2_grid = {-3.0, -2.0, -1.0, 0.0, 1.0};
  const Model models[] = {Model::ut, Model::t, Model::u, Model::none};
  std::vector<Scenario> out;
  for (int n : sizes)
    for (double beta2 : beta2_grid)
      for (Model model : models) {
        Scenario s = base;
        s.n = n;
        s.true_beta2 = beta2;
        s.model = model;
        s.replications = replications;
        out.push_back(s);
      }
  return out;
}

inline int run_experiment_cmd(const ExperimentCommand& cmd) {
  const auto dir = ensure_out_dir(cmd.out_dir);
  const std::vector<Scenario> scenarios = profile_scenarios(cmd.scenario, cmd.profile);
  std::vector<ExperimentSummary> summaries;
  std::string csv = summary_csv_header();
  for (const Scenario& s : scenarios) {
    summaries.push_back(run_experiment(s, cmd.jobs));
    csv += summary_csv_rows(summaries.back());
    const auto& b2 = summaries.back().beta2;
    std::cout << "experiment: case=" << to_string(s.case_kind) << " n=" << s.n
              << " model=" << to_string(s.model) << " ir=" << (s.use_ir ? "true" : "false")
              << " beta2 truth=" << s.true_beta2 << " bias=" << b2.bias
              << " rmse=" << b2.rmse << "\n";
  }
  write_file((dir / "summary.csv").string(), csv);
  write_json((dir / "manifest.json").string(), manifest_json(summaries));
  return 0;
}

struct SweepCommand {
  Scenario scenario;
  std::vector<double> lambdas;
  int jobs = 1;
  std::string out_dir = ".";
};

inline int run_sweep(const SweepCommand& cmd) {
  const auto dir = ensure_out_dir(cmd.out_dir);
  const std::vector<double> lambdas =
      cmd.lambdas.empty() ? default_sweep_lambdas() : cmd.lambdas;
  const std::vector<ExperimentSummary> summaries =
      lambda_sweep(cmd.scenario, lambdas, cmd.jobs);
  std::string csv = summary_csv_header();
  for (const auto& summary : summaries) {
    csv += summary_csv_rows(summary);
    std::cout << "sweep: lambda=" << summary.scenario.lambda
              << " beta2 bias=" << summary.beta2.bias << " rmse=" << summary.beta2.rmse
              << "\n";
  }
  write_file((dir / "sweep.csv").string(), csv);
  write_json((dir / "manifest.json").string(), manifest_json(summaries));
  return 0;
}

struct ScanCommand {
  Scenario scenario;
  std::vector<double> beta2_grid;  // empty -> default 21-point grid
  int jobs = 1;
  std::string out_dir = ".";
};

inline int run_scan(const ScanCommand& cmd) {
  const auto dir = ensure_out_dir(cmd.out_dir);
  const std::vector<double> grid =
      cmd.beta2_grid.empty() ? default_scan_grid() : cmd.beta2_grid;
  const std::vector<ThresholdScanRow> table =
      unmatched_threshold_scan(cmd.scenario, grid, cmd.jobs);
  std::string csv = "beta2,mean_unmatched_share,bias,rmse\n";
  for (const auto& row : table) {
    csv += fmt_double(row.beta2) + ',' + fmt_double(row.mean_unmatched_share) + ',' +
           fmt_double(row.bias_beta2) + ',' + fmt_double(row.rmse_beta2) + '\n';
    std::cout << "scan: beta2=" << row.beta2 << " share=" << row.mean_unmatched_share
              << " bias=" << row.bias_beta2 << "\n";
  }
  write_file((dir / "scan.csv").string(), csv);
  return 0;
}

}  // namespace matchscore::cli
