// Command-line front end: simulate | estimate | grid | experiment | sweep | scan.
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "matchscore/cli.hpp"

namespace {

using namespace matchscore;

struct ParsedStrings {
  std::string case_kind = "case2";
  std::string model = "u";
  std::string beta1_axis = "-10:10:41";
  std::string beta2_axis = "-10:10:41";
  std::string profile;
};

void add_generation_options(CLI::App* cmd, cli::GenerateOptions& gen, ParsedStrings& strings,
                            bool require_n) {
  auto* n = cmd->add_option("--n", gen.n, "Number of agents per side");
  if (require_n) n->required();
  cmd->add_option("--case", strings.case_kind, "Production specification: case1|case2");
  cmd->add_option("--beta1", gen.beta1, "True beta1");
  cmd->add_option("--beta2", gen.beta2, "True beta2");
  cmd->add_option("--kappa", gen.kappa, "Case 2 level constant (positive)");
  cmd->add_option("--seed", gen.seed, "Market seed");
}

void add_estimation_options(CLI::App* cmd, cli::EstimationOptions& est, ParsedStrings& strings) {
  cmd->add_option("--model", strings.model, "Data availability: ut|t|u|none");
  cmd->add_flag("--ir,!--no-ir", est.use_ir, "Include individual rationality rows");
  cmd->add_option("--lambda", est.lambda, "IR importance weight");
  cmd->add_flag("--ir-ignore-transfers", est.ir_ignore_transfers,
                "Score IR rows as f >= 0 even when transfers are observed");
  cmd->add_option("--population", est.de.population, "DE population size");
  cmd->add_option("--generations", est.de.max_generations, "DE generations");
  cmd->add_option("--de-weight", est.de.differential_weight, "DE differential weight");
  cmd->add_option("--de-crossover", est.de.crossover_rate, "DE crossover rate");
  cmd->add_option("--de-seed", est.de.seed, "DE stream seed");
}

void add_scenario_options(CLI::App* cmd, Scenario& scenario, ParsedStrings& strings) {
  cmd->add_option("--case", strings.case_kind, "Production specification: case1|case2");
  cmd->add_option("--n", scenario.n, "Number of agents per side");
  cmd->add_option("--beta1", scenario.true_beta1, "True beta1");
  cmd->add_option("--beta2", scenario.true_beta2, "True beta2");
  cmd->add_option("--kappa", scenario.kappa, "Case 2 level constant");
  cmd->add_option("--model", strings.model, "Data availability: ut|t|u|none");
  cmd->add_flag("--ir,!--no-ir", scenario.use_ir, "Include IR rows");
  cmd->add_option("--lambda", scenario.lambda, "IR importance weight");
  cmd->add_flag("--ir-ignore-transfers", scenario.ir_ignore_transfers,
                "Score IR rows as f >= 0 even when transfers are observed");
  cmd->add_option("--replications", scenario.replications, "Monte Carlo replications");
  cmd->add_option("--base-seed", scenario.base_seed, "Base seed for the study");
  cmd->add_option("--population", scenario.de.population, "DE population size");
  cmd->add_option("--generations", scenario.de.max_generations, "DE generations");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matching market simulation and maximum-score estimation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML config file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for replication batches")
      ->envname("MATCHSCORE_JOBS");

  cli::SimulateCommand simulate;
  cli::EstimateCommand estimate;
  cli::GridCommand grid;
  cli::ExperimentCommand experiment;
  cli::SweepCommand sweep;
  cli::ScanCommand scan;
  ParsedStrings sim_s, est_s, grid_s, exp_s, sweep_s, scan_s;
  cli::GenerateOptions grid_gen;

  auto* sim_cmd = app.add_subcommand("simulate", "Generate a market and solve its equilibrium");
  add_generation_options(sim_cmd, simulate.gen, sim_s, true);
  sim_cmd->add_option("--out", simulate.out_dir, "Output directory");

  auto* est_cmd = app.add_subcommand("estimate", "Maximum-score estimation on one market");
  est_cmd->add_option("--market", estimate.market_path, "Existing market.json");
  est_cmd->add_option("--outcome", estimate.outcome_path, "Existing outcome.json");
  add_generation_options(est_cmd, estimate.gen, est_s, false);
  add_estimation_options(est_cmd, estimate.est, est_s);
  est_cmd->add_flag("--dump-inequalities", estimate.dump_inequalities,
                    "Also write the inequality rows as inequalities.csv");
  est_cmd->add_option("--out", estimate.out_dir, "Output directory");

  auto* grid_cmd = app.add_subcommand("grid", "Objective surface over a beta lattice");
  grid_cmd->add_option("--market", grid.market_path, "Existing market.json");
  grid_cmd->add_option("--outcome", grid.outcome_path, "Existing outcome.json");
  grid_cmd->add_option("--n", grid_gen.n, "Number of agents per side");
  grid_cmd->add_option("--case", grid_s.case_kind, "Production specification: case1|case2");
  grid_cmd->add_option("--true-beta1", grid_gen.beta1, "True beta1 for generation");
  grid_cmd->add_option("--true-beta2", grid_gen.beta2, "True beta2 for generation");
  grid_cmd->add_option("--kappa", grid_gen.kappa, "Case 2 level constant");
  grid_cmd->add_option("--seed", grid_gen.seed, "Market seed");
  grid_cmd->add_option("--beta1", grid_s.beta1_axis, "beta1 axis as lo:hi:steps");
  grid_cmd->add_option("--beta2", grid_s.beta2_axis, "beta2 axis as lo:hi:steps");
  add_estimation_options(grid_cmd, grid.est, grid_s);
  grid_cmd->add_option("--out", grid.out_dir, "Output directory");

  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo bias/RMSE study");
  add_scenario_options(exp_cmd, experiment.scenario, exp_s);
  exp_cmd->add_option("--profile", exp_s.profile, "Scenario battery: desk|full");
  exp_cmd->add_option("--out", experiment.out_dir, "Output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "Lambda sensitivity sweep");
  add_scenario_options(sweep_cmd, sweep.scenario, sweep_s);
  sweep_cmd->add_option("--lambdas", sweep.lambdas, "Importance weights to sweep")
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep.out_dir, "Output directory");
  sweep.scenario.use_ir = true;

  auto* scan_cmd = app.add_subcommand("scan", "Unmatched-share threshold scan over beta2");
  scan.scenario.n = 100;
  scan.scenario.model = Model::u;
  scan.scenario.use_ir = true;
  add_scenario_options(scan_cmd, scan.scenario, scan_s);
  scan_s.model = "u";
  scan_cmd->add_option("--beta2-grid", scan.beta2_grid, "Explicit beta2 grid")->delimiter(',');
  scan_cmd->add_option("--out", scan.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (sim_cmd->parsed()) {
      simulate.gen.case_kind = cli::parse_case(sim_s.case_kind);
      return cli::run_simulate(simulate);
    }
    if (est_cmd->parsed()) {
      estimate.gen.case_kind = cli::parse_case(est_s.case_kind);
      estimate.case_kind = estimate.gen.case_kind;
      estimate.kappa = estimate.gen.kappa;
      estimate.est.model = cli::parse_model(est_s.model);
      if (estimate.market_path.empty() && estimate.gen.n < 1)
        throw std::invalid_argument("estimate: provide --market/--outcome or --n");
      return cli::run_estimate(estimate);
    }
    if (grid_cmd->parsed()) {
      grid.gen = grid_gen;
      grid.gen.case_kind = cli::parse_case(grid_s.case_kind);
      grid.case_kind = grid.gen.case_kind;
      grid.kappa = grid_gen.kappa;
      grid.est.model = cli::parse_model(grid_s.model);
      grid.beta1 = cli::parse_axis(grid_s.beta1_axis);
      grid.beta2 = cli::parse_axis(grid_s.beta2_axis);
      if (grid.market_path.empty() && grid.gen.n < 1)
        throw std::invalid_argument("grid: provide --market/--outcome or --n");
      return cli::run_grid(grid);
    }
    if (exp_cmd->parsed()) {
      experiment.scenario.case_kind = cli::parse_case(exp_s.case_kind);
      experiment.scenario.model = cli::parse_model(exp_s.model);
      experiment.profile = exp_s.profile;
      experiment.jobs = jobs;
      return cli::run_experiment_cmd(experiment);
    }
    if (sweep_cmd->parsed()) {
      sweep.scenario.case_kind = cli::parse_case(sweep_s.case_kind);
      sweep.scenario.model = cli::parse_model(sweep_s.model);
      sweep.scenario.use_ir = true;
      sweep.jobs = jobs;
      return cli::run_sweep(sweep);
    }
    if (scan_cmd->parsed()) {
      scan.scenario.case_kind = cli::parse_case(scan_s.case_kind);
      scan.scenario.model = cli::parse_model(scan_s.model);
      scan.jobs = jobs;
      return cli::run_scan(scan);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
