// Simulation studies: generate markets, solve equilibria, estimate under a
// data-availability model, and aggregate bias/RMSE across replications.
//
// Seeding: each replication draws its market from
//   combine_seed(combine_seed(base_seed, scenario_hash(scenario)), r)
// so scenarios redraw independently (different models or weights see
// different markets, mirroring how the study tables were produced) while a
// (scenario, base_seed) pair pins every number in the summary. The DE stream
// is derived from the market seed with a fixed tag.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "matchscore/assignment.hpp"
#include "matchscore/estimator.hpp"
#include "matchscore/inequalities.hpp"
#include "matchscore/market.hpp"

namespace matchscore {

enum class Model { ut, t, u, none };

inline bool model_has_unmatched(Model m) { return m == Model::ut || m == Model::u; }
inline bool model_has_transfers(Model m) { return m == Model::ut || m == Model::t; }

inline const char* to_string(Model m) {
  switch (m) {
    case Model::ut: return "ut";
    case Model::t: return "t";
    case Model::u: return "u";
    case Model::none: return "none";
  }
  return "?";
}

inline const char* to_string(CaseKind k) {
  return k == CaseKind::case1 ? "case1" : "case2";
}

struct Scenario {
  CaseKind case_kind = CaseKind::case2;
  int n = 50;
  double true_beta1 = 0.5;
  double true_beta2 = -2.0;
  double kappa = 8.0;
  Model model = Model::u;
  bool use_ir = true;
  double lambda = 100.0;
  bool ir_ignore_transfers = false;
  int replications = 20;
  std::uint64_t base_seed = 0;
  DEConfig de;
};

inline ScoreConfig score_config(const Scenario& s) {
  ScoreConfig config;
  config.has_unmatched = model_has_unmatched(s.model);
  config.has_transfers = model_has_transfers(s.model);
  config.use_ir = s.use_ir;
  config.lambda = s.lambda;
  config.ir_ignore_transfers = s.ir_ignore_transfers;
  return config;
}

inline std::uint64_t scenario_hash(const Scenario& s) {
  auto bits = [](double x) {
    std::uint64_t u;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&u, &x, sizeof(u));
    return u;
  };
  std::uint64_t h = 0x6d617463686d6b74ull;
  h = combine_seed(h, static_cast<std::uint64_t>(s.case_kind));
  h = combine_seed(h, static_cast<std::uint64_t>(s.n));
  h = combine_seed(h, bits(s.true_beta1));
  h = combine_seed(h, bits(s.true_beta2));
  h = combine_seed(h, bits(s.kappa));
  h = combine_seed(h, static_cast<std::uint64_t>(s.model));
  h = combine_seed(h, s.use_ir ? 1 : 0);
  h = combine_seed(h, bits(s.lambda));
  h = combine_seed(h, s.ir_ignore_transfers ? 1 : 0);
  return h;
}

inline std::uint64_t replication_seed(const Scenario& s, int r) {
  return combine_seed(combine_seed(s.base_seed, scenario_hash(s)),
                      static_cast<std::uint64_t>(r));
}

struct ReplicationRecord {
  int index = 0;
  std::uint64_t seed = 0;
  double beta1_hat = 0.0;
  double beta2_hat = 0.0;
  ScoreValue score;
  int unmatched_buyers = 0;
  int unmatched_sellers = 0;
  double runtime_seconds = 0.0;
  bool ok = false;
  std::string error;
};

inline ReplicationRecord run_replication(const Scenario& scenario, int r) {
  ReplicationRecord rec;
  rec.index = r;
  rec.seed = replication_seed(scenario, r);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Market market = generate_market(scenario.n, rec.seed);
    const ProductionSpec truth{scenario.case_kind, scenario.true_beta1, scenario.true_beta2,
                               scenario.kappa};
    const Matrix F = value_matrix(truth, market);
    const MatchingOutcome outcome = solve_assignment(F);
    rec.unmatched_buyers = static_cast<int>(outcome.unmatched_buyers.size());
    rec.unmatched_sellers = static_cast<int>(outcome.unmatched_sellers.size());

    const ObservedData data = observe(outcome, model_has_unmatched(scenario.model),
                                      model_has_transfers(scenario.model));
    const InequalitySet ineqs = build_inequalities(data, score_config(scenario));
    const ScoreEvaluator eval(ineqs, market, scenario.case_kind, scenario.kappa);

    DEConfig de = scenario.de;
    de.seed = combine_seed(rec.seed, 0xdeull);
    const DEResult best = maximize([&](const Candidate& c) { return eval.weighted(c); }, de);
    rec.beta1_hat = best.best.beta1;
    rec.beta2_hat = best.best.beta2;
    rec.score = eval(best.best);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  rec.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

struct ParameterStats {
  double truth = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
};

struct ExperimentSummary {
  Scenario scenario;
  std::vector<ReplicationRecord> records;
  ParameterStats beta1;
  ParameterStats beta2;
  double mean_unmatched = 0.0;  // per side
  int failures = 0;
};

inline ParameterStats aggregate_parameter(const std::vector<ReplicationRecord>& records,
                                          double truth, bool beta2) {
  ParameterStats stats;
  stats.truth = truth;
  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  for (const auto& rec : records) {
    if (!rec.ok) continue;
    const double err = (beta2 ? rec.beta2_hat : rec.beta1_hat) - truth;
    sum += err;
    sumsq += err * err;
    ++n;
  }
  if (n > 0) {
    stats.bias = sum / static_cast<double>(n);
    stats.rmse = std::sqrt(sumsq / static_cast<double>(n));
  }
  return stats;
}

// Runs all replications (in `jobs` worker threads when jobs > 1; results are
// collected by index so parallel runs aggregate identically) and recomputes
// the summary statistics from the per-replication records.
inline ExperimentSummary run_experiment(const Scenario& scenario, int jobs = 1) {
  if (scenario.replications < 1)
    throw std::invalid_argument("run_experiment: replications must be >= 1");
  ExperimentSummary summary;
  summary.scenario = scenario;
  summary.records.resize(scenario.replications);

  if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, scenario.replications));
  if (jobs == 1) {
    for (int r = 0; r < scenario.replications; ++r)
      summary.records[r] = run_replication(scenario, r);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int r = next.fetch_add(1); r < scenario.replications; r = next.fetch_add(1))
        summary.records[r] = run_replication(scenario, r);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  long ok = 0;
  double unmatched = 0.0;
  for (const auto& rec : summary.records) {
    if (!rec.ok) {
      ++summary.failures;
      continue;
    }
    unmatched += 0.5 * (rec.unmatched_buyers + rec.unmatched_sellers);
    ++ok;
  }
  summary.mean_unmatched = ok > 0 ? unmatched / static_cast<double>(ok) : 0.0;
  summary.beta1 = aggregate_parameter(summary.records, scenario.true_beta1, false);
  summary.beta2 = aggregate_parameter(summary.records, scenario.true_beta2, true);
  return summary;
}

inline std::vector<ExperimentSummary> lambda_sweep(Scenario scenario,
                                                   const std::vector<double>& lambdas,
                                                   int jobs = 1) {
  if (!scenario.use_ir)
    throw std::invalid_argument("lambda_sweep: scenario must include IR conditions");
  std::vector<ExperimentSummary> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    scenario.lambda = lambda;
    out.push_back(run_experiment(scenario, jobs));
  }
  return out;
}

inline std::vector<double> default_sweep_lambdas() { return {1, 2, 5, 10, 20, 100}; }

// 21-point beta2 grid from -1.0 to -3.0 in steps of -0.1.
inline std::vector<double> default_scan_grid() {
  std::vector<double> grid;
  for (int k = 10; k <= 30; ++k) grid.push_back(-static_cast<double>(k) / 10.0);
  return grid;
}

struct ThresholdScanRow {
  double beta2 = 0.0;
  double mean_unmatched_share = 0.0;  // per side, as a fraction of n
  double bias_beta2 = 0.0;
  double rmse_beta2 = 0.0;
};

// Share-versus-bias table along a beta2 grid for the unmatched-data model.
inline std::vector<ThresholdScanRow> unmatched_threshold_scan(
    Scenario scenario, const std::vector<double>& beta2_grid, int jobs = 1) {
  std::vector<ThresholdScanRow> table;
  table.reserve(beta2_grid.size());
  for (double beta2 : beta2_grid) {
    scenario.true_beta2 = beta2;
    const ExperimentSummary summary = run_experiment(scenario, jobs);
    table.push_back({beta2, summary.mean_unmatched / scenario.n, summary.beta2.bias,
                     summary.beta2.rmse});
  }
  return table;
}

}  // namespace matchscore
