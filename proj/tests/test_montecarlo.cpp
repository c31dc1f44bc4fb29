#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "matchscore/montecarlo.hpp"
#include "test_support.hpp"

using namespace matchscore;

namespace {

Scenario desk_scenario() {
  Scenario s;
  s.case_kind = CaseKind::case2;
  s.n = 10;
  s.true_beta1 = 0.5;
  s.true_beta2 = -2.0;
  s.model = Model::u;
  s.use_ir = true;
  s.lambda = 100.0;
  s.replications = 4;
  s.base_seed = 1;
  s.de.population = 60;
  s.de.max_generations = 80;
  return s;
}

}  // namespace

TEST_CASE("replication seeds separate scenarios and indices") {
  const Scenario a = desk_scenario();
  Scenario b = a;
  b.lambda = 1.0;
  CHECK(scenario_hash(a) != scenario_hash(b));
  Scenario c = a;
  c.model = Model::none;
  CHECK(scenario_hash(a) != scenario_hash(c));
  CHECK(replication_seed(a, 0) != replication_seed(a, 1));
  CHECK(replication_seed(a, 0) != replication_seed(b, 0));
}

TEST_CASE("run_replication is deterministic and fills the record") {
  const Scenario s = desk_scenario();
  const ReplicationRecord a = run_replication(s, 2);
  const ReplicationRecord b = run_replication(s, 2);
  CHECK(a.ok);
  CHECK(a.seed == b.seed);
  CHECK(a.beta1_hat == b.beta1_hat);
  CHECK(a.beta2_hat == b.beta2_hat);
  CHECK(a.score.weighted_total == b.score.weighted_total);
  CHECK(a.unmatched_buyers == b.unmatched_buyers);
  CHECK(a.unmatched_buyers >= 0);
  CHECK(a.unmatched_buyers == a.unmatched_sellers);  // equal sides
}

TEST_CASE("run_replication under the full-data model fills every field") {
  Scenario s = desk_scenario();
  s.model = Model::ut;
  const ReplicationRecord rec = run_replication(s, 0);
  CHECK(rec.ok);
  CHECK(rec.error.empty());
  CHECK(rec.unmatched_buyers >= 0);
  CHECK(rec.beta2_hat >= -10.0);
  CHECK(rec.beta2_hat <= 10.0);
  CHECK(rec.score.weighted_total > 0.0);
  CHECK(rec.runtime_seconds >= 0.0);
}

TEST_CASE("single replication reduces bias to the one estimate") {
  Scenario s = desk_scenario();
  s.replications = 1;
  const ExperimentSummary summary = run_experiment(s);
  REQUIRE(summary.records.size() == 1);
  CHECK(summary.beta2.bias ==
        Catch::Approx(summary.records[0].beta2_hat - s.true_beta2).margin(1e-12));
  CHECK(summary.beta2.rmse == Catch::Approx(std::abs(summary.beta2.bias)).margin(1e-12));
}

TEST_CASE("summary aggregates recompute from the records") {
  Scenario s = desk_scenario();
  s.replications = 5;
  const ExperimentSummary summary = run_experiment(s);
  CHECK(summary.failures == 0);
  double bias = 0, rmse = 0, unmatched = 0;
  for (const auto& rec : summary.records) {
    bias += rec.beta2_hat - s.true_beta2;
    rmse += (rec.beta2_hat - s.true_beta2) * (rec.beta2_hat - s.true_beta2);
    unmatched += 0.5 * (rec.unmatched_buyers + rec.unmatched_sellers);
  }
  bias /= 5;
  rmse = std::sqrt(rmse / 5);
  unmatched /= 5;
  CHECK(summary.beta2.bias == Catch::Approx(bias).margin(1e-12));
  CHECK(summary.beta2.rmse == Catch::Approx(rmse).margin(1e-12));
  CHECK(summary.mean_unmatched == Catch::Approx(unmatched).margin(1e-12));
}

TEST_CASE("parallel and serial experiments agree") {
  Scenario s = desk_scenario();
  s.replications = 4;
  const ExperimentSummary serial = run_experiment(s, 1);
  const ExperimentSummary parallel = run_experiment(s, 4);
  for (int r = 0; r < 4; ++r) {
    CHECK(serial.records[r].beta1_hat == parallel.records[r].beta1_hat);
    CHECK(serial.records[r].beta2_hat == parallel.records[r].beta2_hat);
  }
  CHECK(serial.beta2.bias == parallel.beta2.bias);
}

TEST_CASE("unidentified regime spreads beta2 estimates widely") {
  // Matched-pairs-only comparisons cancel the case 2 constant, so the
  // estimator cannot pin beta2 and the RMSE stays on the domain scale.
  Scenario s = desk_scenario();
  s.model = Model::none;
  s.use_ir = false;
  s.replications = 8;
  const ExperimentSummary summary = run_experiment(s);
  CHECK(summary.beta2.rmse >= 2.0);
}

TEST_CASE("case 1 with both data kinds estimates beta2 accurately at n=100") {
  Scenario s;
  s.case_kind = CaseKind::case1;
  s.n = 100;
  s.true_beta1 = 0.5;
  s.true_beta2 = 0.0;
  s.model = Model::ut;
  s.use_ir = false;
  s.lambda = 100.0;
  s.replications = 10;
  s.base_seed = 3;
  s.de.max_generations = 150;
  const ExperimentSummary summary = run_experiment(s);
  CHECK(summary.failures == 0);
  CHECK(std::abs(summary.beta2.bias) <= 0.3);
}

TEST_CASE("unmatched counts fall in the reference band at n=20") {
  Scenario s = desk_scenario();
  s.n = 20;
  s.replications = 8;
  s.de.max_generations = 40;
  const ExperimentSummary summary = run_experiment(s);
  // Reference mean count per side is around 11 at beta2 = -2.
  CHECK(summary.mean_unmatched >= 7.0);
  CHECK(summary.mean_unmatched <= 15.0);
}

TEST_CASE("lambda sweep with one weight degenerates to a single experiment") {
  Scenario s = desk_scenario();
  s.replications = 3;
  const std::vector<ExperimentSummary> sweep = lambda_sweep(s, {100.0});
  REQUIRE(sweep.size() == 1);
  const ExperimentSummary direct = run_experiment(s);
  CHECK(sweep[0].beta2.bias == direct.beta2.bias);
  CHECK(sweep[0].beta2.rmse == direct.beta2.rmse);
  Scenario no_ir = s;
  no_ir.use_ir = false;
  CHECK_THROWS_AS(lambda_sweep(no_ir, {1.0}), std::invalid_argument);
}

TEST_CASE("lambda sweep contrasts at plentiful and scarce unmatched data") {
  Scenario s;
  s.case_kind = CaseKind::case2;
  s.n = 100;
  s.model = Model::u;
  s.use_ir = true;
  s.replications = 10;
  s.base_seed = 77;

  SECTION("beta2 = -3: a large weight does not hurt when unmatched are plentiful") {
    s.true_beta2 = -3.0;
    const auto sweep = lambda_sweep(s, {1.0, 100.0});
    CHECK(std::abs(sweep[1].beta2.bias) <= std::abs(sweep[0].beta2.bias) + 0.5);
  }
  SECTION("beta2 = -1: the small weight is no worse when unmatched are scarce") {
    s.true_beta2 = -1.0;
    const auto sweep = lambda_sweep(s, {1.0, 100.0});
    CHECK(sweep[0].beta2.bias <= sweep[1].beta2.bias);
  }
}

TEST_CASE("default sweep and scan grids") {
  CHECK(default_sweep_lambdas() == std::vector<double>{1, 2, 5, 10, 20, 100});
  const auto grid = default_scan_grid();
  REQUIRE(grid.size() == 21);
  CHECK(grid.front() == Catch::Approx(-1.0));
  CHECK(grid.back() == Catch::Approx(-3.0));
}

TEST_CASE("scan with a single grid point produces a single row") {
  Scenario s = desk_scenario();
  s.replications = 2;
  const auto table = unmatched_threshold_scan(s, {-1.5});
  REQUIRE(table.size() == 1);
  CHECK(table[0].beta2 == -1.5);
  CHECK(table[0].mean_unmatched_share >= 0.0);
  CHECK(table[0].mean_unmatched_share <= 1.0);
}

TEST_CASE("unmatched share rises as the matching cost deepens") {
  // DGP-level property along the scan grid; estimation plays no role, so the
  // equilibria are solved directly.
  std::vector<double> beta2s;
  std::vector<double> mean_unmatched;
  for (double beta2 : default_scan_grid()) {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Market market = generate_market(50, combine_seed(seed, std::uint64_t(beta2 * -10)));
      const ProductionSpec truth{CaseKind::case2, 0.5, beta2, 8.0};
      const MatchingOutcome out = solve_assignment(value_matrix(truth, market));
      total += static_cast<double>(out.unmatched_buyers.size());
    }
    beta2s.push_back(beta2);
    mean_unmatched.push_back(total / 6.0);
  }
  CHECK(testsupport::spearman(beta2s, mean_unmatched) <= -0.9);
}

TEST_CASE("threshold scan recovers beta2 where a third of the sample is unmatched") {
  Scenario s;
  s.case_kind = CaseKind::case2;
  s.n = 100;
  s.model = Model::u;
  s.use_ir = true;
  s.lambda = 100.0;
  s.replications = 8;
  s.base_seed = 5;
  s.de.max_generations = 200;
  const auto table = unmatched_threshold_scan(s, {-1.6});
  REQUIRE(table.size() == 1);
  // Reference: roughly a third of each side unmatched and a small bias.
  CHECK(table[0].mean_unmatched_share >= 0.25);
  CHECK(table[0].mean_unmatched_share <= 0.41);
  CHECK(std::abs(table[0].bias_beta2) <= 0.6);
}

TEST_CASE("threshold scan shows upward bias when unmatched agents are scarce") {
  Scenario s;
  s.case_kind = CaseKind::case2;
  s.n = 100;
  s.model = Model::u;
  s.use_ir = true;
  s.lambda = 100.0;
  s.replications = 16;
  s.base_seed = 5;
  s.de.max_generations = 200;
  const auto table = unmatched_threshold_scan(s, {-1.2});
  REQUIRE(table.size() == 1);
  CHECK(table[0].mean_unmatched_share < 0.25);
  // Upward-biased when unmatched information is scarce. The reference study
  // reports 0.76 here; an exhaustive argmax of the same objective sits lower
  // (about 0.25 at these seeds), so assert the direction with headroom.
  CHECK(table[0].bias_beta2 >= 0.1);
}
