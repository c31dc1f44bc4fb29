// JSON and CSV serialization of the library's data types. All output is
// deterministic: keys keep insertion order, doubles round-trip exactly, and
// nothing time- or host-dependent is ever written.
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "matchscore/assignment.hpp"
#include "matchscore/estimator.hpp"
#include "matchscore/inequalities.hpp"
#include "matchscore/market.hpp"
#include "matchscore/montecarlo.hpp"

namespace matchscore {

using json = nlohmann::ordered_json;

inline constexpr const char* version_string = "matchscore 0.1.0";

// 17 significant digits: enough for exact double round-trips in CSV output.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw std::invalid_argument("matrix_from_json: ragged rows");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline json to_json(const Market& market) {
  if (market.n_buyers != market.n_sellers)
    throw std::invalid_argument("market json schema requires equal side sizes");
  json j;
  j["n"] = market.n_buyers;
  j["seed"] = market.seed;
  j["buyer_covariates"] = to_json(market.buyer_covariates);
  j["seller_covariates"] = to_json(market.seller_covariates);
  j["noise"] = to_json(market.noise);
  return j;
}

inline Market market_from_json(const json& j) {
  Market market;
  market.n_buyers = j.at("n").get<int>();
  market.n_sellers = market.n_buyers;
  market.seed = j.at("seed").get<std::uint64_t>();
  market.buyer_covariates = matrix_from_json(j.at("buyer_covariates"));
  market.seller_covariates = matrix_from_json(j.at("seller_covariates"));
  market.noise = matrix_from_json(j.at("noise"));
  if (market.buyer_covariates.rows() != market.n_buyers ||
      market.seller_covariates.rows() != market.n_sellers ||
      market.noise.rows() != market.n_buyers || market.noise.cols() != market.n_sellers)
    throw std::invalid_argument("market_from_json: inconsistent dimensions");
  return market;
}

// side,index,x0,x1,x2 rows, buyers first.
inline std::string covariates_csv(const Market& market) {
  std::string out = "side,index,x0,x1,x2\n";
  auto emit = [&](const char* side, const Matrix& x) {
    for (int i = 0; i < x.rows(); ++i) {
      out += side;
      out += ',' + std::to_string(i);
      for (int c = 0; c < 3; ++c) out += ',' + fmt_double(x(i, c));
      out += '\n';
    }
  };
  emit("buyer", market.buyer_covariates);
  emit("seller", market.seller_covariates);
  return out;
}

inline json to_json(const MatchingOutcome& outcome) {
  json j;
  j["matched_pairs"] = json::array();
  for (const auto& [b, s] : outcome.matched_pairs) j["matched_pairs"].push_back({b, s});
  j["unmatched_buyers"] = outcome.unmatched_buyers;
  j["unmatched_sellers"] = outcome.unmatched_sellers;
  j["transfers"] = json::array();
  for (const auto& [pair, p] : outcome.transfers)
    j["transfers"].push_back({pair.first, pair.second, p});
  j["duals"] = {{"buyers", outcome.buyer_duals}, {"sellers", outcome.seller_duals}};
  j["total_value"] = outcome.total_value;
  j["dual_selection"] = "buyer_optimal";
  return j;
}

inline MatchingOutcome outcome_from_json(const json& j) {
  MatchingOutcome outcome;
  for (const auto& pair : j.at("matched_pairs"))
    outcome.matched_pairs.emplace_back(pair[0].get<int>(), pair[1].get<int>());
  outcome.unmatched_buyers = j.at("unmatched_buyers").get<std::vector<int>>();
  outcome.unmatched_sellers = j.at("unmatched_sellers").get<std::vector<int>>();
  for (const auto& row : j.at("transfers"))
    outcome.transfers[{row[0].get<int>(), row[1].get<int>()}] = row[2].get<double>();
  outcome.buyer_duals = j.at("duals").at("buyers").get<std::vector<double>>();
  outcome.seller_duals = j.at("duals").at("sellers").get<std::vector<double>>();
  outcome.total_value = j.at("total_value").get<double>();
  return outcome;
}

inline json to_json(const StabilityReport& report) {
  json j;
  j["checked"] = report.checked;
  j["violation_count"] = report.violations.size();
  j["pass"] = report.pass();
  json rows = json::array();
  for (const auto& v : report.violations) {
    rows.push_back({{"kind", v.kind == StabilityKind::pairwise ? "pairwise" : "ir"},
                    {"left", {v.left.first, v.left.second}},
                    {"right", {v.right.first, v.right.second}},
                    {"slack", v.slack}});
  }
  j["violations"] = std::move(rows);
  return j;
}

inline const char* to_string(Family family) {
  switch (family) {
    case Family::pairwise_transfer: return "pairwise_transfer";
    case Family::pairwise_no_transfer: return "pairwise_no_transfer";
    case Family::individual_rationality: return "ir";
  }
  return "?";
}

// family,left_b,left_s,right_b,right_s,transfer_rhs,vacuous with empty
// fields for null agents and absent transfer terms.
inline std::string inequalities_csv(const InequalitySet& set) {
  std::string out = "family,left_b,left_s,right_b,right_s,transfer_rhs,vacuous\n";
  auto idx = [](const std::optional<int>& i) { return i ? std::to_string(*i) : std::string(); };
  for (const auto& row : set.rows) {
    out += to_string(row.family);
    out += ',' + idx(row.left.buyer) + ',' + idx(row.left.seller);
    out += ',' + idx(row.right.buyer) + ',' + idx(row.right.seller);
    out += ',' + (row.transfer_rhs ? fmt_double(*row.transfer_rhs) : std::string());
    out += row.vacuous ? ",1\n" : ",0\n";
  }
  return out;
}

inline std::string grid_csv(const GridResult& grid) {
  std::string out = "beta1,beta2,score\n";
  for (int i = 0; i < grid.values.rows(); ++i)
    for (int j = 0; j < grid.values.cols(); ++j)
      out += fmt_double(grid.beta1_axis[i]) + ',' + fmt_double(grid.beta2_axis[j]) + ',' +
             fmt_double(grid.values(i, j)) + '\n';
  return out;
}

inline json grid_sidecar(const GridResult& grid, double lambda, const std::string& regime) {
  json j;
  j["argmax"] = {{"beta1", grid.beta1_axis[grid.argmax_i]},
                 {"beta2", grid.beta2_axis[grid.argmax_j]},
                 {"score", grid.values(grid.argmax_i, grid.argmax_j)}};
  j["lambda"] = lambda;
  j["regime"] = regime;
  return j;
}

inline std::string summary_csv_header() {
  return "case,n,model,ir,lambda,param,truth,bias,rmse,mean_unmatched\n";
}

inline std::string summary_csv_rows(const ExperimentSummary& summary) {
  const Scenario& s = summary.scenario;
  auto row = [&](const char* param, const ParameterStats& stats) {
    std::string out;
    out += to_string(s.case_kind);
    out += ',' + std::to_string(s.n);
    out += ',';
    out += to_string(s.model);
    out += s.use_ir ? ",true" : ",false";
    out += ',' + fmt_double(s.lambda);
    out += ',';
    out += param;
    out += ',' + fmt_double(stats.truth) + ',' + fmt_double(stats.bias) + ',' +
           fmt_double(stats.rmse) + ',' + fmt_double(summary.mean_unmatched) + '\n';
    return out;
  };
  return row("beta1", summary.beta1) + row("beta2", summary.beta2);
}

inline json to_json(const Scenario& s) {
  json j;
  j["case"] = to_string(s.case_kind);
  j["n"] = s.n;
  j["true_beta1"] = s.true_beta1;
  j["true_beta2"] = s.true_beta2;
  j["kappa"] = s.kappa;
  j["model"] = to_string(s.model);
  j["use_ir"] = s.use_ir;
  j["lambda"] = s.lambda;
  j["ir_ignore_transfers"] = s.ir_ignore_transfers;
  j["replications"] = s.replications;
  j["base_seed"] = s.base_seed;
  j["de"] = {{"population", s.de.population},
             {"max_generations", s.de.max_generations},
             {"differential_weight", s.de.differential_weight},
             {"crossover_rate", s.de.crossover_rate}};
  return j;
}

inline json manifest_json(const std::vector<ExperimentSummary>& summaries) {
  json j;
  j["version"] = version_string;
  json scenarios = json::array();
  for (const auto& summary : summaries) {
    json s;
    s["scenario"] = to_json(summary.scenario);
    s["scenario_hash"] = scenario_hash(summary.scenario);
    s["failures"] = summary.failures;
    s["exclusion_rate"] =
        static_cast<double>(summary.failures) / summary.scenario.replications;
    json seeds = json::array();
    for (const auto& rec : summary.records) seeds.push_back(rec.seed);
    s["replication_seeds"] = std::move(seeds);
    scenarios.push_back(std::move(s));
  }
  j["scenarios"] = std::move(scenarios);
  return j;
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_json(const std::string& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

inline json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return json::parse(in);
}

}  // namespace matchscore
