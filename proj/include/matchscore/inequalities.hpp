// Construction of the pairwise-stability and individual-rationality
// inequality families from observed matching data.
//
// The comparison set M holds every matched pair plus, when unmatched data is
// observed, one singleton (b,null) per unmatched buyer and (null,s) per
// unmatched seller. With transfer data each ordered pair of distinct
// elements of M yields one inequality; without it each unordered pair yields
// one. Comparisons between two singletons on the same side are tautologies
// (0 >= 0); they are still emitted so that row counts match the closed-form
// census, but carry a `vacuous` flag so scoring can skip them.
//
// IR rows use f - p >= 0 when transfers are observed and f >= 0 otherwise;
// `ir_ignore_transfers` forces the transfer-free form for comparison.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "matchscore/assignment.hpp"
#include "matchscore/market.hpp"

namespace matchscore {

enum class Family { pairwise_transfer, pairwise_no_transfer, individual_rationality };

// Indicators treat a margin within this of zero as satisfied: equilibrium
// rows can bind with exact equality, and summation order must not decide
// them. Values are O(10), so this absorbs association noise only.
inline constexpr double indicator_tolerance = 1e-9;

// One element of M: a matched pair or a singleton with a null side.
struct PairRef {
  std::optional<int> buyer;
  std::optional<int> seller;
  bool is_matched() const { return buyer && seller; }
  bool operator==(const PairRef&) const = default;
};

struct Inequality {
  Family family = Family::pairwise_no_transfer;
  PairRef left;
  PairRef right;  // for IR rows, right == left
  std::optional<double> transfer_rhs;
  bool vacuous = false;
};

struct FamilyCounts {
  std::size_t pairwise_transfer = 0;
  std::size_t pairwise_no_transfer = 0;
  std::size_t individual_rationality = 0;
  std::size_t vacuous = 0;
  std::size_t pairwise() const { return pairwise_transfer + pairwise_no_transfer; }
};

struct ScoreConfig {
  bool has_unmatched = false;  // U
  bool has_transfers = false;  // T
  bool use_ir = false;
  double lambda = 100.0;          // IR importance weight; >= 1 per the objective,
                                  // smaller values admitted for diagnostics
  bool ir_ignore_transfers = false;
  bool count_vacuous = false;     // include tautological rows in the score
};

inline void validate(const ScoreConfig& config) {
  if (!(config.lambda > 0.0)) throw std::invalid_argument("ScoreConfig: lambda must be positive");
}

struct InequalitySet {
  std::vector<Inequality> rows;
  ScoreConfig config;
  FamilyCounts counts;
};

// Closed-form pairwise row count: permutations of two out of |M| with
// transfer data, combinations without; unmatched agents enter |M| only when
// observed. IR rows are excluded here.
inline std::size_t count_formula(std::size_t m, std::size_t ub, std::size_t us,
                                 bool has_unmatched, bool has_transfers) {
  const std::size_t n = m + (has_unmatched ? ub + us : 0);
  if (n < 2) return 0;
  const std::size_t ordered = n * (n - 1);
  return has_transfers ? ordered : ordered / 2;
}

struct ObservedData {
  MatchingOutcome outcome;
  bool include_unmatched = false;
  bool include_transfers = false;
};

// Snapshot of an equilibrium outcome under the data-availability flags.
// Withheld fields are cleared so downstream code cannot depend on them.
inline ObservedData observe(const MatchingOutcome& outcome, bool include_unmatched,
                            bool include_transfers) {
  ObservedData data{outcome, include_unmatched, include_transfers};
  if (!include_transfers) data.outcome.transfers.clear();
  if (!include_unmatched) {
    data.outcome.unmatched_buyers.clear();
    data.outcome.unmatched_sellers.clear();
  }
  data.outcome.buyer_duals.clear();
  data.outcome.seller_duals.clear();
  return data;
}

inline InequalitySet build_inequalities(const ObservedData& data, const ScoreConfig& config) {
  validate(config);
  if (config.has_transfers && !data.include_transfers)
    throw std::invalid_argument("build_inequalities: transfers requested but not observed");
  if (config.has_unmatched && !data.include_unmatched)
    throw std::invalid_argument("build_inequalities: unmatched data requested but not observed");

  std::vector<PairRef> comparison_set;
  std::vector<double> price;  // aligned with comparison_set; 0 for singletons
  for (const auto& [b, s] : data.outcome.matched_pairs) {
    comparison_set.push_back({b, s});
    price.push_back(config.has_transfers ? data.outcome.transfers.at({b, s}) : 0.0);
  }
  const std::size_t n_matched = comparison_set.size();
  if (config.has_unmatched) {
    for (int b : data.outcome.unmatched_buyers) {
      comparison_set.push_back({b, std::nullopt});
      price.push_back(0.0);
    }
    for (int s : data.outcome.unmatched_sellers) {
      comparison_set.push_back({std::nullopt, s});
      price.push_back(0.0);
    }
  }

  auto same_side_singletons = [](const PairRef& a, const PairRef& b) {
    return (!a.buyer && !b.buyer) || (!a.seller && !b.seller);
  };

  InequalitySet set;
  set.config = config;
  const std::size_t m = comparison_set.size();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j_begin = config.has_transfers ? 0 : i + 1;
    for (std::size_t j = j_begin; j < m; ++j) {
      if (j == i) continue;
      Inequality row;
      row.left = comparison_set[i];
      row.right = comparison_set[j];
      row.vacuous = same_side_singletons(row.left, row.right);
      if (config.has_transfers) {
        row.family = Family::pairwise_transfer;
        row.transfer_rhs = price[i] - price[j];
        ++set.counts.pairwise_transfer;
      } else {
        row.family = Family::pairwise_no_transfer;
        ++set.counts.pairwise_no_transfer;
      }
      if (row.vacuous) ++set.counts.vacuous;
      set.rows.push_back(row);
    }
  }

  if (config.use_ir) {
    for (std::size_t i = 0; i < n_matched; ++i) {
      Inequality row;
      row.family = Family::individual_rationality;
      row.left = comparison_set[i];
      row.right = comparison_set[i];
      const bool with_price = config.has_transfers && !config.ir_ignore_transfers;
      row.transfer_rhs = with_price ? price[i] : 0.0;
      set.rows.push_back(row);
      ++set.counts.individual_rationality;
    }
  }
  return set;
}

namespace detail {
inline AgentRef buyer_ref(const PairRef& p) {
  return p.buyer ? AgentRef::buyer(*p.buyer) : AgentRef::null_buyer();
}
inline AgentRef seller_ref(const PairRef& p) {
  return p.seller ? AgentRef::seller(*p.seller) : AgentRef::null_seller();
}
}  // namespace detail

// Evaluates one row at candidate parameters carried by `spec`. The estimator
// scores the deterministic part f only; realized noise never enters.
inline bool evaluate_inequality(const Inequality& row, const ProductionSpec& spec,
                                const Market& market) {
  using detail::buyer_ref;
  using detail::seller_ref;
  auto f = [&](AgentRef b, AgentRef s) { return joint_production(spec, b, s, market); };
  const double rhs = row.transfer_rhs.value_or(0.0);
  const double tol = indicator_tolerance;
  switch (row.family) {
    case Family::pairwise_transfer:
      return f(buyer_ref(row.left), seller_ref(row.left)) -
                 f(buyer_ref(row.left), seller_ref(row.right)) >=
             rhs - tol;
    case Family::pairwise_no_transfer:
      return f(buyer_ref(row.left), seller_ref(row.left)) +
                 f(buyer_ref(row.right), seller_ref(row.right)) >=
             f(buyer_ref(row.left), seller_ref(row.right)) +
                 f(buyer_ref(row.right), seller_ref(row.left)) - tol;
    case Family::individual_rationality:
      return f(buyer_ref(row.left), seller_ref(row.left)) - rhs >= -tol;
  }
  return false;
}

}  // namespace matchscore
