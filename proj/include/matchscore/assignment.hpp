// Equilibrium computation for the one-to-one matching market.
//
// The optimal matching solves the assignment linear program with row and
// column sums at most one; the unmatched option is encoded by augmenting the
// value matrix to square with zero-value dummy rows/columns, after which the
// constraint matrix is an ordinary assignment polytope and the Hungarian
// method returns an integral optimum.
//
// Dual selection: the assignment dual is generically non-unique. We return
// the buyer-optimal core point, where each buyer's payoff equals its
// marginal contribution u_b = V(N) - V(N \ {b}) and each matched seller
// receives v_s = F(b,s) - u_b. This point is dual-feasible, satisfies
// complementary slackness exactly, and simultaneously minimizes every
// seller payoff over the set of optimal duals, so transfers derived from it
// are reproducible across runs.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "matchscore/matrix.hpp"

namespace matchscore {

namespace detail {

// Hungarian method (shortest augmenting path form) for the square min-cost
// assignment problem. Returns col_of_row; deterministic: rows are inserted
// in index order and ties resolve to the lowest column index scanned first.
inline std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based internals; index 0 is the virtual column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

// Optimal partial-matching value of F, optionally excluding one buyer row.
// seller_of_buyer (when non-null) receives the matching itself.
inline double optimal_matching_value(const Matrix& F, int skip_buyer = -1,
                                     std::vector<int>* seller_of_buyer = nullptr) {
  const int nb = F.rows() - (skip_buyer >= 0 ? 1 : 0);
  const int ns = F.cols();
  const int N = nb + ns;
  // Row index -> original buyer index.
  std::vector<int> buyer_of_row;
  buyer_of_row.reserve(nb);
  for (int b = 0; b < F.rows(); ++b)
    if (b != skip_buyer) buyer_of_row.push_back(b);

  Matrix cost(N, N, 0.0);
  for (int r = 0; r < nb; ++r)
    for (int s = 0; s < ns; ++s) cost(r, s) = -F(buyer_of_row[r], s);

  const std::vector<int> col = min_cost_assignment(cost);
  double total = 0.0;
  if (seller_of_buyer) seller_of_buyer->assign(F.rows(), -1);
  for (int r = 0; r < nb; ++r) {
    if (col[r] >= ns) continue;  // dummy column: buyer unmatched
    total += F(buyer_of_row[r], col[r]);
    if (seller_of_buyer) (*seller_of_buyer)[buyer_of_row[r]] = col[r];
  }
  return total;
}

}  // namespace detail

struct MatchingOutcome {
  std::vector<std::pair<int, int>> matched_pairs;  // sorted by buyer index
  std::vector<int> unmatched_buyers;
  std::vector<int> unmatched_sellers;
  std::map<std::pair<int, int>, double> transfers;  // matched pairs only
  std::vector<double> buyer_duals;                  // u_b
  std::vector<double> seller_duals;                 // v_s
  double total_value = 0.0;
};

// Transfers implied by the duals: p_{b,s} = v_s clamped to [0, F(b,s)].
// Throws if the duals violate complementary slackness beyond tol.
inline std::map<std::pair<int, int>, double> extract_transfers(const MatchingOutcome& outcome,
                                                               const Matrix& F,
                                                               double tol = 1e-7) {
  std::map<std::pair<int, int>, double> transfers;
  for (const auto& [b, s] : outcome.matched_pairs) {
    const double slack = outcome.buyer_duals[b] + outcome.seller_duals[s] - F(b, s);
    if (std::abs(slack) > tol)
      throw std::runtime_error("extract_transfers: complementary slackness violated");
    transfers[{b, s}] = std::clamp(outcome.seller_duals[s], 0.0, F(b, s));
  }
  return transfers;
}

inline MatchingOutcome solve_assignment(const Matrix& F) {
  const int nb = F.rows();
  const int ns = F.cols();
  for (int b = 0; b < nb; ++b)
    for (int s = 0; s < ns; ++s)
      if (!std::isfinite(F(b, s)))
        throw std::invalid_argument("solve_assignment: non-finite value entry");

  MatchingOutcome out;
  std::vector<int> seller_of_buyer;
  out.total_value = detail::optimal_matching_value(F, -1, &seller_of_buyer);

  std::vector<char> seller_matched(ns, 0);
  for (int b = 0; b < nb; ++b) {
    if (seller_of_buyer[b] >= 0) {
      out.matched_pairs.emplace_back(b, seller_of_buyer[b]);
      seller_matched[seller_of_buyer[b]] = 1;
    } else {
      out.unmatched_buyers.push_back(b);
    }
  }
  for (int s = 0; s < ns; ++s)
    if (!seller_matched[s]) out.unmatched_sellers.push_back(s);

  // Buyer-optimal duals from marginal contributions.
  out.buyer_duals.assign(nb, 0.0);
  out.seller_duals.assign(ns, 0.0);
  for (const auto& [b, s] : out.matched_pairs) {
    const double without_b = detail::optimal_matching_value(F, b);
    double u = out.total_value - without_b;
    if (u < 0.0) u = 0.0;               // float noise only; V is monotone
    u = std::min(u, std::max(F(b, s), 0.0));
    out.buyer_duals[b] = u;
    out.seller_duals[s] = F(b, s) - u;  // complementary slackness, exact
  }

  // Internal consistency: dual feasibility over every real pair.
  constexpr double internal_tol = 1e-9;
  for (int b = 0; b < nb; ++b)
    for (int s = 0; s < ns; ++s)
      if (out.buyer_duals[b] + out.seller_duals[s] < F(b, s) - internal_tol)
        throw std::runtime_error("solve_assignment: dual infeasibility");

  out.transfers = extract_transfers(out, F);
  return out;
}

enum class StabilityKind { pairwise, individual_rationality };

struct StabilityViolation {
  StabilityKind kind = StabilityKind::pairwise;
  // Pairs are (buyer, seller) with -1 for the null agent.
  std::pair<int, int> left{-1, -1};
  std::pair<int, int> right{-1, -1};
  double slack = 0.0;
};

struct StabilityReport {
  long checked = 0;
  std::vector<StabilityViolation> violations;
  bool pass() const { return violations.empty(); }
};

// Checks every ordered pairwise-stability inequality over realized values F,
// with unmatched agents participating as (b,null) / (null,s) options, plus
// the per-match individual rationality rows. Violations are reported, not
// thrown.
inline StabilityReport verify_stability(const MatchingOutcome& outcome, const Matrix& F,
                                        double tol = 1e-7) {
  struct Slot {
    int buyer;   // -1 for null
    int seller;  // -1 for null
    double value;
    double price;
  };
  std::vector<Slot> slots;
  for (const auto& [b, s] : outcome.matched_pairs)
    slots.push_back({b, s, F(b, s), outcome.transfers.at({b, s})});
  for (int b : outcome.unmatched_buyers) slots.push_back({b, -1, 0.0, 0.0});
  for (int s : outcome.unmatched_sellers) slots.push_back({-1, s, 0.0, 0.0});

  auto cross_value = [&](int b, int s) { return (b < 0 || s < 0) ? 0.0 : F(b, s); };

  StabilityReport report;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (i == j) continue;
      const Slot& L = slots[i];
      const Slot& R = slots[j];
      const double slack = L.value - cross_value(L.buyer, R.seller) - (L.price - R.price);
      ++report.checked;
      if (slack < -tol)
        report.violations.push_back({StabilityKind::pairwise,
                                     {L.buyer, L.seller},
                                     {R.buyer, R.seller},
                                     slack});
    }
  }
  for (const auto& [b, s] : outcome.matched_pairs) {
    const double slack = F(b, s) - outcome.transfers.at({b, s});
    ++report.checked;
    if (slack < -tol)
      report.violations.push_back(
          {StabilityKind::individual_rationality, {b, s}, {b, s}, slack});
  }
  return report;
}

}  // namespace matchscore
