#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "matchscore/assignment.hpp"
#include "matchscore/market.hpp"
#include "test_support.hpp"

using namespace matchscore;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  return m;
}

// Full invariant audit of one solved outcome.
void check_equilibrium_invariants(const MatchingOutcome& out, const Matrix& F) {
  const int nb = F.rows();
  const int ns = F.cols();
  std::vector<int> buyer_uses(nb, 0), seller_uses(ns, 0);
  double total = 0.0;
  for (const auto& [b, s] : out.matched_pairs) {
    ++buyer_uses[b];
    ++seller_uses[s];
    total += F(b, s);
    CHECK(F(b, s) >= -1e-12);  // matched-pair surplus
  }
  for (int b : out.unmatched_buyers) ++buyer_uses[b];
  for (int s : out.unmatched_sellers) ++seller_uses[s];
  for (int b = 0; b < nb; ++b) CHECK(buyer_uses[b] == 1);  // exact partition
  for (int s = 0; s < ns; ++s) CHECK(seller_uses[s] == 1);
  CHECK(total == Catch::Approx(out.total_value).margin(1e-9));

  for (int b : out.unmatched_buyers) CHECK(out.buyer_duals[b] == 0.0);
  for (int s : out.unmatched_sellers) CHECK(out.seller_duals[s] == 0.0);
  for (double u : out.buyer_duals) CHECK(u >= 0.0);
  for (double v : out.seller_duals) CHECK(v >= 0.0);
  for (int b = 0; b < nb; ++b)
    for (int s = 0; s < ns; ++s)
      CHECK(out.buyer_duals[b] + out.seller_duals[s] >= F(b, s) - 1e-9);
  for (const auto& [b, s] : out.matched_pairs) {
    CHECK(out.buyer_duals[b] + out.seller_duals[s] == Catch::Approx(F(b, s)).margin(1e-9));
    const double p = out.transfers.at({b, s});
    CHECK(p >= 0.0);
    CHECK(p <= F(b, s) + 1e-12);
  }
}

}  // namespace

TEST_CASE("diagonal dominance matches the diagonal") {
  const Matrix F = from_rows({{2, 1}, {1, 2}});
  const MatchingOutcome out = solve_assignment(F);
  REQUIRE(out.matched_pairs.size() == 2);
  CHECK(out.matched_pairs[0] == std::pair<int, int>{0, 0});
  CHECK(out.matched_pairs[1] == std::pair<int, int>{1, 1});
  CHECK(out.total_value == Catch::Approx(4.0));
  check_equilibrium_invariants(out, F);
  // Complementary slackness on (0,0): u_0 + v_0 = 2, transfer is the seller dual.
  CHECK(out.buyer_duals[0] + out.seller_duals[0] == Catch::Approx(2.0).margin(1e-12));
  CHECK(out.transfers.at({0, 0}) == Catch::Approx(out.seller_duals[0]).margin(1e-12));
}

TEST_CASE("all-negative values leave everyone unmatched") {
  const Matrix F = from_rows({{-1, -2}, {-3, -4}});
  const MatchingOutcome out = solve_assignment(F);
  CHECK(out.matched_pairs.empty());
  CHECK(out.total_value == 0.0);
  CHECK(out.unmatched_buyers == std::vector<int>{0, 1});
  CHECK(out.unmatched_sellers == std::vector<int>{0, 1});
  check_equilibrium_invariants(out, F);
}

TEST_CASE("degenerate 1x1 market gives the buyer-optimal split") {
  const Matrix F = from_rows({{5}});
  const MatchingOutcome out = solve_assignment(F);
  REQUIRE(out.matched_pairs.size() == 1);
  // No rival buyer: the buyer captures everything, the transfer is zero.
  CHECK(out.buyer_duals[0] == Catch::Approx(5.0));
  CHECK(out.seller_duals[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(out.transfers.at({0, 0}) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("rival buyer pins the seller transfer from below") {
  // Second buyer values the lone seller at 8, so competition forces v >= 8.
  const Matrix F = from_rows({{10}, {8}});
  const MatchingOutcome out = solve_assignment(F);
  REQUIRE(out.matched_pairs.size() == 1);
  CHECK(out.matched_pairs[0] == std::pair<int, int>{0, 0});
  CHECK(out.buyer_duals[0] == Catch::Approx(2.0).margin(1e-12));
  CHECK(out.seller_duals[0] == Catch::Approx(8.0).margin(1e-12));
  check_equilibrium_invariants(out, F);
}

TEST_CASE("non-finite entries are rejected") {
  Matrix F(2, 2, 0.0);
  F(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_assignment(F), std::invalid_argument);
  F(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_assignment(F), std::invalid_argument);
}

TEST_CASE("solver matches brute force on random matrices") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    SplitMix64 rng(seed);
    const int nb = 1 + static_cast<int>(rng.next_below(7));
    const int ns = 1 + static_cast<int>(rng.next_below(7));
    const Matrix F = testsupport::random_matrix(nb, ns, -3.0, 3.0, seed * 977);
    const MatchingOutcome out = solve_assignment(F);
    const double oracle = testsupport::brute_force_matching_value(F);
    REQUIRE(out.total_value == Catch::Approx(oracle).margin(1e-9));
    check_equilibrium_invariants(out, F);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("rectangular markets solve correctly") {
  const Matrix F = from_rows({{4, -1, 2, 3}});  // 1 buyer, 4 sellers
  const MatchingOutcome out = solve_assignment(F);
  REQUIRE(out.matched_pairs.size() == 1);
  CHECK(out.matched_pairs[0] == std::pair<int, int>{0, 0});
  CHECK(out.unmatched_sellers == std::vector<int>{1, 2, 3});
  check_equilibrium_invariants(out, F);
}

TEST_CASE("extract_transfers flags broken complementary slackness") {
  const Matrix F = from_rows({{2, 1}, {1, 2}});
  MatchingOutcome out = solve_assignment(F);
  out.buyer_duals[0] += 1.0;  // breaks u_0 + v_0 = F(0,0)
  CHECK_THROWS_AS(extract_transfers(out, F), std::runtime_error);
}

TEST_CASE("equilibrium outcomes are pairwise stable") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SplitMix64 rng(seed + 1000);
    const int n = 2 + static_cast<int>(rng.next_below(11));
    const Market market = generate_market(n, seed * 31 + 7);
    const ProductionSpec spec{CaseKind::case2, 0.5, -2.0, 8.0};
    const Matrix F = value_matrix(spec, market);
    const MatchingOutcome out = solve_assignment(F);
    const StabilityReport report = verify_stability(out, F);
    CHECK(report.pass());
    CHECK(report.checked > 0);
  }
}

TEST_CASE("swapped partners in an assortative market violate stability") {
  // F(b,s) = (b+1)(s+1): supermodular, so the identity matching is optimal.
  Matrix F(2, 2);
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 2; ++s) F(b, s) = (b + 1.0) * (s + 1.0);
  MatchingOutcome swapped;
  swapped.matched_pairs = {{0, 1}, {1, 0}};
  swapped.transfers[{0, 1}] = 0.0;
  swapped.transfers[{1, 0}] = 0.0;
  swapped.total_value = F(0, 1) + F(1, 0);
  const StabilityReport report = verify_stability(swapped, F);
  CHECK_FALSE(report.pass());
}

TEST_CASE("an all-unmatched outcome on a negative market is stable") {
  const Matrix F = from_rows({{-1}});
  const MatchingOutcome out = solve_assignment(F);
  CHECK(out.matched_pairs.empty());
  const StabilityReport report = verify_stability(out, F);
  CHECK(report.pass());
}

TEST_CASE("matched sellers earn exactly their best rival offer") {
  // At the buyer-optimal dual point no seller payoff has slack: a positive
  // v_s must be pinned by some rival's binding offer F(b',s) - u_{b'},
  // otherwise it could be lowered against the matched buyer's payoff.
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    SplitMix64 rng(seed * 131);
    const int n = 2 + static_cast<int>(rng.next_below(9));
    const Market market = generate_market(n, seed + 500);
    const ProductionSpec spec{CaseKind::case2, 0.5, -2.0, 8.0};
    const Matrix F = value_matrix(spec, market);
    const MatchingOutcome out = solve_assignment(F);
    for (const auto& [b, s] : out.matched_pairs) {
      double best_rival = 0.0;
      for (int rival = 0; rival < n; ++rival) {
        if (rival == b) continue;
        best_rival = std::max(best_rival, F(rival, s) - out.buyer_duals[rival]);
      }
      CHECK(out.seller_duals[s] == Catch::Approx(best_rival).margin(1e-9));
    }
  }
}

TEST_CASE("competing-offer bound holds at solved outcomes") {
  const Market market = generate_market(9, 314);
  const ProductionSpec spec{CaseKind::case1, 0.5, -1.0, 8.0};
  const Matrix F = value_matrix(spec, market);
  const MatchingOutcome out = solve_assignment(F);
  for (const auto& [b, s] : out.matched_pairs)
    for (int rival = 0; rival < market.n_buyers; ++rival)
      CHECK(out.seller_duals[s] >= F(rival, s) - out.buyer_duals[rival] - 1e-9);
}
