// Market synthesis and the joint production function.
//
// A market holds covariate rows for buyers and sellers plus a pairwise noise
// matrix. Generation is fully determined by (n, seed): covariates are drawn
// buyer block first, then seller block, then noise row-major, each agent's
// triple coming from the trivariate normal with mean (3,3,3) and covariance
// 1 on the diagonal / 0.25 off it, realized through its lower-triangular
// Cholesky factor. Normals come from the inverse-CDF transform in rng.hpp.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "matchscore/matrix.hpp"
#include "matchscore/rng.hpp"

namespace matchscore {

enum class Side { buyer, seller };

// Reference to one agent on a given side; an empty index is the null agent.
struct AgentRef {
  Side side = Side::buyer;
  std::optional<int> index;

  static AgentRef buyer(int i) { return {Side::buyer, i}; }
  static AgentRef seller(int i) { return {Side::seller, i}; }
  static AgentRef null_buyer() { return {Side::buyer, std::nullopt}; }
  static AgentRef null_seller() { return {Side::seller, std::nullopt}; }
  bool is_null() const { return !index.has_value(); }
  bool operator==(const AgentRef&) const = default;
};

struct Market {
  int n_buyers = 0;
  int n_sellers = 0;
  Matrix buyer_covariates;   // n_buyers x 3
  Matrix seller_covariates;  // n_sellers x 3
  Matrix noise;              // n_buyers x n_sellers
  std::uint64_t seed = 0;

  bool operator==(const Market&) const = default;
};

enum class CaseKind { case1, case2 };

// Parametric joint production. beta0 is a scale normalization and is never
// searched. kappa only enters Case 2.
struct ProductionSpec {
  CaseKind kind = CaseKind::case1;
  static constexpr double beta0 = 1.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double kappa = 8.0;
};

inline void validate(const ProductionSpec& spec) {
  if (!(spec.kappa > 0.0)) throw std::invalid_argument("ProductionSpec: kappa must be positive");
}

inline std::array<double, 3> covariate_mean() { return {3.0, 3.0, 3.0}; }

// Lower-triangular Cholesky factor of the fixed covariate covariance,
// packed as {l00, l10, l11, l20, l21, l22}.
inline std::array<double, 6> covariate_cholesky() {
  const double l00 = 1.0;
  const double l10 = 0.25;
  const double l11 = std::sqrt(1.0 - l10 * l10);
  const double l20 = 0.25;
  const double l21 = (0.25 - l10 * l20) / l11;
  const double l22 = std::sqrt(1.0 - l20 * l20 - l21 * l21);
  return {l00, l10, l11, l20, l21, l22};
}

inline Market generate_market(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_market: n must be >= 1");
  Market m;
  m.n_buyers = n;
  m.n_sellers = n;
  m.seed = seed;
  m.buyer_covariates = Matrix(n, 3);
  m.seller_covariates = Matrix(n, 3);
  m.noise = Matrix(n, n);

  SplitMix64 rng(seed);
  const auto mu = covariate_mean();
  const auto L = covariate_cholesky();
  auto draw_block = [&](Matrix& out) {
    for (int i = 0; i < out.rows(); ++i) {
      const double z0 = rng.next_normal();
      const double z1 = rng.next_normal();
      const double z2 = rng.next_normal();
      out(i, 0) = mu[0] + L[0] * z0;
      out(i, 1) = mu[1] + L[1] * z0 + L[2] * z1;
      out(i, 2) = mu[2] + L[3] * z0 + L[4] * z1 + L[5] * z2;
    }
  };
  draw_block(m.buyer_covariates);
  draw_block(m.seller_covariates);
  for (int b = 0; b < n; ++b)
    for (int s = 0; s < n; ++s) m.noise(b, s) = rng.next_normal();
  return m;
}

// Deterministic part f of the match value. Null agents contribute zero
// covariates, and a pair with a null member is worth exactly 0: the Case 2
// constant attaches only to pairs of two real agents, so it is present in
// the hypothetical value of any unrealized real-real pairing but absent
// from the normalized unmatched options.
inline double joint_production(const ProductionSpec& spec, AgentRef b, AgentRef s,
                               const Market& market) {
  if (b.side != Side::buyer || s.side != Side::seller)
    throw std::invalid_argument("joint_production: refs must be (buyer, seller)");
  validate(spec);
  if (b.index && (*b.index < 0 || *b.index >= market.n_buyers))
    throw std::out_of_range("joint_production: buyer index");
  if (s.index && (*s.index < 0 || *s.index >= market.n_sellers))
    throw std::out_of_range("joint_production: seller index");
  if (b.is_null() || s.is_null()) return 0.0;

  const Matrix& xb = market.buyer_covariates;
  const Matrix& xs = market.seller_covariates;
  const int i = *b.index;
  const int j = *s.index;
  const double interact01 = ProductionSpec::beta0 * xb(i, 0) * xs(j, 0) +
                            spec.beta1 * xb(i, 1) * xs(j, 1);
  if (spec.kind == CaseKind::case1) return interact01 + spec.beta2 * xb(i, 2) * xs(j, 2);
  return interact01 + spec.beta2 * spec.kappa;
}

// Realized match values F = f + noise over all real pairs.
inline Matrix value_matrix(const ProductionSpec& spec, const Market& market) {
  validate(spec);
  Matrix f(market.n_buyers, market.n_sellers);
  for (int b = 0; b < market.n_buyers; ++b)
    for (int s = 0; s < market.n_sellers; ++s)
      f(b, s) = joint_production(spec, AgentRef::buyer(b), AgentRef::seller(s), market) +
                market.noise(b, s);
  return f;
}

}  // namespace matchscore
