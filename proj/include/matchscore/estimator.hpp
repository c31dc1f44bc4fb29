// Maximum-score objective evaluation and the differential-evolution search.
//
// Every inequality row is affine in the searched coefficients (beta1, beta2)
// once the covariates are fixed, so the evaluator precompiles each row to
// margin(beta) = c0 + c1*beta1 + c2*beta2 and scoring a candidate is one
// fused pass over three flat arrays. The compiled margins agree with
// evaluate_inequality() up to floating-point association order.
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "matchscore/inequalities.hpp"
#include "matchscore/market.hpp"
#include "matchscore/matrix.hpp"
#include "matchscore/rng.hpp"

namespace matchscore {

struct Candidate {
  double beta1 = 0.0;
  double beta2 = 0.0;
};

struct ScoreValue {
  long pairwise_satisfied = 0;  // non-vacuous rows unless count_vacuous is set
  long ir_satisfied = 0;
  double weighted_total = 0.0;  // pairwise + lambda * ir
};

class ScoreEvaluator {
 public:
  ScoreEvaluator(const InequalitySet& ineqs, const Market& market, CaseKind kind,
                 double kappa = 8.0)
      : lambda_(ineqs.config.lambda),
        count_vacuous_(ineqs.config.count_vacuous),
        vacuous_rows_(0) {
    ProductionSpec basis{kind, 0.0, 0.0, kappa};
    validate(basis);
    // Component products of f for the pair (buyer of `b_of`, seller of
    // `s_of`): f(b,s|beta) = t0 + beta1*t1 + beta2*t2 with beta0 folded
    // into t0. Null members zero the whole triple.
    auto terms = [&](const PairRef& b_of, const PairRef& s_of) -> std::array<double, 3> {
      const auto& b = b_of.buyer;
      const auto& s = s_of.seller;
      if (!b || !s) return {0.0, 0.0, 0.0};
      const Matrix& xb = market.buyer_covariates;
      const Matrix& xs = market.seller_covariates;
      const double t0 = ProductionSpec::beta0 * xb(*b, 0) * xs(*s, 0);
      const double t1 = xb(*b, 1) * xs(*s, 1);
      const double t2 = kind == CaseKind::case1 ? xb(*b, 2) * xs(*s, 2) : kappa;
      return {t0, t1, t2};
    };

    for (const Inequality& row : ineqs.rows) {
      if (row.family != Family::individual_rationality && row.vacuous) {
        ++vacuous_rows_;  // tautological; contributes a constant if counted
        continue;
      }
      std::array<double, 3> c{0.0, 0.0, 0.0};
      auto add = [&](const PairRef& b_of, const PairRef& s_of, double sign) {
        const auto t = terms(b_of, s_of);
        c[0] += sign * t[0];
        c[1] += sign * t[1];
        c[2] += sign * t[2];
      };
      switch (row.family) {
        case Family::pairwise_transfer:
          add(row.left, row.left, +1.0);
          add(row.left, row.right, -1.0);
          c[0] -= row.transfer_rhs.value_or(0.0);
          break;
        case Family::pairwise_no_transfer:
          add(row.left, row.left, +1.0);
          add(row.right, row.right, +1.0);
          add(row.left, row.right, -1.0);
          add(row.right, row.left, -1.0);
          break;
        case Family::individual_rationality:
          add(row.left, row.left, +1.0);
          c[0] -= row.transfer_rhs.value_or(0.0);
          break;
      }
      auto& dst = row.family == Family::individual_rationality ? ir_ : pairwise_;
      dst.c0.push_back(c[0]);
      dst.c1.push_back(c[1]);
      dst.c2.push_back(c[2]);
    }
  }

  ScoreValue operator()(const Candidate& cand) const {
    ScoreValue value;
    value.pairwise_satisfied = count_satisfied(pairwise_, cand);
    if (count_vacuous_) value.pairwise_satisfied += vacuous_rows_;
    value.ir_satisfied = count_satisfied(ir_, cand);
    value.weighted_total = static_cast<double>(value.pairwise_satisfied) +
                           lambda_ * static_cast<double>(value.ir_satisfied);
    return value;
  }

  double weighted(const Candidate& cand) const { return (*this)(cand).weighted_total; }

  long pairwise_rows() const { return static_cast<long>(pairwise_.c0.size()); }
  long ir_rows() const { return static_cast<long>(ir_.c0.size()); }
  long vacuous_rows() const { return vacuous_rows_; }
  double lambda() const { return lambda_; }

  // Exact beta2 slope of one compiled pairwise row; rows whose production
  // terms cancel have slope identically 0.0.
  double pairwise_beta2_slope(std::size_t i) const { return pairwise_.c2[i]; }
  double ir_beta2_slope(std::size_t i) const { return ir_.c2[i]; }

 private:
  struct Rows {
    std::vector<double> c0, c1, c2;
  };

  static long count_satisfied(const Rows& rows, const Candidate& cand) {
    long n = 0;
    const double b1 = cand.beta1;
    const double b2 = cand.beta2;
    const std::size_t size = rows.c0.size();
    const double* c0 = rows.c0.data();
    const double* c1 = rows.c1.data();
    const double* c2 = rows.c2.data();
    for (std::size_t i = 0; i < size; ++i)
      n += (c0[i] + c1[i] * b1 + c2[i] * b2 >= -indicator_tolerance) ? 1 : 0;
    return n;
  }

  Rows pairwise_;
  Rows ir_;
  double lambda_;
  bool count_vacuous_;
  long vacuous_rows_;
};

// Convenience entry matching the row-by-row definition: candidate betas are
// carried by `spec` alongside the case kind and kappa.
inline ScoreValue score(const ProductionSpec& spec, const InequalitySet& ineqs,
                        const Market& market) {
  const ScoreEvaluator eval(ineqs, market, spec.kind, spec.kappa);
  return eval({spec.beta1, spec.beta2});
}

struct DEConfig {
  int population = 400;
  int max_generations = 300;
  double differential_weight = 0.8;  // F
  double crossover_rate = 0.9;       // CR
  std::array<std::pair<double, double>, 2> domain{{{-10.0, 10.0}, {-10.0, 10.0}}};
  std::uint64_t seed = 0;
};

inline void validate(const DEConfig& cfg) {
  if (cfg.population < 4) throw std::invalid_argument("DEConfig: population must be >= 4");
  if (cfg.max_generations < 1)
    throw std::invalid_argument("DEConfig: max_generations must be >= 1");
  if (!(cfg.differential_weight > 0.0 && cfg.differential_weight <= 2.0))
    throw std::invalid_argument("DEConfig: differential_weight must be in (0,2]");
  if (!(cfg.crossover_rate >= 0.0 && cfg.crossover_rate <= 1.0))
    throw std::invalid_argument("DEConfig: crossover_rate must be in [0,1]");
  for (const auto& [lo, hi] : cfg.domain)
    if (!(lo < hi)) throw std::invalid_argument("DEConfig: empty domain interval");
}

struct DEResult {
  Candidate best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // best value after init and after each generation
};

// DE/rand/1/bin maximization over the (beta1, beta2) box. Selection is
// greedy with ties kept by the incumbent, so the per-generation best trace
// is non-decreasing; a fixed seed makes the whole run deterministic.
template <typename Objective>
DEResult maximize(Objective&& objective, const DEConfig& cfg) {
  validate(cfg);
  SplitMix64 rng(cfg.seed);
  const int np = cfg.population;

  auto clip = [&](double x, int d) {
    const auto& [lo, hi] = cfg.domain[d];
    return x < lo ? lo : (x > hi ? hi : x);
  };

  std::vector<Candidate> pop(np);
  std::vector<double> value(np);
  for (int i = 0; i < np; ++i) {
    pop[i].beta1 = cfg.domain[0].first +
                   rng.next_uniform() * (cfg.domain[0].second - cfg.domain[0].first);
    pop[i].beta2 = cfg.domain[1].first +
                   rng.next_uniform() * (cfg.domain[1].second - cfg.domain[1].first);
    value[i] = objective(pop[i]);
  }

  DEResult result;
  auto record_best = [&]() {
    double best = value[0];
    int at = 0;
    for (int i = 1; i < np; ++i)
      if (value[i] > best) {
        best = value[i];
        at = i;
      }
    if (best > result.best_value) {
      result.best_value = best;
      result.best = pop[at];
    }
    result.trace.push_back(result.best_value);
  };
  record_best();

  for (int gen = 0; gen < cfg.max_generations; ++gen) {
    for (int i = 0; i < np; ++i) {
      int a, b, c;
      do a = static_cast<int>(rng.next_below(np)); while (a == i);
      do b = static_cast<int>(rng.next_below(np)); while (b == i || b == a);
      do c = static_cast<int>(rng.next_below(np)); while (c == i || c == a || c == b);

      const std::array<double, 2> base{pop[a].beta1, pop[a].beta2};
      const std::array<double, 2> delta{pop[b].beta1 - pop[c].beta1,
                                        pop[b].beta2 - pop[c].beta2};
      const std::array<double, 2> incumbent{pop[i].beta1, pop[i].beta2};
      const int j_rand = static_cast<int>(rng.next_below(2));
      std::array<double, 2> trial;
      for (int d = 0; d < 2; ++d) {
        const bool take = rng.next_uniform() < cfg.crossover_rate || d == j_rand;
        trial[d] = take ? clip(base[d] + cfg.differential_weight * delta[d], d)
                        : incumbent[d];
      }
      const Candidate trial_cand{trial[0], trial[1]};
      const double trial_value = objective(trial_cand);
      if (trial_value > value[i]) {
        pop[i] = trial_cand;
        value[i] = trial_value;
      }
    }
    record_best();
  }
  return result;
}

struct GridAxis {
  double lo = -10.0;
  double hi = 10.0;
  int steps = 2;
};

struct GridResult {
  std::vector<double> beta1_axis;
  std::vector<double> beta2_axis;
  Matrix values;  // [i][j] = weighted total at (beta1_axis[i], beta2_axis[j])
  int argmax_i = 0;
  int argmax_j = 0;
};

inline std::vector<double> linspace(const GridAxis& axis) {
  if (axis.steps < 2) throw std::invalid_argument("GridAxis: steps must be >= 2");
  if (!(axis.lo <= axis.hi)) throw std::invalid_argument("GridAxis: lo must be <= hi");
  std::vector<double> xs(axis.steps);
  for (int k = 0; k < axis.steps; ++k)
    xs[k] = axis.lo + (axis.hi - axis.lo) * k / (axis.steps - 1);
  return xs;
}

// Cartesian evaluation of the weighted score; the argmax is the first
// maximizer in row-major scan order.
inline GridResult objective_grid(const ScoreEvaluator& eval, const GridAxis& beta1,
                                 const GridAxis& beta2) {
  GridResult grid;
  grid.beta1_axis = linspace(beta1);
  grid.beta2_axis = linspace(beta2);
  grid.values = Matrix(beta1.steps, beta2.steps);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < beta1.steps; ++i) {
    for (int j = 0; j < beta2.steps; ++j) {
      const double v = eval.weighted({grid.beta1_axis[i], grid.beta2_axis[j]});
      grid.values(i, j) = v;
      if (v > best) {
        best = v;
        grid.argmax_i = i;
        grid.argmax_j = j;
      }
    }
  }
  return grid;
}

}  // namespace matchscore
