#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vista/rng.hpp"

namespace vista {

/// Parameters of the binomial vote model: m votes, true/false support
/// probabilities p > q, decision threshold t, weight parameter lambda, and
/// target error epsilon.
struct VoteModel {
  long long m = 1;
  double p = 0.9;
  double q = 0.05;
  double t = 0.7;
  double lambda = 0.5;
  double epsilon = 0.05;
};

/// Effective threshold r(m) = t / (1 - e^{-lambda m}): the raw vote fraction
/// an edge must reach under the weighted rule.
inline double effective_threshold(double t, double lambda, long long m) {
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("effective_threshold: t in (0,1)");
  if (!(lambda > 0.0)) throw std::invalid_argument("effective_threshold: lambda > 0");
  if (m < 1) throw std::invalid_argument("effective_threshold: m >= 1");
  return t / -std::expm1(-lambda * static_cast<double>(m));
}

/// Chernoff sufficiency check: (mp/2)(1 - t/(p(1-e^{-lambda m})))^2 >= log(1/eps).
/// Not applicable when the effective threshold reaches p.
struct SufficiencyCheck {
  bool applicable = false;  // requires r(m) < p
  bool holds = false;
  double lhs = 0.0;
  double required = 0.0;    // log(1/epsilon)
  double slack = 0.0;       // lhs - required
  double effective_threshold = 0.0;
};

inline SufficiencyCheck check_sufficient_condition(const VoteModel& model) {
  SufficiencyCheck check;
  check.effective_threshold = effective_threshold(model.t, model.lambda, model.m);
  check.required = std::log(1.0 / model.epsilon);
  if (!(model.p > 0.0 && model.p < 1.0)) {
    throw std::invalid_argument("check_sufficient_condition: p in (0,1)");
  }
  if (!(model.epsilon > 0.0 && model.epsilon < 1.0)) {
    throw std::invalid_argument("check_sufficient_condition: epsilon in (0,1)");
  }
  if (check.effective_threshold >= model.p) return check;  // NotApplicable
  check.applicable = true;
  const double rel = 1.0 - check.effective_threshold / model.p;
  check.lhs = 0.5 * static_cast<double>(model.m) * model.p * rel * rel;
  check.slack = check.lhs - check.required;
  check.holds = check.lhs >= check.required;
  return check;
}

/// Closed-form lower bound on the votes per pair (Taylor-relaxed sufficiency):
/// m >= 2 log(1/eps) / (p ((1-t/p)^2 - 2(t/p)(1-t/p) e^{-lambda})).
/// Infeasible when the denominator is not positive.
struct MinVotesBound {
  bool feasible = false;
  long long required = 0;  // ceil of the bound when feasible
  double raw = 0.0;
  double denominator = 0.0;
};

inline MinVotesBound min_votes_bound(double p, double t, double lambda, double epsilon) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("min_votes_bound: p in (0,1)");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("min_votes_bound: t in (0,1)");
  if (!(p > t)) throw std::invalid_argument("min_votes_bound: need p > t");
  if (!(lambda > 0.0)) throw std::invalid_argument("min_votes_bound: lambda > 0");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("min_votes_bound: epsilon in (0,1]");
  }
  const double theta = t / p;
  const double gamma = 1.0 - theta;
  MinVotesBound bound;
  bound.denominator = p * (gamma * gamma - 2.0 * theta * gamma * std::exp(-lambda));
  if (bound.denominator <= 0.0) return bound;  // Infeasible
  bound.feasible = true;
  bound.raw = 2.0 * std::log(1.0 / epsilon) / bound.denominator;
  bound.required = static_cast<long long>(std::ceil(bound.raw));
  return bound;
}

/// Feasible lambda interval (exclusive, inclusive]:
/// -ln(1-t)/m < lambda <= -ln(eps)/m. Empty when eps >= 1-t.
struct LambdaRange {
  bool empty = true;
  double lambda_min = 0.0;  // exclusive
  double lambda_max = 0.0;  // inclusive
};

inline LambdaRange lambda_range(long long m, double t, double epsilon) {
  if (m < 1) throw std::invalid_argument("lambda_range: m >= 1");
  if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("lambda_range: t in (0,1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("lambda_range: epsilon in (0,1)");
  }
  LambdaRange range;
  range.lambda_min = -std::log1p(-t) / static_cast<double>(m);
  range.lambda_max = -std::log(epsilon) / static_cast<double>(m);
  range.empty = !(range.lambda_min < range.lambda_max);
  return range;
}

/// Structure-aware union bound: sum over true edges of e^{-2m(p-r(m))^2} plus
/// sum over false pairs of e^{-2m(r(m)-q)^2}. A term whose margin is not
/// positive is vacuous and contributes 1.
struct StructureBound {
  double total = 0.0;
  double fn_term = 0.0;
  double fp_term = 0.0;
  int vacuous_true = 0;
  int vacuous_false = 0;
};

inline StructureBound structure_error_bound(const std::vector<long long>& true_edge_votes,
                                            const std::vector<long long>& false_pair_votes,
                                            double p, double q, double t, double lambda,
                                            bool naive_rule = false) {
  if (!(p > q)) throw std::invalid_argument("structure_error_bound: need p > q");
  StructureBound bound;
  auto rate = [&](long long m) {
    return naive_rule ? t : effective_threshold(t, lambda, m);
  };
  for (long long m : true_edge_votes) {
    const double margin = p - rate(m);
    if (margin > 0.0) {
      bound.fn_term += std::exp(-2.0 * static_cast<double>(m) * margin * margin);
    } else {
      bound.fn_term += 1.0;
      ++bound.vacuous_true;
    }
  }
  for (long long m : false_pair_votes) {
    const double margin = rate(m) - q;
    if (margin > 0.0) {
      bound.fp_term += std::exp(-2.0 * static_cast<double>(m) * margin * margin);
    } else {
      bound.fp_term += 1.0;
      ++bound.vacuous_false;
    }
  }
  bound.total = bound.fn_term + bound.fp_term;
  return bound;
}

/// Worst-case simplification with uniform m_min: N_FN = nh/2 true edges and
/// N_FP = n(n-1)/2 - N_FN false pairs.
struct WorstCaseBound {
  double total = 0.0;
  double fn_term = 0.0;
  double fp_term = 0.0;
  double n_fn = 0.0;
  double n_fp = 0.0;
  bool vacuous = false;
};

inline WorstCaseBound worst_case_bound(int n, double h, long long m_min, double p,
                                       double q, double t, double lambda) {
  if (n < 2) throw std::invalid_argument("worst_case_bound: n >= 2");
  if (h < 0.0 || h > static_cast<double>(n - 1)) {
    throw std::invalid_argument("worst_case_bound: 0 <= h <= n-1");
  }
  if (!(p > q)) throw std::invalid_argument("worst_case_bound: need p > q");
  WorstCaseBound bound;
  bound.n_fn = static_cast<double>(n) * h / 2.0;
  bound.n_fp = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0 - bound.n_fn;
  const double r = effective_threshold(t, lambda, m_min);
  const double dp = p - r, dq = r - q;
  const double m = static_cast<double>(m_min);
  const double fn_factor = dp > 0.0 ? std::exp(-2.0 * m * dp * dp) : 1.0;
  const double fp_factor = dq > 0.0 ? std::exp(-2.0 * m * dq * dq) : 1.0;
  bound.vacuous = !(dp > 0.0) || !(dq > 0.0);
  bound.fn_term = bound.n_fn * fn_factor;
  bound.fp_term = bound.n_fp * fp_factor;
  bound.total = bound.fn_term + bound.fp_term;
  return bound;
}

/// Consistency constant 2/min{dp^2, dq^2}: with m = C log n votes per pair
/// and C above this value, the union-bound global error vanishes as n grows.
/// Margins live in (0,1).
inline double consistency_constant(double delta_p, double delta_q) {
  if (!(delta_p > 0.0 && delta_p < 1.0) || !(delta_q > 0.0 && delta_q < 1.0)) {
    throw std::invalid_argument("consistency_constant: margins in (0,1)");
  }
  const double d = std::min(delta_p, delta_q);
  return 2.0 / (d * d);
}

/// The union-bound derivation itself only needs C >= max{1/(2 dp^2), 1/dq^2};
/// exposed separately so both constants stay visible.
inline double consistency_constant_tight(double delta_p, double delta_q) {
  if (!(delta_p > 0.0 && delta_p < 1.0) || !(delta_q > 0.0 && delta_q < 1.0)) {
    throw std::invalid_argument("consistency_constant_tight: margins in (0,1)");
  }
  return std::max(1.0 / (2.0 * delta_p * delta_p), 1.0 / (delta_q * delta_q));
}

namespace detail {

/// Binomial(m, p) sampler by CDF inversion; the table is built once in long
/// double so repeated draws cost one uniform and a binary search.
class BinomialSampler {
 public:
  BinomialSampler(long long m, double p) : cdf_(static_cast<std::size_t>(m) + 1) {
    long double pmf = std::pow(1.0L - static_cast<long double>(p), static_cast<long double>(m));
    long double cum = pmf;
    cdf_[0] = cum;
    const long double odds =
        static_cast<long double>(p) / (1.0L - static_cast<long double>(p));
    for (long long k = 1; k <= m; ++k) {
      pmf *= odds * static_cast<long double>(m - k + 1) / static_cast<long double>(k);
      cum += pmf;
      cdf_[static_cast<std::size_t>(k)] = cum;
    }
    cdf_.back() = 1.0L;
  }

  long long sample(Rng& rng) const {
    const long double u = static_cast<long double>(rng.uniform());
    std::size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cdf_[mid] < u) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return static_cast<long long>(lo);
  }

 private:
  std::vector<long double> cdf_;
};

}  // namespace detail

/// Empirical acceptance rate of the weighted rule: fraction of trials where
/// A ~ Binomial(m, p) satisfies (1 - e^{-lambda m}) A/m >= t.
inline double monte_carlo_accept_rate(const VoteModel& model, long long trials,
                                      std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("monte_carlo_accept_rate: trials >= 1");
  if (!(model.p >= 0.0 && model.p <= 1.0)) {
    throw std::invalid_argument("monte_carlo_accept_rate: p in [0,1]");
  }
  const double weight = -std::expm1(-model.lambda * static_cast<double>(model.m));
  Rng rng(derive_seed(seed, 0x4d43ull));  // "MC"
  long long accepted = 0;
  if (model.p >= 1.0) {
    const double score = weight;
    return score >= model.t ? 1.0 : 0.0;
  }
  detail::BinomialSampler sampler(model.m, model.p);
  for (long long i = 0; i < trials; ++i) {
    const long long a = sampler.sample(rng);
    const double score =
        weight * static_cast<double>(a) / static_cast<double>(model.m);
    if (score >= model.t) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(trials);
}

enum class GraphFamily { er, sf };

/// Family-specific instantiation of the worst-case bound at the baseline
/// vote count m = 2. ER reports the O(theta^2) remainder as theta^2 itself;
/// SF adds the hub tail (n(n-1)/2) C_alpha n^{-(alpha-2)} with C_alpha
/// supplied by the caller (the analysis leaves it as a universal constant).
struct FamilyBound {
  double total = 0.0;
  double fn_term = 0.0;
  double fp_term = 0.0;
  double residual = 0.0;
  double delta_p = 0.0;
  double delta_q = 0.0;
};

inline FamilyBound er_sf_bound(GraphFamily family, int n, double h, double alpha_tail,
                               double p, double q, double t, double lambda,
                               double c_alpha = 1.0) {
  if (n < 2) throw std::invalid_argument("er_sf_bound: n >= 2");
  if (h < 0.0 || h > static_cast<double>(n - 1)) {
    throw std::invalid_argument("er_sf_bound: 0 <= h <= n-1");
  }
  if (family == GraphFamily::sf && !(alpha_tail > 2.0 && alpha_tail < 3.0)) {
    throw std::invalid_argument("er_sf_bound: SF tail exponent in (2,3)");
  }
  FamilyBound bound;
  const double r2 = effective_threshold(t, lambda, 2);
  bound.delta_p = p - r2;
  bound.delta_q = r2 - q;
  const double dn = static_cast<double>(n);
  const double n_fn = dn * h / 2.0;
  const double n_fp = (dn * (dn - 1.0) - dn * h) / 2.0;
  const double fn_factor =
      bound.delta_p > 0.0 ? std::exp(-4.0 * bound.delta_p * bound.delta_p) : 1.0;
  const double fp_factor =
      bound.delta_q > 0.0 ? std::exp(-4.0 * bound.delta_q * bound.delta_q) : 1.0;
  bound.fn_term = n_fn * fn_factor;
  bound.fp_term = n_fp * fp_factor;
  if (family == GraphFamily::er) {
    const double theta = h / (dn - 1.0);
    bound.residual = theta * theta;
  } else {
    bound.residual =
        dn * (dn - 1.0) / 2.0 * c_alpha * std::pow(dn, -(alpha_tail - 2.0));
  }
  bound.total = bound.fn_term + bound.fp_term + bound.residual;
  return bound;
}

}  // namespace vista
