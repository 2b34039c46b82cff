#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vista/graph.hpp"
#include "vista/rng.hpp"

namespace vista {

/// N x n matrix of observational samples; column j holds variable j.
using DataMatrix = Eigen::MatrixXd;

class ZeroVarianceError : public std::runtime_error {
 public:
  explicit ZeroVarianceError(int column)
      : std::runtime_error("standardize: column " + std::to_string(column) +
                           " has zero variance"),
        column(column) {}
  int column;
};

/// Linear/quadratic SEM spec: an acyclic graph with nonzero edge coefficients
/// and a shared noise scale.
struct WeightedScm {
  Digraph graph;
  std::map<std::pair<int, int>, double> weights;
  double noise_scale = 1.0;
};

namespace detail {
// Fixed stage tags keep the per-stage seed streams disjoint.
inline constexpr std::uint64_t kTagGraph = 0x6772617068ull;    // "graph"
inline constexpr std::uint64_t kTagWeights = 0x77656967687455ull;
inline constexpr std::uint64_t kTagNoise = 0x6e6f697365ull;
}  // namespace detail

/// Erdos-Renyi DAG: a random permutation fixes the topological order and each
/// forward pair appears independently with probability h/(n-1), giving an
/// expected edge count of n*h/2.
inline Digraph gen_er_dag(int n, double h, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_er_dag: need n >= 2");
  if (!(h > 0.0) || h > static_cast<double>(n - 1)) {
    throw std::invalid_argument("gen_er_dag: need 0 < h <= n-1");
  }
  const double theta = h / static_cast<double>(n - 1);
  Rng rng(derive_seed(seed, detail::kTagGraph));
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  Digraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(theta)) g.add_edge(perm[i], perm[j]);
    }
  }
  return g;
}

/// Scale-free DAG via Barabasi-Albert preferential attachment with
/// m_att = ceil(h/2) links per new node; every edge is oriented from the
/// earlier-attached endpoint to the later one, so attachment order is the
/// topological order.
inline Digraph gen_sf_dag(int n, double h, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_sf_dag: need n >= 2");
  if (!(h >= 1.0)) throw std::invalid_argument("gen_sf_dag: need h >= 1");
  const int m_att = static_cast<int>(std::ceil(h / 2.0));
  if (m_att >= n) throw std::invalid_argument("gen_sf_dag: ceil(h/2) must be < n");

  Rng rng(derive_seed(seed, detail::kTagGraph));
  Digraph g(n);
  std::vector<int> bag;  // nodes repeated once per incident edge
  std::vector<int> targets;
  for (int i = 0; i < m_att; ++i) targets.push_back(i);

  for (int t = m_att; t < n; ++t) {
    for (int v : targets) g.add_edge(v, t);
    for (int v : targets) bag.push_back(v);
    for (int i = 0; i < static_cast<int>(targets.size()); ++i) bag.push_back(t);
    if (t + 1 < n) {
      // Sample m_att distinct endpoints from the bag (degree-proportional).
      std::set<int> chosen;
      while (static_cast<int>(chosen.size()) < m_att) {
        chosen.insert(bag[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(bag.size()) - 1))]);
      }
      targets.assign(chosen.begin(), chosen.end());
    }
  }
  return g;
}

/// Uniform magnitudes in [low, high] with Bernoulli(1/2) sign.
inline WeightedScm sample_weights(const Digraph& g, double low, double high,
                                  std::uint64_t seed, double noise_scale = 1.0) {
  if (!(low > 0.0) || high < low) {
    throw std::invalid_argument("sample_weights: need 0 < low <= high");
  }
  if (!(noise_scale > 0.0)) throw std::invalid_argument("sample_weights: noise_scale > 0");
  WeightedScm scm;
  scm.graph = g;
  scm.noise_scale = noise_scale;
  Rng rng(derive_seed(seed, detail::kTagWeights));
  for (const auto& [u, v] : g.edges()) {
    const double magnitude = rng.uniform(low, high);
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    scm.weights[{u, v}] = sign * magnitude;
  }
  return scm;
}

namespace detail {

inline DataMatrix noise_matrix(int num_samples, int n, double noise_scale,
                               std::uint64_t seed) {
  DataMatrix noise(num_samples, n);
  for (int j = 0; j < n; ++j) {
    // Per-column stream: regenerating one variable never disturbs the others.
    Rng rng(derive_seed(seed, kTagNoise ^ (0x9e37ull * static_cast<std::uint64_t>(j + 1))));
    for (int i = 0; i < num_samples; ++i) noise(i, j) = rng.normal(0.0, noise_scale);
  }
  return noise;
}

template <bool Quadratic>
DataMatrix sample_sem(const WeightedScm& scm, int num_samples, std::uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("sample_sem: need N >= 1");
  const int n = scm.graph.node_count();
  const std::vector<int> order = topological_order(scm.graph);  // throws on cycles
  DataMatrix data = noise_matrix(num_samples, n, scm.noise_scale, seed);
  constexpr double kClip = 1e6;
  for (int j : order) {
    for (int parent : scm.graph.in(j)) {
      const double w = scm.weights.at({parent, j});
      if constexpr (Quadratic) {
        data.col(j) += w * data.col(parent).array().square().matrix();
      } else {
        data.col(j) += w * data.col(parent);
      }
    }
    if constexpr (Quadratic) {
      data.col(j) = data.col(j).cwiseMax(-kClip).cwiseMin(kClip);
    }
  }
  return data;
}

}  // namespace detail

/// X_j = sum_i w_ij X_i + eps_j with eps_j ~ N(0, noise_scale^2), evaluated in
/// topological order. Pure function of (scm, N, seed).
inline DataMatrix sample_linear_sem(const WeightedScm& scm, int num_samples,
                                    std::uint64_t seed) {
  return detail::sample_sem<false>(scm, num_samples, seed);
}

/// X_j = sum_i w_ij X_i^2 + eps_j, values clamped to [-1e6, 1e6] to prevent
/// blow-up in deep graphs.
inline DataMatrix sample_quadratic_sem(const WeightedScm& scm, int num_samples,
                                       std::uint64_t seed) {
  return detail::sample_sem<true>(scm, num_samples, seed);
}

/// Centers and scales every column to sample mean 0, sample sd 1 (ddof = 1).
inline DataMatrix standardize(const DataMatrix& data) {
  if (data.rows() < 2) throw std::invalid_argument("standardize: need N >= 2");
  DataMatrix out = data;
  const double denom = static_cast<double>(data.rows() - 1);
  for (int j = 0; j < data.cols(); ++j) {
    const double mean = out.col(j).mean();
    out.col(j).array() -= mean;
    const double sd = std::sqrt(out.col(j).squaredNorm() / denom);
    if (sd == 0.0) throw ZeroVarianceError(j);
    out.col(j) /= sd;
  }
  return out;
}

}  // namespace vista
