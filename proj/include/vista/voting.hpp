#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vista/fas.hpp"
#include "vista/graph.hpp"
#include "vista/learners.hpp"

namespace vista {

/// Directional vote counts: edge_count(i,j) = number of local graphs emitting
/// i->j; occurrence(i,j) = edge_count(i,j) + edge_count(j,i).
class VoteTally {
 public:
  VoteTally() = default;
  explicit VoteTally(int n) : n_(n), counts_(static_cast<std::size_t>(n) * n, 0) {
    if (n < 0) throw std::invalid_argument("VoteTally: negative node count");
  }

  int node_count() const { return n_; }

  void add_vote(int i, int j) {
    check(i);
    check(j);
    if (i == j) throw std::invalid_argument("VoteTally: self vote");
    ++counts_[idx(i, j)];
  }

  long long edge_count(int i, int j) const {
    check(i);
    check(j);
    return counts_[idx(i, j)];
  }

  long long occurrence(int i, int j) const {
    return edge_count(i, j) + edge_count(j, i);
  }

  long long total_votes() const {
    long long sum = 0;
    for (long long c : counts_) sum += c;
    return sum;
  }

  bool operator==(const VoteTally& other) const {
    return n_ == other.n_ && counts_ == other.counts_;
  }

 private:
  void check(int v) const {
    if (v < 0 || v >= n_) throw std::out_of_range("VoteTally: node out of range");
  }
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }

  int n_ = 0;
  std::vector<long long> counts_;
};

/// Accumulates local-graph edges into global counts via the id maps.
inline VoteTally tally_votes(const std::vector<LocalGraph>& locals, int n) {
  VoteTally tally(n);
  for (const auto& lg : locals) {
    if (static_cast<int>(lg.global_ids.size()) != lg.graph.node_count()) {
      throw std::invalid_argument("tally_votes: id map size mismatch");
    }
    for (const auto& [a, b] : lg.graph.edges()) {
      const int u = lg.global_ids[a], v = lg.global_ids[b];
      if (u < 0 || u >= n || v < 0 || v >= n) {
        throw std::out_of_range("tally_votes: global id out of range");
      }
      tally.add_vote(u, v);
    }
  }
  return tally;
}

/// Naive voting ratio A/m; 0 where the pair has no votes.
inline Eigen::MatrixXd naive_scores(const VoteTally& tally) {
  const int n = tally.node_count();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const long long m = tally.occurrence(i, j);
      if (m > 0) {
        scores(i, j) = static_cast<double>(tally.edge_count(i, j)) / static_cast<double>(m);
      }
    }
  }
  return scores;
}

/// Confidence-adjusted score (1 - e^{-lambda m}) * A/m; 0 where m = 0.
inline Eigen::MatrixXd weighted_scores(const VoteTally& tally, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("weighted_scores: lambda > 0");
  const int n = tally.node_count();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const long long m = tally.occurrence(i, j);
      if (m > 0) {
        const double weight = 1.0 - std::exp(-lambda * static_cast<double>(m));
        scores(i, j) =
            weight * static_cast<double>(tally.edge_count(i, j)) / static_cast<double>(m);
      }
    }
  }
  return scores;
}

/// Data-dependent pseudo-count kappa(m) = m e^{-lambda m} / (1 - e^{-lambda m}),
/// the Beta-prior strength under which the weighted score is the posterior
/// mean: A/(m + kappa(m)) = (1 - e^{-lambda m}) A/m.
inline double pseudo_count_kappa(double m, double lambda) {
  if (!(m >= 1.0)) throw std::invalid_argument("pseudo_count_kappa: m >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("pseudo_count_kappa: lambda > 0");
  return m / std::expm1(lambda * m);
}

enum class VotingMode { naive, weighted };

struct VotingParams {
  VotingMode mode = VotingMode::weighted;
  double lambda = 0.5;
  double threshold = 0.7;

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
      throw std::invalid_argument("VotingParams: t in (0,1)");
    }
    if (mode == VotingMode::weighted && !(lambda > 0.0)) {
      throw std::invalid_argument("VotingParams: lambda > 0 in weighted mode");
    }
  }
};

struct MergeDiagnostics {
  long long candidate_edges = 0;
  long long removed_by_fas = 0;
  long long removed_by_threshold = 0;
  std::vector<long long> score_histogram = std::vector<long long>(10, 0);  // bins over (0,1]
};

struct MergeResult {
  Digraph dag;                    // final DAG
  WeightedDigraph final_weighted; // final DAG with surviving scores
  WeightedDigraph merged;         // scored graph before FAS (G1 of the merge)
  FasResult fas;
  MergeDiagnostics diagnostics;
  Eigen::MatrixXd scores;
};

/// Full merge: score, build the weighted candidate graph from all strictly
/// positive scores, break cycles (FAS first, as prescribed), then filter with
/// the global threshold. An edge survives the filter only when its score
/// strictly exceeds t, which makes the lambda <= lambda_min regime (effective
/// threshold r(m) >= 1) yield an empty graph even for fully supported pairs.
inline MergeResult merge(const VoteTally& tally, const VotingParams& params) {
  params.validate();
  const int n = tally.node_count();
  MergeResult result;
  result.scores = (params.mode == VotingMode::weighted)
                      ? weighted_scores(tally, params.lambda)
                      : naive_scores(tally);

  result.merged = WeightedDigraph(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = result.scores(i, j);
      if (i != j && s > 0.0) {
        result.merged.set_edge(i, j, s);
        ++result.diagnostics.candidate_edges;
        const int bin = std::min(9, static_cast<int>(s * 10.0));
        ++result.diagnostics.score_histogram[bin];
      }
    }
  }

  result.fas = break_cycles(result.merged);
  result.diagnostics.removed_by_fas =
      static_cast<long long>(result.fas.removed_edges.size());

  result.dag = Digraph(n);
  result.final_weighted = WeightedDigraph(n);
  for (const auto& [u, v] : result.fas.dag.edges()) {
    const double s = result.scores(u, v);
    if (s > params.threshold) {
      result.dag.add_edge(u, v);
      result.final_weighted.set_edge(u, v, s);
    } else {
      ++result.diagnostics.removed_by_threshold;
    }
  }
  return result;
}

inline MergeResult merge(const std::vector<LocalGraph>& locals, int n,
                         const VotingParams& params) {
  return merge(tally_votes(locals, n), params);
}

}  // namespace vista
