#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vista/graph.hpp"
#include "vista/markov_blanket.hpp"
#include "vista/parallel.hpp"
#include "vista/rng.hpp"
#include "vista/synth.hpp"

namespace vista {

/// One "conquer" task: the center node, the sorted global ids of
/// {v} u MB(v), the data restricted to those columns, and a task seed.
struct SubgraphTask {
  int node = 0;
  std::vector<int> global_nodes;  // ascending; local id = rank
  DataMatrix local_data;          // N x k; empty for data-free learners
  std::uint64_t seed = 0;
};

/// A local learner maps a task to a directed graph over the task's k local
/// nodes. It must be a pure function of the task.
using LocalLearner = std::function<Digraph(const SubgraphTask&)>;

struct LocalGraph {
  int node = 0;                  // center node of the subgraph
  Digraph graph;                 // over local ids
  std::vector<int> global_ids;   // local -> global
};

struct LearnerFailure {
  int node = 0;
  std::string message;
};

struct LearnResult {
  std::vector<LocalGraph> locals;        // one per node, failed ones empty
  std::vector<LearnerFailure> failures;  // failed subgraphs cast no votes
};

/// Simulates the vote model of the error analysis directly on the ground
/// truth: a true edge inside the subgraph is emitted with probability p
/// (reversed with probability reverse_prob), and each ordered non-adjacent
/// pair picks up a spurious edge with probability q. Draws are keyed by
/// (seed, global edge ids) so they do not depend on iteration order, and are
/// independent across subgraphs.
class NoisyOracleLearner {
 public:
  NoisyOracleLearner(const Digraph& truth, double p, double q, double reverse_prob)
      : truth_(&truth), p_(p), q_(q), reverse_prob_(reverse_prob) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("NoisyOracleLearner: p in [0,1]");
    if (q < 0.0 || q >= 1.0) throw std::invalid_argument("NoisyOracleLearner: q in [0,1)");
    if (reverse_prob < 0.0 || reverse_prob >= 1.0) {
      throw std::invalid_argument("NoisyOracleLearner: reverse_prob in [0,1)");
    }
    if (p < q) throw std::invalid_argument("NoisyOracleLearner: need p >= q");
  }

  Digraph operator()(const SubgraphTask& task) const {
    const int k = static_cast<int>(task.global_nodes.size());
    for (int g : task.global_nodes) truth_->check_node(g);
    Digraph local(k);
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const int ga = task.global_nodes[a], gb = task.global_nodes[b];
        int src = -1, dst = -1, src_local = -1, dst_local = -1;
        if (truth_->has_edge(ga, gb)) {
          src = ga, dst = gb, src_local = a, dst_local = b;
        } else if (truth_->has_edge(gb, ga)) {
          src = gb, dst = ga, src_local = b, dst_local = a;
        }
        if (src >= 0) {
          Rng draw(derive_seed(task.seed, pair_key(src, dst)));
          if (draw.bernoulli(p_)) {
            if (draw.bernoulli(reverse_prob_)) {
              local.add_edge(dst_local, src_local);
            } else {
              local.add_edge(src_local, dst_local);
            }
          }
        } else {
          Rng fwd(derive_seed(task.seed, pair_key(ga, gb)));
          if (fwd.bernoulli(q_)) local.add_edge(a, b);
          Rng rev(derive_seed(task.seed, pair_key(gb, ga)));
          if (rev.bernoulli(q_)) local.add_edge(b, a);
        }
      }
    }
    return local;
  }

 private:
  const Digraph* truth_;
  double p_, q_, reverse_prob_;
};

/// Noiseless oracle: returns the induced true subgraph exactly.
inline LocalLearner make_oracle_learner(const Digraph& truth) {
  return NoisyOracleLearner(truth, 1.0, 0.0, 0.0);
}

namespace detail {
// A pair emitted in both directions by one subgraph provides no directional
// vote; both copies are dropped.
inline Digraph drop_bidirected(const Digraph& g) {
  bool any = false;
  for (const auto& [u, v] : g.edges()) {
    if (u < v && g.has_edge(v, u)) {
      any = true;
      break;
    }
  }
  if (!any) return g;
  Digraph out(g.node_count());
  for (const auto& [u, v] : g.edges()) {
    if (!g.has_edge(v, u)) out.add_edge(u, v);
  }
  return out;
}
}  // namespace detail

/// Runs the learner on every {v} u MB(v) subgraph, optionally in parallel.
/// Per-subgraph seeds derive from (master_seed, v), so results are invariant
/// to scheduling. Failed subgraphs contribute no votes and are reported.
inline LearnResult learn_all_subgraphs(const LocalLearner& learner,
                                       const std::vector<MarkovBlanket>& blankets,
                                       const DataMatrix* data, std::uint64_t master_seed,
                                       int jobs = 1) {
  const int n = static_cast<int>(blankets.size());
  LearnResult result;
  result.locals.resize(n);
  std::vector<std::string> errors(n);
  std::vector<char> failed(n, 0);

  parallel_for(n, jobs, [&](int v) {
    SubgraphTask task;
    task.node = blankets[v].target;
    task.global_nodes = blankets[v].members;
    task.global_nodes.push_back(blankets[v].target);
    std::sort(task.global_nodes.begin(), task.global_nodes.end());
    task.global_nodes.erase(
        std::unique(task.global_nodes.begin(), task.global_nodes.end()),
        task.global_nodes.end());
    task.seed = derive_seed(master_seed, static_cast<std::uint64_t>(v));
    const int k = static_cast<int>(task.global_nodes.size());
    if (data != nullptr) {
      task.local_data.resize(data->rows(), k);
      for (int c = 0; c < k; ++c) task.local_data.col(c) = data->col(task.global_nodes[c]);
    }
    LocalGraph lg;
    lg.node = task.node;
    lg.global_ids = task.global_nodes;
    try {
      Digraph learned = learner(task);
      if (learned.node_count() != k) {
        throw std::runtime_error("learner returned wrong node count");
      }
      lg.graph = detail::drop_bidirected(learned);
    } catch (const std::exception& e) {
      failed[v] = 1;
      errors[v] = e.what();
      lg.graph = Digraph(k);  // empty vote set
    }
    result.locals[v] = std::move(lg);
  });

  for (int v = 0; v < n; ++v) {
    if (failed[v]) result.failures.push_back({v, errors[v]});
  }
  return result;
}

}  // namespace vista
