#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace vista {

class CyclicGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Directed graph over dense node ids 0..n-1. No self-loops, no duplicate
/// edges. Values are treated as immutable once built; mutation happens only
/// during construction by a single owner.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(int n) : n_(n), out_(n), in_(n) {
    if (n < 0) throw std::invalid_argument("Digraph: negative node count");
  }

  int node_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edge_set_.size()); }

  bool has_edge(int u, int v) const {
    return edge_set_.count(key(u, v)) != 0;
  }

  /// Adds u->v. Returns false if the edge already exists.
  bool add_edge(int u, int v) {
    check_node(u);
    check_node(v);
    if (u == v) throw std::invalid_argument("Digraph: self-loop " + std::to_string(u));
    if (!edge_set_.insert(key(u, v)).second) return false;
    out_[u].push_back(v);
    in_[v].push_back(u);
    return true;
  }

  const std::vector<int>& out(int u) const {
    check_node(u);
    return out_[u];
  }
  const std::vector<int>& in(int v) const {
    check_node(v);
    return in_[v];
  }

  /// Edge list sorted lexicographically; canonical order for io and tests.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> result;
    result.reserve(edge_set_.size());
    for (int u = 0; u < n_; ++u) {
      for (int v : out_[u]) result.emplace_back(u, v);
    }
    std::sort(result.begin(), result.end());
    return result;
  }

  bool operator==(const Digraph& other) const {
    return n_ == other.n_ && edge_set_ == other.edge_set_;
  }

  void check_node(int v) const {
    if (v < 0 || v >= n_) {
      throw std::out_of_range("Digraph: node " + std::to_string(v) +
                              " out of range [0," + std::to_string(n_) + ")");
    }
  }

 private:
  std::uint64_t key(int u, int v) const {
    return static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(n_) +
           static_cast<std::uint64_t>(v);
  }

  int n_ = 0;
  std::vector<std::vector<int>> out_, in_;
  std::unordered_set<std::uint64_t> edge_set_;
};

/// Digraph with a strictly positive weight per edge; carries merged voting
/// scores into FAS and filtering.
class WeightedDigraph {
 public:
  WeightedDigraph() = default;
  explicit WeightedDigraph(int n) : n_(n) {
    if (n < 0) throw std::invalid_argument("WeightedDigraph: negative node count");
  }

  int node_count() const { return n_; }
  int edge_count() const { return static_cast<int>(weights_.size()); }

  void set_edge(int u, int v, double w) {
    check_node(u);
    check_node(v);
    if (u == v) throw std::invalid_argument("WeightedDigraph: self-loop");
    if (!(w > 0.0)) throw std::invalid_argument("WeightedDigraph: weight must be positive");
    weights_[{u, v}] = w;
  }

  bool has_edge(int u, int v) const { return weights_.count({u, v}) != 0; }

  double weight(int u, int v) const {
    auto it = weights_.find({u, v});
    if (it == weights_.end()) throw std::out_of_range("WeightedDigraph: no such edge");
    return it->second;
  }

  /// Sorted by (u, v); map iteration order is already deterministic.
  const std::map<std::pair<int, int>, double>& weighted_edges() const { return weights_; }

  Digraph structure() const {
    Digraph g(n_);
    for (const auto& [edge, w] : weights_) g.add_edge(edge.first, edge.second);
    return g;
  }

  void check_node(int v) const {
    if (v < 0 || v >= n_) {
      throw std::out_of_range("WeightedDigraph: node " + std::to_string(v) + " out of range");
    }
  }

 private:
  int n_ = 0;
  std::map<std::pair<int, int>, double> weights_;
};

/// Kahn peeling; ties broken by smallest node id so the order is canonical.
/// Returns nullopt-like via thrown CyclicGraphError when no order exists.
inline std::vector<int> topological_order(const Digraph& g) {
  const int n = g.node_count();
  std::vector<int> indeg(n, 0);
  for (int v = 0; v < n; ++v) indeg[v] = static_cast<int>(g.in(v).size());
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int w : g.out(u)) {
      if (--indeg[w] == 0) ready.push(w);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw CyclicGraphError("topological_order: graph contains a directed cycle");
  }
  return order;
}

inline bool is_acyclic(const Digraph& g) {
  const int n = g.node_count();
  std::vector<int> indeg(n, 0);
  for (int v = 0; v < n; ++v) indeg[v] = static_cast<int>(g.in(v).size());
  std::vector<int> stack;
  for (int v = 0; v < n; ++v) {
    if (indeg[v] == 0) stack.push_back(v);
  }
  int seen = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++seen;
    for (int w : g.out(u)) {
      if (--indeg[w] == 0) stack.push_back(w);
    }
  }
  return seen == n;
}

/// Induced subgraph plus the local<->global id bijection. Local ids are the
/// ranks of the sorted global ids, so learners never see global ids.
struct Subgraph {
  Digraph graph;
  std::vector<int> to_global;  // local id -> global id, ascending

  int to_local(int global_id) const {
    auto it = std::lower_bound(to_global.begin(), to_global.end(), global_id);
    if (it == to_global.end() || *it != global_id) {
      throw std::out_of_range("Subgraph: node not in subgraph");
    }
    return static_cast<int>(it - to_global.begin());
  }
};

inline Subgraph induced_subgraph(const Digraph& g, const std::vector<int>& nodes) {
  Subgraph sub;
  sub.to_global = nodes;
  std::sort(sub.to_global.begin(), sub.to_global.end());
  sub.to_global.erase(std::unique(sub.to_global.begin(), sub.to_global.end()),
                      sub.to_global.end());
  for (int v : sub.to_global) g.check_node(v);
  const int k = static_cast<int>(sub.to_global.size());
  sub.graph = Digraph(k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a != b && g.has_edge(sub.to_global[a], sub.to_global[b])) {
        sub.graph.add_edge(a, b);
      }
    }
  }
  return sub;
}

/// Union of edge sets over a common global node space.
inline Digraph edge_union(const std::vector<Digraph>& graphs) {
  if (graphs.empty()) return Digraph(0);
  const int n = graphs.front().node_count();
  Digraph result(n);
  for (const auto& g : graphs) {
    if (g.node_count() != n) {
      throw std::invalid_argument("edge_union: inconsistent node counts");
    }
    for (const auto& [u, v] : g.edges()) result.add_edge(u, v);
  }
  return result;
}

}  // namespace vista
