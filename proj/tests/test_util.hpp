#pragma once

// Shared fixtures and independent brute-force oracles for the test suite.
// Everything here is deliberately naive: enumeration and permutation search
// that the implementation under test must agree with.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "vista/graph.hpp"
#include "vista/rng.hpp"

namespace testutil {

inline vista::Digraph random_dag(int n, double edge_prob, vista::Rng& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  vista::Digraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(edge_prob)) g.add_edge(perm[i], perm[j]);
    }
  }
  return g;
}

inline vista::Digraph random_digraph(int n, double edge_prob, vista::Rng& rng) {
  vista::Digraph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v && rng.bernoulli(edge_prob)) g.add_edge(u, v);
    }
  }
  return g;
}

inline vista::WeightedDigraph random_weighted_digraph(int n, double edge_prob,
                                                      vista::Rng& rng) {
  vista::WeightedDigraph g(n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u != v && rng.bernoulli(edge_prob)) g.set_edge(u, v, rng.uniform(0.01, 1.0));
    }
  }
  return g;
}

/// Exhaustive d-separation oracle: enumerate every simple trail between x and
/// y in the skeleton and test whether it is active given Z.
inline bool d_separated_brute(const vista::Digraph& g, int x, int y,
                              const std::vector<int>& z) {
  const int n = g.node_count();
  std::vector<char> in_z(n, 0);
  for (int v : z) in_z[v] = 1;

  // anc_z[v]: v is in Z or has a descendant in Z (collider activation).
  std::vector<char> anc_z(n, 0);
  std::vector<int> stack(z.begin(), z.end());
  for (int v : z) anc_z[v] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : g.in(v)) {
      if (!anc_z[p]) {
        anc_z[p] = 1;
        stack.push_back(p);
      }
    }
  }

  std::vector<std::vector<int>> neighbors(n);
  for (int u = 0; u < n; ++u) {
    for (int v : g.out(u)) {
      neighbors[u].push_back(v);
      neighbors[v].push_back(u);
    }
  }

  std::vector<int> path{x};
  std::vector<char> used(n, 0);
  used[x] = 1;
  bool connected = false;

  std::function<void()> dfs = [&]() {
    if (connected) return;
    const int cur = path.back();
    if (cur == y) {
      bool active = true;
      for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const int prev = path[i - 1], mid = path[i], next = path[i + 1];
        const bool collider = g.has_edge(prev, mid) && g.has_edge(next, mid);
        if (collider ? !anc_z[mid] : in_z[mid]) {
          active = false;
          break;
        }
      }
      if (active) connected = true;
      return;
    }
    for (int nxt : neighbors[cur]) {
      if (!used[nxt]) {
        used[nxt] = 1;
        path.push_back(nxt);
        dfs();
        path.pop_back();
        used[nxt] = 0;
      }
    }
  };
  dfs();
  return !connected;
}

/// Minimum-weight feedback arc set by permutation search: the optimum equals
/// the minimum over linear orders of the total backward weight.
inline double min_fas_weight_brute(const vista::WeightedDigraph& g) {
  const int n = g.node_count();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pos(n);
  do {
    for (int i = 0; i < n; ++i) pos[perm[i]] = i;
    double backward = 0.0;
    for (const auto& [edge, w] : g.weighted_edges()) {
      if (pos[edge.first] > pos[edge.second]) backward += w;
    }
    best = std::min(best, backward);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline vista::Digraph chain(int n) {
  vista::Digraph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

}  // namespace testutil
