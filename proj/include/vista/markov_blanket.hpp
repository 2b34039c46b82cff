#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vista/ci.hpp"
#include "vista/graph.hpp"
#include "vista/parallel.hpp"

namespace vista {

struct MarkovBlanket {
  int target = 0;
  std::vector<int> members;  // sorted, never contains target

  bool contains(int v) const {
    return std::binary_search(members.begin(), members.end(), v);
  }
};

class MbEstimationError : public std::runtime_error {
 public:
  MbEstimationError(std::string message, std::vector<int> nodes)
      : std::runtime_error(std::move(message)), failed_nodes(std::move(nodes)) {}
  std::vector<int> failed_nodes;
};

/// d-separation by reachability over active trails (Bayes-ball style).
/// True iff every path between x and y is blocked given z.
inline bool d_separated(const Digraph& g, int x, int y, const std::vector<int>& z) {
  g.check_node(x);
  g.check_node(y);
  if (x == y) throw std::invalid_argument("d_separated: x == y");
  if (!is_acyclic(g)) throw CyclicGraphError("d_separated: input graph is cyclic");
  const int n = g.node_count();
  std::vector<char> in_z(n, 0);
  for (int v : z) {
    g.check_node(v);
    if (v == x || v == y) throw std::invalid_argument("d_separated: x or y in Z");
    in_z[v] = 1;
  }

  // Ancestors of Z (including Z): colliders on a path are active only when
  // they or a descendant are conditioned on.
  std::vector<char> anc_z(n, 0);
  {
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
  }

  // State: (node, direction of arrival); up = from a child, down = from a parent.
  constexpr int kUp = 0, kDown = 1;
  std::vector<std::array<char, 2>> visited(n, {0, 0});
  std::vector<std::pair<int, int>> stack{{x, kUp}};
  while (!stack.empty()) {
    const auto [v, dir] = stack.back();
    stack.pop_back();
    if (visited[v][dir]) continue;
    visited[v][dir] = 1;
    if (!in_z[v] && v == y) return false;

    if (dir == kUp) {
      if (!in_z[v]) {
        for (int p : g.in(v)) stack.push_back({p, kUp});
        for (int c : g.out(v)) stack.push_back({c, kDown});
      }
    } else {
      if (!in_z[v]) {
        for (int c : g.out(v)) stack.push_back({c, kDown});
      }
      if (anc_z[v]) {
        for (int p : g.in(v)) stack.push_back({p, kUp});
      }
    }
  }
  return true;
}

/// Parents, children, and spouses (other parents of children).
inline MarkovBlanket oracle_mb(const Digraph& g, int v) {
  g.check_node(v);
  if (!is_acyclic(g)) throw CyclicGraphError("oracle_mb: input graph is cyclic");
  std::set<int> members;
  for (int p : g.in(v)) members.insert(p);
  for (int c : g.out(v)) {
    members.insert(c);
    for (int spouse : g.in(c)) {
      if (spouse != v) members.insert(spouse);
    }
  }
  MarkovBlanket mb;
  mb.target = v;
  mb.members.assign(members.begin(), members.end());
  return mb;
}

/// Grow-Shrink with deterministic ascending-id candidate order.
/// Grow: add u when NOT ci(v, u, S), repeating passes until none is added.
/// Shrink: remove u when ci(v, u, S \ {u}), repeating until stable.
inline MarkovBlanket grow_shrink_mb(const CiPredicate& ci, int n, int v) {
  if (v < 0 || v >= n) throw std::out_of_range("grow_shrink_mb: target out of range");
  std::set<int> s;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int u = 0; u < n; ++u) {
      if (u == v || s.count(u)) continue;
      std::vector<int> cond(s.begin(), s.end());
      if (!ci(v, u, cond)) {
        s.insert(u);
        changed = true;
      }
    }
  }
  changed = true;
  while (changed) {
    changed = false;
    for (auto it = s.begin(); it != s.end();) {
      const int u = *it;
      std::vector<int> cond;
      cond.reserve(s.size() - 1);
      for (int w : s) {
        if (w != u) cond.push_back(w);
      }
      if (ci(v, u, cond)) {
        it = s.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  MarkovBlanket mb;
  mb.target = v;
  mb.members.assign(s.begin(), s.end());
  return mb;
}

/// Runs the estimator for every node, optionally in parallel; results land in
/// disjoint slots so the output is schedule-independent. Per-node failures are
/// collected and reported together with their node ids.
inline std::vector<MarkovBlanket> all_markov_blankets(
    const std::function<MarkovBlanket(int)>& estimator, int n, int jobs = 1) {
  std::vector<MarkovBlanket> blankets(static_cast<std::size_t>(std::max(n, 0)));
  std::vector<std::string> errors(blankets.size());
  std::vector<char> failed(blankets.size(), 0);
  parallel_for(n, jobs, [&](int v) {
    try {
      blankets[v] = estimator(v);
    } catch (const std::exception& e) {
      failed[v] = 1;
      errors[v] = e.what();
    }
  });
  std::vector<int> failed_nodes;
  std::string message = "all_markov_blankets: estimator failed for nodes";
  for (int v = 0; v < n; ++v) {
    if (failed[v]) {
      failed_nodes.push_back(v);
      message += " " + std::to_string(v) + " (" + errors[v] + ")";
    }
  }
  if (!failed_nodes.empty()) throw MbEstimationError(message, failed_nodes);
  return blankets;
}

/// Optional OR-symmetrization: u in MB(v) forces v in MB(u). Off by default;
/// vote counts depend on membership, so this is an explicit opt-in.
inline void symmetrize_or(std::vector<MarkovBlanket>& blankets) {
  const int n = static_cast<int>(blankets.size());
  std::vector<std::set<int>> members(n);
  for (int v = 0; v < n; ++v) members[v].insert(blankets[v].members.begin(), blankets[v].members.end());
  for (int v = 0; v < n; ++v) {
    for (int u : blankets[v].members) {
      if (u >= 0 && u < n) members[u].insert(v);
    }
  }
  for (int v = 0; v < n; ++v) {
    blankets[v].members.assign(members[v].begin(), members[v].end());
  }
}

}  // namespace vista
