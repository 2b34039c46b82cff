#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"
#include "vista/fas.hpp"

using vista::Digraph;
using vista::WeightedDigraph;

namespace {

int backward_count(const WeightedDigraph& g, const std::vector<int>& order) {
  std::vector<int> pos(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) pos[order[i]] = i;
  int count = 0;
  for (const auto& [edge, w] : g.weighted_edges()) {
    if (pos[edge.first] > pos[edge.second]) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("greedy_order on a DAG admits zero backward edges") {
  vista::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto dag = testutil::random_dag(10, 0.3, rng);
    WeightedDigraph g(10);
    for (const auto& [u, v] : dag.edges()) g.set_edge(u, v, rng.uniform(0.1, 1.0));
    CHECK(backward_count(g, vista::greedy_order(g)) == 0);
  }
}

TEST_CASE("greedy_order on small cycles") {
  WeightedDigraph two(2);
  two.set_edge(0, 1, 0.8);
  two.set_edge(1, 0, 0.3);
  CHECK(backward_count(two, vista::greedy_order(two)) == 1);

  WeightedDigraph three(3);
  three.set_edge(0, 1, 0.5);
  three.set_edge(1, 2, 0.5);
  three.set_edge(2, 0, 0.5);
  CHECK(backward_count(three, vista::greedy_order(three)) == 1);
}

TEST_CASE("break_cycles is the identity on DAGs") {
  vista::Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto dag = testutil::random_dag(8, 0.4, rng);
    WeightedDigraph g(8);
    for (const auto& [u, v] : dag.edges()) g.set_edge(u, v, rng.uniform(0.1, 1.0));
    const auto result = vista::break_cycles(g);
    CHECK(result.removed_edges.empty());
    CHECK(result.dag == g.structure());
  }
}

TEST_CASE("break_cycles removes the lighter edge of a 2-cycle") {
  WeightedDigraph g(2);
  g.set_edge(0, 1, 0.8);
  g.set_edge(1, 0, 0.3);
  const auto result = vista::break_cycles(g);
  REQUIRE(result.removed_edges.size() == 1);
  CHECK(result.removed_edges[0] == std::tuple<int, int, double>{1, 0, 0.3});
  CHECK(result.dag.has_edge(0, 1));
  CHECK_FALSE(result.dag.has_edge(1, 0));
}

TEST_CASE("break_cycles on two disjoint 2-cycles") {
  WeightedDigraph g(4);
  g.set_edge(0, 1, 0.9);
  g.set_edge(1, 0, 0.2);
  g.set_edge(2, 3, 0.7);
  g.set_edge(3, 2, 0.4);
  const auto result = vista::break_cycles(g);
  REQUIRE(result.removed_edges.size() == 2);
  std::set<std::pair<int, int>> removed;
  for (const auto& [u, v, w] : result.removed_edges) removed.insert({u, v});
  CHECK(removed == std::set<std::pair<int, int>>{{1, 0}, {3, 2}});
}

TEST_CASE("break_cycles output is always acyclic, never beats the optimum") {
  vista::Rng rng(9);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 3));
    auto g = testutil::random_weighted_digraph(n, 0.45, rng);
    const auto result = vista::break_cycles(g);
    CHECK(vista::is_acyclic(result.dag));

    double removed_weight = 0.0;
    for (const auto& [u, v, w] : result.removed_edges) removed_weight += w;

    // Removed set is a subset of backward edges under the greedy order.
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[result.order[i]] = i;
    double backward_weight = 0.0;
    for (const auto& [edge, w] : g.weighted_edges()) {
      if (pos[edge.first] > pos[edge.second]) backward_weight += w;
    }
    CHECK(removed_weight <= backward_weight + 1e-12);

    if (n <= 6) {
      CHECK(removed_weight >= testutil::min_fas_weight_brute(g) - 1e-9);
    }
  }
}
