#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"
#include "vista/graph.hpp"
#include "vista/markov_blanket.hpp"

using vista::Digraph;

TEST_CASE("is_acyclic basics") {
  Digraph empty(3);
  CHECK(vista::is_acyclic(empty));

  Digraph two_cycle(2);
  two_cycle.add_edge(0, 1);
  two_cycle.add_edge(1, 0);
  CHECK_FALSE(vista::is_acyclic(two_cycle));

  CHECK(vista::is_acyclic(testutil::chain(3)));
}

TEST_CASE("digraph rejects self loops and duplicates") {
  Digraph g(3);
  CHECK_THROWS_AS(g.add_edge(1, 1), std::invalid_argument);
  CHECK(g.add_edge(0, 1));
  CHECK_FALSE(g.add_edge(0, 1));
  CHECK(g.edge_count() == 1);
  CHECK_THROWS_AS(g.add_edge(0, 3), std::out_of_range);
}

TEST_CASE("topological_order basics") {
  CHECK(vista::topological_order(testutil::chain(3)) == std::vector<int>{0, 1, 2});

  Digraph pair(2);
  const auto order = vista::topological_order(pair);
  CHECK(order.size() == 2);
  CHECK(std::set<int>(order.begin(), order.end()) == std::set<int>{0, 1});

  Digraph two_cycle(2);
  two_cycle.add_edge(0, 1);
  two_cycle.add_edge(1, 0);
  CHECK_THROWS_AS(vista::topological_order(two_cycle), vista::CyclicGraphError);
}

TEST_CASE("topological_order succeeds iff is_acyclic") {
  vista::Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = testutil::random_digraph(6, 0.3, rng);
    bool ordered = true;
    try {
      const auto order = vista::topological_order(g);
      std::vector<int> pos(g.node_count());
      for (int i = 0; i < g.node_count(); ++i) pos[order[i]] = i;
      for (const auto& [u, v] : g.edges()) CHECK(pos[u] < pos[v]);
    } catch (const vista::CyclicGraphError&) {
      ordered = false;
    }
    CHECK(ordered == vista::is_acyclic(g));
  }
}

TEST_CASE("induced_subgraph cases") {
  const Digraph g = testutil::chain(3);

  const auto non_adjacent = vista::induced_subgraph(g, {0, 2});
  CHECK(non_adjacent.graph.edge_count() == 0);
  CHECK(non_adjacent.to_global == std::vector<int>{0, 2});

  const auto prefix = vista::induced_subgraph(g, {0, 1});
  CHECK(prefix.graph.edges() == std::vector<std::pair<int, int>>{{0, 1}});

  Digraph collider(3);
  collider.add_edge(0, 1);
  collider.add_edge(2, 1);
  const auto all = vista::induced_subgraph(collider, {0, 1, 2});
  CHECK(all.graph == collider);

  CHECK_THROWS_AS(vista::induced_subgraph(g, {0, 5}), std::out_of_range);
  CHECK(vista::induced_subgraph(g, {2}).to_local(2) == 0);
  CHECK_THROWS_AS(vista::induced_subgraph(g, {2}).to_local(0), std::out_of_range);
}

TEST_CASE("induced subgraph remaps to a sub-relation of the edges") {
  vista::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testutil::random_dag(9, 0.35, rng);
    std::vector<int> nodes;
    for (int v = 0; v < 9; ++v) {
      if (rng.bernoulli(0.5)) nodes.push_back(v);
    }
    if (nodes.empty()) nodes.push_back(0);
    const auto sub = vista::induced_subgraph(g, nodes);
    for (const auto& [a, b] : sub.graph.edges()) {
      CHECK(g.has_edge(sub.to_global[a], sub.to_global[b]));
    }
  }
}

TEST_CASE("edge_union basics") {
  Digraph a(3), b(3);
  a.add_edge(0, 1);
  b.add_edge(1, 2);
  CHECK(vista::edge_union({a, b}).edges() ==
        std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});

  Digraph dup(3);
  dup.add_edge(0, 1);
  CHECK(vista::edge_union({a, dup}).edge_count() == 1);

  Digraph wrong(4);
  CHECK_THROWS_AS(vista::edge_union({a, wrong}), std::invalid_argument);
}

TEST_CASE("oracle-MB subgraph union reproduces the DAG exactly") {
  // Coverage plus the converse: induced subgraphs of the truth contain only
  // true edges, so the union equals the edge set.
  vista::Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform_int(0, 8));
    const auto g = testutil::random_dag(n, 0.3, rng);
    std::vector<Digraph> lifted;
    for (int v = 0; v < n; ++v) {
      auto nodes = vista::oracle_mb(g, v).members;
      nodes.push_back(v);
      const auto sub = vista::induced_subgraph(g, nodes);
      Digraph global(n);
      for (const auto& [a, b] : sub.graph.edges()) {
        global.add_edge(sub.to_global[a], sub.to_global[b]);
      }
      lifted.push_back(std::move(global));
    }
    CHECK(vista::edge_union(lifted) == g);
  }
}
