#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "test_util.hpp"
#include "vista/synth.hpp"

using vista::Digraph;

TEST_CASE("gen_er_dag forced edge and validation") {
  const auto g = vista::gen_er_dag(2, 1.0, 42);
  CHECK(g.edge_count() == 1);
  CHECK_THROWS_AS(vista::gen_er_dag(1, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(vista::gen_er_dag(10, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(vista::gen_er_dag(10, 9.5, 0), std::invalid_argument);
}

TEST_CASE("gen_er_dag mean edge count matches n*h/2") {
  // Binomial over C(n,2) pairs with theta = h/(n-1): expectation nh/2 = 150.
  double total = 0.0;
  for (int seed = 0; seed < 200; ++seed) {
    const auto g = vista::gen_er_dag(100, 3.0, 1000 + seed);
    CHECK(vista::is_acyclic(g));
    total += g.edge_count();
  }
  const double mean = total / 200.0;
  CHECK(mean > 135.0);
  CHECK(mean < 165.0);
}

TEST_CASE("gen_sf_dag base case and acyclicity") {
  const auto g = vista::gen_sf_dag(3, 1.0, 7);
  CHECK(g.edge_count() == 2);
  CHECK(vista::is_acyclic(g));
  for (int seed = 0; seed < 20; ++seed) {
    CHECK(vista::is_acyclic(vista::gen_sf_dag(40, 3.0, seed)));
  }
}

TEST_CASE("gen_sf_dag grows heavier degree tails than ER") {
  auto max_total_degree = [](const Digraph& g) {
    int best = 0;
    for (int v = 0; v < g.node_count(); ++v) {
      best = std::max(best, static_cast<int>(g.in(v).size() + g.out(v).size()));
    }
    return best;
  };
  std::vector<int> er_max, sf_max;
  for (int seed = 0; seed < 50; ++seed) {
    er_max.push_back(max_total_degree(vista::gen_er_dag(100, 3.0, 500 + seed)));
    sf_max.push_back(max_total_degree(vista::gen_sf_dag(100, 3.0, 900 + seed)));
  }
  std::sort(er_max.begin(), er_max.end());
  const int er_median = er_max[25];
  const int sf_peak = *std::max_element(sf_max.begin(), sf_max.end());
  CHECK(sf_peak > er_median);
}

TEST_CASE("sample_weights ranges") {
  const auto g = testutil::chain(4);

  const auto unit = vista::sample_weights(g, 1.0, 1.0, 3);
  for (const auto& [edge, w] : unit.weights) CHECK(std::abs(w) == 1.0);

  const auto scm = vista::sample_weights(g, 0.5, 2.0, 3);
  CHECK(scm.weights.size() == 3);
  for (const auto& [edge, w] : scm.weights) {
    CHECK(std::abs(w) >= 0.5);
    CHECK(std::abs(w) <= 2.0);
  }

  const auto empty = vista::sample_weights(Digraph(3), 0.5, 2.0, 3);
  CHECK(empty.weights.empty());

  CHECK_THROWS_AS(vista::sample_weights(g, 0.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(vista::sample_weights(g, 2.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("linear SEM: pure noise columns") {
  vista::WeightedScm scm;
  scm.graph = Digraph(3);
  scm.noise_scale = 1.0;
  const int N = 20000;
  const auto data = vista::sample_linear_sem(scm, N, 5);
  REQUIRE(data.rows() == N);
  REQUIRE(data.cols() == 3);
  const double bound = 4.0 / std::sqrt(static_cast<double>(N));
  for (int j = 0; j < 3; ++j) CHECK(std::abs(data.col(j).mean()) < bound);
}

TEST_CASE("linear SEM: chain variance") {
  // X1 = 2 X0 + eps: Var(X1) = 4 + 1 = 5.
  vista::WeightedScm scm;
  scm.graph = Digraph(2);
  scm.graph.add_edge(0, 1);
  scm.weights[{0, 1}] = 2.0;
  scm.noise_scale = 1.0;
  const int N = 100000;
  const auto data = vista::sample_linear_sem(scm, N, 11);
  const auto centered = data.col(1).array() - data.col(1).mean();
  const double var = centered.square().sum() / static_cast<double>(N - 1);
  CHECK(var == Catch::Approx(5.0).epsilon(0.10));
}

TEST_CASE("SEM sampling is deterministic in the seed") {
  const auto g = vista::gen_er_dag(8, 2.0, 21);
  const auto scm = vista::sample_weights(g, 0.5, 2.0, 22);
  const auto a = vista::sample_linear_sem(scm, 500, 23);
  const auto b = vista::sample_linear_sem(scm, 500, 23);
  CHECK(a == b);
  const auto qa = vista::sample_quadratic_sem(scm, 500, 23);
  const auto qb = vista::sample_quadratic_sem(scm, 500, 23);
  CHECK(qa == qb);
}

TEST_CASE("quadratic SEM: no-edge graph matches the linear case") {
  vista::WeightedScm scm;
  scm.graph = Digraph(2);
  const auto lin = vista::sample_linear_sem(scm, 100, 9);
  const auto quad = vista::sample_quadratic_sem(scm, 100, 9);
  CHECK(lin == quad);
}

TEST_CASE("quadratic SEM: child mean is E[X^2] = 1") {
  vista::WeightedScm scm;
  scm.graph = Digraph(2);
  scm.graph.add_edge(0, 1);
  scm.weights[{0, 1}] = 1.0;
  scm.noise_scale = 1.0;
  const int N = 100000;
  const auto data = vista::sample_quadratic_sem(scm, N, 13);
  CHECK(data.col(1).mean() == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("standardize") {
  vista::DataMatrix constant(5, 2);
  constant.col(0).setConstant(3.0);
  constant.col(1).setLinSpaced(5, 0.0, 1.0);
  CHECK_THROWS_AS(vista::standardize(constant), vista::ZeroVarianceError);

  vista::Rng rng(17);
  vista::DataMatrix data(200, 3);
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 3; ++j) data(i, j) = rng.normal(5.0, 2.0 + j);
  }
  const auto std1 = vista::standardize(data);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(std1.col(j).mean()) < 1e-12);
    const double sd = std::sqrt(std1.col(j).squaredNorm() / 199.0);
    CHECK(std::abs(sd - 1.0) < 1e-12);
  }
  const auto std2 = vista::standardize(std1);
  CHECK((std2 - std1).cwiseAbs().maxCoeff() < 1e-12);
}
