#include <doctest.h>

#include <sstream>

#include "../support/oracles.hpp"
#include "dtac/error.hpp"
#include "dtac/graph.hpp"

using namespace dtac;

namespace {

std::vector<std::pair<int, int>> pairs(const DirectedGraph& g) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : g.edges()) out.emplace_back(e.from, e.to);
  return out;
}

DirectedGraph cycle(int n) {
  DirectedGraph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

}  // namespace

TEST_CASE("erdos-renyi with p = 1 is the complete digraph") {
  const auto g = generate_erdos_renyi(2, 1.0, 99);
  CHECK(g.edge_count() == 2);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK(is_strongly_connected(g));
}

TEST_CASE("erdos-renyi sample for n=10, p=0.5, seed=7 is strongly connected") {
  const auto g = generate_erdos_renyi(10, 0.5, 7);
  CHECK(g.size() == 10);
  CHECK(is_strongly_connected(g));
  CHECK(oracle::strongly_connected(10, pairs(g)));
  for (const auto& e : g.edges()) CHECK(e.from != e.to);
}

TEST_CASE("erdos-renyi is deterministic per seed") {
  CHECK(pairs(generate_erdos_renyi(12, 0.3, 5)) == pairs(generate_erdos_renyi(12, 0.3, 5)));
  CHECK(pairs(generate_erdos_renyi(12, 0.3, 5)) != pairs(generate_erdos_renyi(12, 0.3, 6)));
}

TEST_CASE("erdos-renyi gives up after the retry budget") {
  try {
    generate_erdos_renyi(3, 1e-9, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  CHECK_THROWS_AS(generate_erdos_renyi(3, 0.0, 1), Error);
  CHECK_THROWS_AS(generate_erdos_renyi(3, 1.5, 1), Error);
}

TEST_CASE("exponential graph hop structure") {
  const auto g2 = generate_exponential_graph(2);
  CHECK(g2.edge_count() == 2);
  CHECK(g2.has_edge(0, 1));
  CHECK(g2.has_edge(1, 0));

  const auto g4 = generate_exponential_graph(4);
  for (int i = 0; i < 4; ++i) {
    CHECK(g4.out_degree(i) == 2);
    CHECK(g4.has_edge(i, (i + 1) % 4));
    CHECK(g4.has_edge(i, (i + 2) % 4));
  }

  const auto g16 = generate_exponential_graph(16);
  for (int i = 0; i < 16; ++i) {
    CHECK(g16.out_degree(i) == 4);
    for (int hop : {1, 2, 4, 8}) CHECK(g16.has_edge(i, (i + hop) % 16));
  }
  CHECK(is_strongly_connected(g16));
}

TEST_CASE("strong connectivity examples") {
  CHECK(is_strongly_connected(cycle(3)));
  DirectedGraph path(3);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  CHECK_FALSE(is_strongly_connected(path));
  DirectedGraph k5(5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) k5.add_edge(i, j);
  CHECK(is_strongly_connected(k5));
}

TEST_CASE("strong connectivity agrees with transitive closure on random digraphs") {
  int connected = 0;
  for (std::uint64_t s = 0; s < 300; ++s) {
    const int n = 2 + static_cast<int>(s % 9);
    const auto g = sample_erdos_renyi(n, 0.15 + 0.1 * static_cast<double>(s % 5), s);
    const bool lib = is_strongly_connected(g);
    CHECK(lib == oracle::strongly_connected(n, pairs(g)));
    connected += lib;
  }
  CHECK(connected > 20);
  CHECK(connected < 280);
}

TEST_CASE("column-stochastic weights: worked examples") {
  DirectedGraph k2(2);
  k2.add_edge(0, 1);
  k2.add_edge(1, 0);
  const auto W = build_column_stochastic_weights(k2);
  Matrix expect(2, 2);
  expect << 0.5, 0.5, 0.5, 0.5;
  CHECK(W.C == expect);

  const auto C3 = build_column_stochastic_weights(cycle(3)).C;
  for (int j = 0; j < 3; ++j) {
    CHECK(C3(j, j) == 0.5);
    CHECK(C3((j + 1) % 3, j) == 0.5);
    CHECK(C3((j + 2) % 3, j) == 0.0);
  }
}

TEST_CASE("column-stochastic weights: rule and column sums on random graphs") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto g = generate_erdos_renyi(3 + static_cast<int>(s % 10), 0.4, s);
    const auto C = build_column_stochastic_weights(g).C;
    for (int j = 0; j < g.size(); ++j) {
      const double w = 1.0 / (1.0 + g.out_degree(j));
      CHECK(C(j, j) == w);
      for (int i = 0; i < g.size(); ++i)
        if (i != j) CHECK(C(i, j) == (g.has_edge(j, i) ? w : 0.0));
    }
    CHECK(column_stochasticity_error(C) < 1e-15);
  }
}

TEST_CASE("weights reject single nodes and disconnected graphs") {
  CHECK_THROWS_AS(build_column_stochastic_weights(DirectedGraph(1)), Error);
  DirectedGraph path(3);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  CHECK_THROWS_WITH_AS(build_column_stochastic_weights(path), doctest::Contains("strongly connected"), Error);
  CHECK_NOTHROW(build_column_stochastic_weights_unchecked(path));
}

TEST_CASE("digraph bookkeeping") {
  DirectedGraph g(4);
  g.add_edge(0, 1);
  g.add_edge(2, 1);
  g.add_edge(1, 3);
  CHECK(g.in_neighbors(1) == std::vector<int>{0, 2});
  CHECK(g.out_neighbors(1) == std::vector<int>{3});
  CHECK(g.out_degree(0) == 1);
  CHECK_THROWS_AS(g.add_edge(0, 1), Error);
  CHECK_THROWS_AS(g.add_edge(0, 4), Error);
}

TEST_CASE("edge list round trip") {
  const auto g = generate_erdos_renyi(9, 0.4, 3);
  std::stringstream ss;
  write_edge_list(ss, g);
  const auto h = read_edge_list(ss);
  CHECK(h.size() == g.size());
  CHECK(pairs(h) == pairs(g));

  std::stringstream bad("# n=3\n0 1\n1 x\n");
  CHECK_THROWS_WITH_AS(read_edge_list(bad), doctest::Contains("line 3"), Error);
}
