#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dtac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Directed edge `from -> to`. In weight-matrix terms this is the entry
/// C(to, from).
struct Edge {
  int from = 0;
  int to = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple digraph on nodes [0, n). Edges are unique; self-loops are kept only
/// if added explicitly (generators never add them).
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int n);

  int size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Adds `from -> to`. Throws on out-of-range nodes or duplicates.
  void add_edge(int from, int to);
  bool has_edge(int from, int to) const;

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& in_neighbors(int i) const { return in_.at(i); }
  const std::vector<int>& out_neighbors(int j) const { return out_.at(j); }

  /// Out-degree of j, excluding a self-loop if one is present.
  int out_degree(int j) const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
  std::vector<std::uint8_t> adj_;  // n*n, row = from
};

/// Column-stochastic mixing matrix; entry (i, j) weights the link j -> i.
struct WeightMatrix {
  Matrix C;
  int size() const { return static_cast<int>(C.rows()); }
};

inline constexpr int kDefaultRetryBudget = 1000;

/// Directed Erdos-Renyi sample conditioned on strong connectivity. Attempt k
/// uses an independent stream derived from (seed, k).
DirectedGraph generate_erdos_renyi(int n, double p, std::uint64_t seed,
                                   int retry_budget = kDefaultRetryBudget);

/// Single unconditioned ER sample (may be disconnected).
DirectedGraph sample_erdos_renyi(int n, double p, std::uint64_t seed);

/// Node i links to (i + 2^j) mod n for j = 0..floor(log2(n-1)).
DirectedGraph generate_exponential_graph(int n);

bool is_strongly_connected(const DirectedGraph& g);

/// C(i,j) = C(j,j) = 1 / (1 + outdeg(j)) for every edge j -> i.
WeightMatrix build_column_stochastic_weights(const DirectedGraph& g);

/// Same weight rule without the connectivity precondition; used by the
/// B-connected switching mode.
WeightMatrix build_column_stochastic_weights_unchecked(const DirectedGraph& g);

/// Max over columns of |column sum - 1|.
double column_stochasticity_error(const Matrix& C);

/// Edge-list text: one `from to` pair per line, zero-indexed, `#` comments.
void write_edge_list(std::ostream& os, const DirectedGraph& g);
DirectedGraph read_edge_list(std::istream& is, int n_hint = 0);

}  // namespace dtac
