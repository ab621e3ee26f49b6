#include "dtac/graph.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dtac/error.hpp"
#include "dtac/rng.hpp"

namespace dtac {

DirectedGraph::DirectedGraph(int n) : n_(n), in_(n), out_(n), adj_(static_cast<std::size_t>(n) * n, 0) {
  require(n >= 0, "graph: negative node count");
}

void DirectedGraph::add_edge(int from, int to) {
  require(from >= 0 && from < n_ && to >= 0 && to < n_,
          "graph: edge " + std::to_string(from) + " -> " + std::to_string(to) + " out of range");
  auto& cell = adj_[static_cast<std::size_t>(from) * n_ + to];
  require(cell == 0, "graph: duplicate edge " + std::to_string(from) + " -> " + std::to_string(to));
  cell = 1;
  edges_.push_back({from, to});
  in_[to].push_back(from);
  out_[from].push_back(to);
}

bool DirectedGraph::has_edge(int from, int to) const {
  if (from < 0 || from >= n_ || to < 0 || to >= n_) return false;
  return adj_[static_cast<std::size_t>(from) * n_ + to] != 0;
}

int DirectedGraph::out_degree(int j) const {
  int d = static_cast<int>(out_.at(j).size());
  return has_edge(j, j) ? d - 1 : d;
}

DirectedGraph sample_erdos_renyi(int n, double p, std::uint64_t seed) {
  require(n >= 2, "erdos_renyi: n must be >= 2");
  require(p > 0.0 && p <= 1.0, "erdos_renyi: p must lie in (0, 1]");
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DirectedGraph g(n);
  for (int from = 0; from < n; ++from)
    for (int to = 0; to < n; ++to)
      if (from != to && unif(rng) < p) g.add_edge(from, to);
  return g;
}

DirectedGraph generate_erdos_renyi(int n, double p, std::uint64_t seed, int retry_budget) {
  require(n >= 2, "erdos_renyi: n must be >= 2");
  require(p > 0.0 && p <= 1.0, "erdos_renyi: p must lie in (0, 1]");
  for (int attempt = 0; attempt < retry_budget; ++attempt) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(attempt));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DirectedGraph g(n);
    for (int from = 0; from < n; ++from)
      for (int to = 0; to < n; ++to)
        if (from != to && unif(rng) < p) g.add_edge(from, to);
    if (is_strongly_connected(g)) return g;
  }
  std::ostringstream msg;
  msg << "erdos_renyi: no strongly connected sample in " << retry_budget << " attempts (n=" << n
      << ", p=" << p << "); p is too small for n";
  fail(ErrorCode::InvalidArgument, msg.str());
}

DirectedGraph generate_exponential_graph(int n) {
  require(n >= 2, "exponential graph: n must be >= 2");
  DirectedGraph g(n);
  const int max_pow = static_cast<int>(std::floor(std::log2(static_cast<double>(n - 1))));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= max_pow; ++j) g.add_edge(i, (i + (1 << j)) % n);
  return g;
}

namespace {

// Nodes reachable from `start` following either out-edges or in-edges.
std::vector<char> reach(const DirectedGraph& g, int start, bool forward) {
  std::vector<char> seen(g.size(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    const auto& nbrs = forward ? g.out_neighbors(u) : g.in_neighbors(u);
    for (int v : nbrs)
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const DirectedGraph& g) {
  if (g.size() == 0) return false;
  for (bool forward : {true, false})
    for (char s : reach(g, 0, forward))
      if (!s) return false;
  return true;
}

WeightMatrix build_column_stochastic_weights_unchecked(const DirectedGraph& g) {
  const int n = g.size();
  WeightMatrix w{Matrix::Zero(n, n)};
  for (int j = 0; j < n; ++j) {
    const double weight = 1.0 / (1.0 + g.out_degree(j));
    w.C(j, j) = weight;
    for (int i : g.out_neighbors(j)) w.C(i, j) = weight;
  }
  return w;
}

WeightMatrix build_column_stochastic_weights(const DirectedGraph& g) {
  require(g.size() >= 2, "weights: graph needs at least 2 nodes");
  require(is_strongly_connected(g), "weights: graph is not strongly connected");
  return build_column_stochastic_weights_unchecked(g);
}

double column_stochasticity_error(const Matrix& C) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < C.cols(); ++j) worst = std::max(worst, std::abs(C.col(j).sum() - 1.0));
  return worst;
}

void write_edge_list(std::ostream& os, const DirectedGraph& g) {
  os << "# n=" << g.size() << "\n";
  for (const auto& e : g.edges()) os << e.from << ' ' << e.to << '\n';
}

DirectedGraph read_edge_list(std::istream& is, int n_hint) {
  std::vector<Edge> edges;
  int n = n_hint;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto pos = line.find("n="); line.rfind('#', 0) == 0 && pos != std::string::npos) {
      n = std::max(n, std::stoi(line.substr(pos + 2)));
      continue;
    }
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    int from = 0, to = 0;
    if (!(ls >> from >> to)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      fail(ErrorCode::Config, "edge list line " + std::to_string(lineno) + ": expected `from to`");
    }
    edges.push_back({from, to});
    n = std::max(n, std::max(from, to) + 1);
  }
  DirectedGraph g(n);
  for (const auto& e : edges) g.add_edge(e.from, e.to);
  return g;
}

}  // namespace dtac
