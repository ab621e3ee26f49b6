#include "dtac/delay.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dtac/error.hpp"
#include "dtac/rng.hpp"

namespace dtac {

DelayMap::DelayMap(const DirectedGraph& g, int tau_max)
    : n_(g.size()), tau_max_(tau_max), tau_(static_cast<std::size_t>(g.size()) * g.size(), -1) {
  require(tau_max >= 0, "delays: tau_max must be >= 0");
  for (const auto& e : g.edges())
    if (e.from != e.to) tau_[static_cast<std::size_t>(e.from) * n_ + e.to] = 0;
}

int DelayMap::delay(int from, int to) const {
  require(from >= 0 && from < n_ && to >= 0 && to < n_, "delays: node out of range");
  if (from == to) return 0;
  return tau_[static_cast<std::size_t>(from) * n_ + to];
}

void DelayMap::set_delay(int from, int to, int tau) {
  require(from != to, "delays: self-loops are never delayed");
  require(tau >= 0 && tau <= tau_max_, "delays: delay " + std::to_string(tau) + " outside [0, tau_max]");
  auto& cell = tau_.at(static_cast<std::size_t>(from) * n_ + to);
  require(cell >= 0, "delays: " + std::to_string(from) + " -> " + std::to_string(to) + " is not a link");
  cell = tau;
}

std::vector<Edge> DelayMap::links() const {
  std::vector<Edge> out;
  for (int from = 0; from < n_; ++from)
    for (int to = 0; to < n_; ++to)
      if (from != to && tau_[static_cast<std::size_t>(from) * n_ + to] >= 0) out.push_back({from, to});
  return out;
}

DelayMap assign_delays(const DirectedGraph& g, int tau_max, DelayMode mode, std::uint64_t seed) {
  DelayMap d(g, tau_max);
  if (tau_max == 0 || mode == DelayMode::Zero) return d;
  auto rng = make_rng(seed);
  std::uniform_int_distribution<int> pick(0, tau_max);
  for (const auto& e : g.edges()) {
    if (e.from == e.to) continue;
    d.set_delay(e.from, e.to, mode == DelayMode::HomogeneousMax ? tau_max : pick(rng));
  }
  return d;
}

int indicator(const DelayMap& d, Edge link, int r, long long /*k*/) {
  require(d.has_link(link.from, link.to), "indicator: not a link");
  require(r >= 0 && r <= d.tau_max(), "indicator: r outside [0, tau_max]");
  return d.delay(link.from, link.to) == r ? 1 : 0;
}

DelaySlices build_delay_slices(const Matrix& C, const DelayMap& d) {
  const int n = static_cast<int>(C.rows());
  require(C.cols() == n, "slices: weight matrix must be square");
  require(d.size() == n, "slices: delay map and weight matrix sizes differ");
  DelaySlices out;
  out.slices.assign(d.tau_max() + 1, Matrix::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = C(i, j);
      if (i == j) {
        out.slices[0](i, i) = w;
        continue;
      }
      const int tau = d.delay(j, i);
      if (w != 0.0 && tau < 0)
        fail(ErrorCode::InvalidArgument, "slices: weight on " + std::to_string(j) + " -> " + std::to_string(i) +
                                             " has no delay entry");
      if (w == 0.0 && tau >= 0)
        fail(ErrorCode::InvalidArgument, "slices: delay on " + std::to_string(j) + " -> " + std::to_string(i) +
                                             " but no weight");
      if (tau >= 0) out.slices[tau](i, j) = w;
    }
  }
  return out;
}

AugmentedMatrix build_augmented_matrix(const DelaySlices& slices, int n, SliceCheck check) {
  require(!slices.slices.empty(), "augment: no slices");
  require(slices.size() == n, "augment: slice size does not match n");
  const int tau = slices.tau_max();
  if (check == SliceCheck::ColumnStochastic) {
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& s : slices.slices) sum += s;
    if (column_stochasticity_error(sum) > 1e-12)
      fail(ErrorCode::InvalidArgument, "augment: slices do not sum to a column-stochastic matrix");
  }
  AugmentedMatrix a;
  a.n = n;
  a.tau_max = tau;
  a.Cbar = Matrix::Zero(n * (tau + 1), n * (tau + 1));
  for (int r = 0; r <= tau; ++r) {
    a.Cbar.block(r * n, 0, n, n) = slices.slices[r];
    if (r < tau) a.Cbar.block(r * n, (r + 1) * n, n, n).setIdentity();
  }
  return a;
}

AugmentedMatrix augment(const Matrix& C, const DelayMap& d, SliceCheck check) {
  return build_augmented_matrix(build_delay_slices(C, d), static_cast<int>(C.rows()), check);
}

void write_delay_list(std::ostream& os, const DelayMap& d) {
  os << "# n=" << d.size() << " tau_max=" << d.tau_max() << "\n";
  for (const auto& e : d.links()) os << e.from << ' ' << e.to << ' ' << d.delay(e.from, e.to) << '\n';
}

GraphWithDelays read_delay_list(std::istream& is) {
  struct Row {
    int from, to, tau;
  };
  std::vector<Row> rows;
  int n = 0, tau_max = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.rfind('#', 0) == 0) {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        if (tok.rfind("n=", 0) == 0) n = std::max(n, std::stoi(tok.substr(2)));
        if (tok.rfind("tau_max=", 0) == 0) tau_max = std::max(tau_max, std::stoi(tok.substr(8)));
      }
      continue;
    }
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Row r{};
    if (!(ls >> r.from >> r.to >> r.tau) || r.from < 0 || r.to < 0 || r.tau < 0)
      fail(ErrorCode::Config, "delay list line " + std::to_string(lineno) + ": expected `from to tau`");
    rows.push_back(r);
    n = std::max(n, std::max(r.from, r.to) + 1);
    tau_max = std::max(tau_max, r.tau);
  }
  GraphWithDelays out{DirectedGraph(n), {}};
  for (const auto& r : rows)
    if (r.from != r.to) out.graph.add_edge(r.from, r.to);
  out.delays = DelayMap(out.graph, tau_max);
  for (const auto& r : rows)
    if (r.from != r.to) out.delays.set_delay(r.from, r.to, r.tau);
  return out;
}

}  // namespace dtac
