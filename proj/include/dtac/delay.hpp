#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dtac/graph.hpp"

namespace dtac {

enum class DelayMode { UniformRandom, HomogeneousMax, Zero };

/// Fixed integer delay per link, 0 <= tau <= tau_max. Self-loops are never
/// delayed. Non-edges report -1.
class DelayMap {
 public:
  DelayMap() = default;
  DelayMap(const DirectedGraph& g, int tau_max);

  int size() const noexcept { return n_; }
  int tau_max() const noexcept { return tau_max_; }

  /// Delay on link from -> to; 0 for from == to, -1 for non-edges.
  int delay(int from, int to) const;
  void set_delay(int from, int to, int tau);
  bool has_link(int from, int to) const { return from == to || delay(from, to) >= 0; }

  /// Links carrying a delay (excludes self-loops).
  std::vector<Edge> links() const;

 private:
  int n_ = 0;
  int tau_max_ = 0;
  std::vector<int> tau_;  // n*n, row = from
};

DelayMap assign_delays(const DirectedGraph& g, int tau_max, DelayMode mode, std::uint64_t seed);

/// 1 iff the link delay equals r. The time argument is accepted for
/// interface parity with time-indexed formulations and ignored: delays are
/// time-invariant here.
int indicator(const DelayMap& d, Edge link, int r, long long k = 0);

/// C_0..C_tau_max: each off-diagonal weight lands in the slice matching its
/// link delay; the diagonal stays in C_0.
struct DelaySlices {
  std::vector<Matrix> slices;
  int tau_max() const { return static_cast<int>(slices.size()) - 1; }
  int size() const { return slices.empty() ? 0 : static_cast<int>(slices.front().rows()); }
};

DelaySlices build_delay_slices(const Matrix& C, const DelayMap& d);

enum class SliceCheck { ColumnStochastic, Any };

/// Block matrix of dimension n(tau_max+1): block column 0 holds C_0..C_tau
/// stacked, block (r, r+1) is the identity, everything else is zero.
struct AugmentedMatrix {
  Matrix Cbar;
  int n = 0;
  int tau_max = 0;
  int dim() const { return static_cast<int>(Cbar.rows()); }
};

AugmentedMatrix build_augmented_matrix(const DelaySlices& slices, int n,
                                       SliceCheck check = SliceCheck::ColumnStochastic);

/// Convenience: slices + augmentation in one go.
AugmentedMatrix augment(const Matrix& C, const DelayMap& d, SliceCheck check = SliceCheck::ColumnStochastic);

/// Edge-list text with delays: `from to tau` per line.
void write_delay_list(std::ostream& os, const DelayMap& d);

struct GraphWithDelays {
  DirectedGraph graph;
  DelayMap delays;
};
GraphWithDelays read_delay_list(std::istream& is);

}  // namespace dtac
