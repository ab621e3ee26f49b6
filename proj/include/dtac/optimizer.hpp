#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dtac/costs.hpp"
#include "dtac/delay.hpp"
#include "dtac/graph.hpp"

namespace dtac {

/// Mixing weights and link delays in force during one synchronous round.
struct Topology {
  DirectedGraph graph;
  WeightMatrix weights;
  DelayMap delays;
};

/// Supplies the topology for round k. Implementations must be deterministic.
class TopologySource {
 public:
  virtual ~TopologySource() = default;
  virtual const Topology& at(long long k) = 0;
  virtual int nodes() const = 0;
  virtual int tau_max() const = 0;
};

class StaticTopology final : public TopologySource {
 public:
  explicit StaticTopology(Topology t) : topo_(std::move(t)) {}
  const Topology& at(long long) override { return topo_; }
  int nodes() const override { return topo_.graph.size(); }
  int tau_max() const override { return topo_.delays.tau_max(); }

 private:
  Topology topo_;
};

/// Directed ER topology redrawn every `period` rounds together with a fresh
/// delay map. Epoch e uses graph stream (graph_seed, e) and delay stream
/// (delay_seed, e).
struct SwitchingSchedule {
  int period = 2;
  int n = 10;
  double p = 0.5;
  std::uint64_t graph_seed = 1;
  int tau_max = 0;
  DelayMode delay_mode = DelayMode::UniformRandom;
  std::uint64_t delay_seed = 1;
  /// false: epochs may be individually disconnected (B-connected mode);
  /// convergence is then not covered by the certified bound.
  bool require_strong = true;
};

class SwitchingTopology final : public TopologySource {
 public:
  explicit SwitchingTopology(SwitchingSchedule s);
  const Topology& at(long long k) override;
  int nodes() const override { return sched_.n; }
  int tau_max() const override { return sched_.tau_max; }
  Topology make_epoch(long long epoch) const;

 private:
  SwitchingSchedule sched_;
  long long epoch_ = -1;
  Topology current_;
};

Topology make_topology(DirectedGraph g, DelayMap d);

struct AgentState {
  Vector x;
  double y = 1.0;
  Vector z;
  Vector g;
  Vector grad_prev;
};

/// y = 1, x ~ N(0, I) from `seed`, z = x, g = grad f_i(z).
std::vector<AgentState> init_states(const GlobalProblem& problem, int n, std::uint64_t seed);

/// Sender-weighted payload travelling on one link.
struct Message {
  int from = 0;
  long long sent = 0;
  long long deliver_at = 0;
  Vector x;
  double y = 0.0;
  Vector g;
};

/// Messages in flight, per receiver. Delivery is exact: a message sent at
/// round k over a link with delay tau is consumed in round k + tau.
class InTransitBuffer {
 public:
  explicit InTransitBuffer(int n = 0) : pending_(n) {}
  void send(int to, Message m);
  /// Removes and returns messages due at round k, ordered by (from, sent).
  std::vector<Message> take_due(int to, long long k);
  double total_weight() const;
  Vector total_tracker(int dim) const;
  Vector total_numerator(int dim) const;
  /// Messages currently queued on link from -> to.
  int queued(int from, int to) const;
  std::size_t size() const;

 private:
  std::vector<std::vector<Message>> pending_;
};

enum class EngineKind { PerNode, AugmentedOracle, AddOptNoDelay };
std::string to_string(EngineKind e);
EngineKind engine_from_string(const std::string& s);

/// Common view over the three iteration engines.
class Engine {
 public:
  virtual ~Engine() = default;
  /// One synchronous round using the given topology.
  virtual void step(const Topology& topo) = 0;
  /// Current ratio estimates, one row per agent.
  virtual Matrix estimates() const = 0;
  /// First-block numerator, weight and tracker (one row per agent).
  virtual Matrix numerators() const = 0;
  virtual Vector weights() const = 0;
  virtual Matrix trackers() const = 0;
  /// Sum of all weight mass, including mass in flight.
  virtual double total_weight() const = 0;
  /// Sum of all tracker mass, including mass in flight.
  virtual Vector total_tracker() const = 0;
  /// sum_i grad f_i(z_i) at the current estimates.
  virtual Vector gradient_sum() const = 0;
  long long iteration() const { return k_; }

 protected:
  long long k_ = 0;
};

/// Per-node DTAC-ADDOPT: each agent mixes whatever has arrived on its links.
class PerNodeEngine final : public Engine {
 public:
  PerNodeEngine(const GlobalProblem& problem, std::vector<AgentState> init, double alpha, int tau_max);
  void step(const Topology& topo) override;
  Matrix estimates() const override;
  Matrix numerators() const override;
  Vector weights() const override;
  Matrix trackers() const override;
  double total_weight() const override;
  Vector total_tracker() const override;
  Vector gradient_sum() const override;
  const std::vector<AgentState>& states() const { return states_; }
  const InTransitBuffer& buffer() const { return buffer_; }

 private:
  const GlobalProblem& problem_;
  std::vector<AgentState> states_;
  InTransitBuffer buffer_;
  double alpha_;
  int tau_max_;
};

/// Matrix-form DTAC-ADDOPT on the stacked (augmented) state. The local
/// gradient step and gradient increments enter the first block only, so
/// the first block reproduces PerNodeEngine.
class AugmentedEngine final : public Engine {
 public:
  AugmentedEngine(const GlobalProblem& problem, const std::vector<AgentState>& init, double alpha, int tau_max);
  void step(const Topology& topo) override;
  void step(const AugmentedMatrix& aug);
  Matrix estimates() const override;
  Matrix numerators() const override { return xhat_.topRows(n_); }
  Vector weights() const override { return yhat_.head(n_); }
  Matrix trackers() const override { return ghat_.topRows(n_); }
  double total_weight() const override { return yhat_.sum(); }
  Vector total_tracker() const override { return ghat_.colwise().sum().transpose(); }
  Vector gradient_sum() const override { return grad_.colwise().sum().transpose(); }
  const Matrix& xhat() const { return xhat_; }
  const Vector& yhat() const { return yhat_; }
  const Matrix& ghat() const { return ghat_; }
  /// Stacked first-block gradient history (grad f_k; ...; grad f_{k-tau}).
  const Matrix& grad_stack() const { return grad_stack_; }

 private:
  const GlobalProblem& problem_;
  int n_, tau_max_;
  double alpha_;
  Matrix xhat_, ghat_;
  Vector yhat_;
  Matrix grad_;  // n x p, grad f_i at current estimates
  Matrix grad_stack_;
};

/// Delay-free ADD-OPT reference: x <- Cx - a g, y <- Cy, g <- Cg + df.
class AddOptEngine final : public Engine {
 public:
  AddOptEngine(const GlobalProblem& problem, std::vector<AgentState> init, double alpha);
  void step(const Topology& topo) override;
  Matrix estimates() const override;
  Matrix numerators() const override;
  Vector weights() const override;
  Matrix trackers() const override;
  double total_weight() const override;
  Vector total_tracker() const override;
  Vector gradient_sum() const override;
  const std::vector<AgentState>& states() const { return states_; }

 private:
  const GlobalProblem& problem_;
  std::vector<AgentState> states_;
  double alpha_;
};

std::unique_ptr<Engine> make_engine(EngineKind kind, const GlobalProblem& problem, std::vector<AgentState> init,
                                    double alpha, int tau_max);

struct RunConfig {
  double alpha = 0.005;
  long long max_iters = 20000;
  double tol = 1e-10;
  int record_every = 1;
  EngineKind engine = EngineKind::PerNode;
  double divergence_threshold = 1e12;
  std::uint64_t init_seed = 1;
};

struct TraceRecord {
  long long iter = 0;
  double optimality_gap = 0.0;
  double mse = 0.0;
  double consensus_error = 0.0;
  double grad_tracker_sum_error = 0.0;
  double mass_error = 0.0;
};

enum class RunStatus { Converged, Diverged, MaxIter };
std::string to_string(RunStatus s);

struct RunResult {
  RunStatus status = RunStatus::MaxIter;
  long long iters = 0;
  double final_gap = 0.0;
  double final_mse = 0.0;
  std::vector<TraceRecord> trace;
  /// Worst conservation errors over every iteration, recorded or not.
  double max_mass_error = 0.0;
  double max_tracker_error = 0.0;
  /// Same, restricted to iterations before the state left a bounded region
  /// (max |z| <= 1e6); meaningful for diverged runs.
  double max_tracker_error_bounded = 0.0;
  Matrix final_estimates;
  Vector z_bar;
};

/// Metrics for the engine's current state.
TraceRecord measure(const Engine& e, const GlobalProblem& problem);

/// Called after every round with the engine and its fresh metrics.
using RoundObserver = std::function<void(const Engine&, const TraceRecord&)>;

RunResult run(const RunConfig& cfg, TopologySource& topology, const GlobalProblem& problem,
              const RoundObserver& observer = {});

std::string status_line(const RunResult& r);

}  // namespace dtac
