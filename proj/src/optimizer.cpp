#include "dtac/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtac/error.hpp"
#include "dtac/rng.hpp"

namespace dtac {

namespace {

// Both the per-node and the ADD-OPT engines build every weighted term this
// way so that zero-delay runs agree bit for bit.
Vector weighted(double w, const Vector& v) {
  Vector out = w * v;
  return out;
}

double checked_weight(double y, int node) {
  if (!(y > 0.0) || !std::isfinite(y))
    fail(ErrorCode::Engine, "engine: non-positive weight at node " + std::to_string(node));
  return y;
}

std::uint64_t epoch_seed(std::uint64_t seed, long long epoch) {
  // splitmix64 finalizer over (seed, epoch)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(epoch + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

// --- topology --------------------------------------------------------------

Topology make_topology(DirectedGraph g, DelayMap d) {
  require(g.size() == d.size(), "topology: graph and delay map sizes differ");
  auto w = build_column_stochastic_weights(g);
  return {std::move(g), std::move(w), std::move(d)};
}

SwitchingTopology::SwitchingTopology(SwitchingSchedule s) : sched_(s) {
  require(sched_.period >= 1, "switching: period must be >= 1");
}

Topology SwitchingTopology::make_epoch(long long epoch) const {
  const auto gseed = epoch_seed(sched_.graph_seed, epoch);
  DirectedGraph g = sched_.require_strong ? generate_erdos_renyi(sched_.n, sched_.p, gseed)
                                          : sample_erdos_renyi(sched_.n, sched_.p, gseed);
  DelayMap d = assign_delays(g, sched_.tau_max, sched_.delay_mode, epoch_seed(sched_.delay_seed, epoch));
  WeightMatrix w = sched_.require_strong ? build_column_stochastic_weights(g)
                                         : build_column_stochastic_weights_unchecked(g);
  return {std::move(g), std::move(w), std::move(d)};
}

const Topology& SwitchingTopology::at(long long k) {
  const long long epoch = k / sched_.period;
  if (epoch != epoch_) {
    current_ = make_epoch(epoch);
    epoch_ = epoch;
  }
  return current_;
}

// --- initial states --------------------------------------------------------

std::vector<AgentState> init_states(const GlobalProblem& problem, int n, std::uint64_t seed) {
  require(problem.agents() == n, "init_states: problem has " + std::to_string(problem.agents()) +
                                     " agents, network has " + std::to_string(n));
  auto rng = make_rng(seed, 0x1417);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<AgentState> out(n);
  for (int i = 0; i < n; ++i) {
    auto& s = out[i];
    s.x.resize(problem.dim());
    for (int k = 0; k < problem.dim(); ++k) s.x(k) = normal(rng);
    s.y = 1.0;
    s.z = s.x / s.y;
    s.g = problem.locals[i]->gradient(s.z);
    s.grad_prev = s.g;
  }
  return out;
}

// --- in-transit buffer -----------------------------------------------------

void InTransitBuffer::send(int to, Message m) { pending_.at(to).push_back(std::move(m)); }

std::vector<Message> InTransitBuffer::take_due(int to, long long k) {
  auto& q = pending_.at(to);
  std::vector<Message> due;
  auto it = std::stable_partition(q.begin(), q.end(), [k](const Message& m) { return m.deliver_at != k; });
  std::move(it, q.end(), std::back_inserter(due));
  q.erase(it, q.end());
  std::sort(due.begin(), due.end(),
            [](const Message& a, const Message& b) { return a.from != b.from ? a.from < b.from : a.sent < b.sent; });
  return due;
}

double InTransitBuffer::total_weight() const {
  double s = 0.0;
  for (const auto& q : pending_)
    for (const auto& m : q) s += m.y;
  return s;
}

Vector InTransitBuffer::total_tracker(int dim) const {
  Vector s = Vector::Zero(dim);
  for (const auto& q : pending_)
    for (const auto& m : q) s += m.g;
  return s;
}

Vector InTransitBuffer::total_numerator(int dim) const {
  Vector s = Vector::Zero(dim);
  for (const auto& q : pending_)
    for (const auto& m : q) s += m.x;
  return s;
}

int InTransitBuffer::queued(int from, int to) const {
  int c = 0;
  for (const auto& m : pending_.at(to)) c += (m.from == from);
  return c;
}

std::size_t InTransitBuffer::size() const {
  std::size_t c = 0;
  for (const auto& q : pending_) c += q.size();
  return c;
}

// --- engines ---------------------------------------------------------------

std::string to_string(EngineKind e) {
  switch (e) {
    case EngineKind::PerNode: return "per-node";
    case EngineKind::AugmentedOracle: return "augmented-oracle";
    case EngineKind::AddOptNoDelay: return "addopt-nodelay";
  }
  return "?";
}

EngineKind engine_from_string(const std::string& s) {
  if (s == "per-node") return EngineKind::PerNode;
  if (s == "augmented-oracle") return EngineKind::AugmentedOracle;
  if (s == "addopt-nodelay") return EngineKind::AddOptNoDelay;
  fail(ErrorCode::Config, "unknown engine `" + s + "` (per-node, augmented-oracle, addopt-nodelay)");
}

namespace {

Matrix rows_of(const std::vector<AgentState>& states, Vector AgentState::*field) {
  Matrix m(states.size(), states.front().x.size());
  for (std::size_t i = 0; i < states.size(); ++i) m.row(i) = (states[i].*field).transpose();
  return m;
}

}  // namespace

PerNodeEngine::PerNodeEngine(const GlobalProblem& problem, std::vector<AgentState> init, double alpha, int tau_max)
    : problem_(problem), states_(std::move(init)), buffer_(static_cast<int>(states_.size())), alpha_(alpha),
      tau_max_(tau_max) {
  require(!states_.empty(), "per-node engine: no agents");
  require(tau_max_ >= 0, "per-node engine: tau_max must be >= 0");
}

void PerNodeEngine::step(const Topology& topo) {
  const int n = static_cast<int>(states_.size());
  require(topo.graph.size() == n, "per-node engine: topology size mismatch");
  // Every agent pushes its weighted round-k state on all outgoing links,
  // itself included.
  for (int j = 0; j < n; ++j) {
    const auto& s = states_[j];
    auto push = [&](int i, int tau) {
      if (tau > tau_max_) fail(ErrorCode::Engine, "per-node engine: link delay exceeds tau_max");
      const double w = topo.weights.C(i, j);
      buffer_.send(i, Message{j, k_, k_ + tau, weighted(w, s.x), w * s.y, weighted(w, s.g)});
    };
    push(j, 0);
    for (int i : topo.graph.out_neighbors(j))
      if (i != j) push(i, topo.delays.delay(j, i));
  }
  // Receive and update; all reads use round-k values.
  std::vector<AgentState> next(n);
  const int p = problem_.dim();
  for (int i = 0; i < n; ++i) {
    const auto& s = states_[i];
    Vector mix_x = Vector::Zero(p), mix_g = Vector::Zero(p);
    double mix_y = 0.0;
    for (const auto& m : buffer_.take_due(i, k_)) {
      mix_x += m.x;
      mix_y += m.y;
      mix_g += m.g;
    }
    auto& o = next[i];
    o.x = mix_x - alpha_ * s.g;
    o.y = checked_weight(mix_y, i);
    o.z = o.x / o.y;
    o.grad_prev = problem_.locals[i]->gradient(o.z);
    o.g = mix_g + (o.grad_prev - s.grad_prev);
  }
  states_ = std::move(next);
  ++k_;
}

Matrix PerNodeEngine::estimates() const { return rows_of(states_, &AgentState::z); }
Matrix PerNodeEngine::numerators() const { return rows_of(states_, &AgentState::x); }
Matrix PerNodeEngine::trackers() const { return rows_of(states_, &AgentState::g); }

Vector PerNodeEngine::weights() const {
  Vector y(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) y(i) = states_[i].y;
  return y;
}

double PerNodeEngine::total_weight() const {
  double s = 0.0;
  for (const auto& a : states_) s += a.y;
  return s + buffer_.total_weight();
}

Vector PerNodeEngine::total_tracker() const {
  Vector s = Vector::Zero(problem_.dim());
  for (const auto& a : states_) s += a.g;
  return s + buffer_.total_tracker(problem_.dim());
}

Vector PerNodeEngine::gradient_sum() const {
  Vector s = Vector::Zero(problem_.dim());
  for (const auto& a : states_) s += a.grad_prev;
  return s;
}

AugmentedEngine::AugmentedEngine(const GlobalProblem& problem, const std::vector<AgentState>& init, double alpha,
                                 int tau_max)
    : problem_(problem), n_(static_cast<int>(init.size())), tau_max_(tau_max), alpha_(alpha) {
  require(n_ > 0 && tau_max_ >= 0, "augmented engine: bad sizes");
  const int p = problem.dim();
  const int N = n_ * (tau_max_ + 1);
  xhat_ = Matrix::Zero(N, p);
  ghat_ = Matrix::Zero(N, p);
  yhat_ = Vector::Zero(N);
  grad_ = Matrix::Zero(n_, p);
  for (int i = 0; i < n_; ++i) {
    xhat_.row(i) = init[i].x.transpose();
    yhat_(i) = init[i].y;
    ghat_.row(i) = init[i].g.transpose();
    grad_.row(i) = init[i].grad_prev.transpose();
  }
  grad_stack_ = Matrix::Zero(N, p);
  grad_stack_.topRows(n_) = grad_;
}

void AugmentedEngine::step(const Topology& topo) {
  require(topo.delays.tau_max() <= tau_max_, "augmented engine: topology delay bound exceeds engine bound");
  DelayMap d = topo.delays;
  if (d.tau_max() != tau_max_) {
    // Widen the delay bound so the stacked dimension stays fixed.
    DelayMap wide(topo.graph, tau_max_);
    for (const auto& e : d.links()) wide.set_delay(e.from, e.to, d.delay(e.from, e.to));
    d = std::move(wide);
  }
  step(augment(topo.weights.C, d));
}

void AugmentedEngine::step(const AugmentedMatrix& aug) {
  require(aug.dim() == xhat_.rows(), "augmented engine: matrix dimension mismatch");
  Matrix xn = aug.Cbar * xhat_;
  xn.topRows(n_) -= alpha_ * ghat_.topRows(n_);
  Vector yn = aug.Cbar * yhat_;
  Matrix gn = aug.Cbar * ghat_;
  Matrix grad_new(n_, problem_.dim());
  for (int i = 0; i < n_; ++i) {
    const double y = checked_weight(yn(i), i);
    const Vector z = xn.row(i).transpose() / y;
    grad_new.row(i) = problem_.locals[i]->gradient(z).transpose();
  }
  gn.topRows(n_) += grad_new - grad_;
  xhat_ = std::move(xn);
  yhat_ = std::move(yn);
  ghat_ = std::move(gn);
  grad_ = std::move(grad_new);
  if (tau_max_ > 0) {
    const Matrix older = grad_stack_.topRows(n_ * tau_max_);
    grad_stack_.bottomRows(n_ * tau_max_) = older;
  }
  grad_stack_.topRows(n_) = grad_;
  ++k_;
}

Matrix AugmentedEngine::estimates() const {
  Matrix z = xhat_.topRows(n_);
  for (int i = 0; i < n_; ++i) z.row(i) /= yhat_(i);
  return z;
}

AddOptEngine::AddOptEngine(const GlobalProblem& problem, std::vector<AgentState> init, double alpha)
    : problem_(problem), states_(std::move(init)), alpha_(alpha) {
  require(!states_.empty(), "addopt engine: no agents");
}

void AddOptEngine::step(const Topology& topo) {
  const int n = static_cast<int>(states_.size());
  const Matrix& C = topo.weights.C;
  require(C.rows() == n, "addopt engine: topology size mismatch");
  const int p = problem_.dim();
  std::vector<AgentState> next(n);
  for (int i = 0; i < n; ++i) {
    Vector mix_x = Vector::Zero(p), mix_g = Vector::Zero(p);
    double mix_y = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = C(i, j);
      if (w == 0.0) continue;
      mix_x += weighted(w, states_[j].x);
      mix_y += w * states_[j].y;
      mix_g += weighted(w, states_[j].g);
    }
    const auto& s = states_[i];
    auto& o = next[i];
    o.x = mix_x - alpha_ * s.g;
    o.y = checked_weight(mix_y, i);
    o.z = o.x / o.y;
    o.grad_prev = problem_.locals[i]->gradient(o.z);
    o.g = mix_g + (o.grad_prev - s.grad_prev);
  }
  states_ = std::move(next);
  ++k_;
}

Matrix AddOptEngine::estimates() const { return rows_of(states_, &AgentState::z); }
Matrix AddOptEngine::numerators() const { return rows_of(states_, &AgentState::x); }
Matrix AddOptEngine::trackers() const { return rows_of(states_, &AgentState::g); }

Vector AddOptEngine::weights() const {
  Vector y(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) y(i) = states_[i].y;
  return y;
}

double AddOptEngine::total_weight() const {
  double s = 0.0;
  for (const auto& a : states_) s += a.y;
  return s;
}

Vector AddOptEngine::total_tracker() const {
  Vector s = Vector::Zero(problem_.dim());
  for (const auto& a : states_) s += a.g;
  return s;
}

Vector AddOptEngine::gradient_sum() const {
  Vector s = Vector::Zero(problem_.dim());
  for (const auto& a : states_) s += a.grad_prev;
  return s;
}

std::unique_ptr<Engine> make_engine(EngineKind kind, const GlobalProblem& problem, std::vector<AgentState> init,
                                    double alpha, int tau_max) {
  switch (kind) {
    case EngineKind::PerNode: return std::make_unique<PerNodeEngine>(problem, std::move(init), alpha, tau_max);
    case EngineKind::AugmentedOracle: return std::make_unique<AugmentedEngine>(problem, init, alpha, tau_max);
    case EngineKind::AddOptNoDelay: return std::make_unique<AddOptEngine>(problem, std::move(init), alpha);
  }
  fail(ErrorCode::InvalidArgument, "unknown engine");
}

// --- runner ----------------------------------------------------------------

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "CONVERGED";
    case RunStatus::Diverged: return "DIVERGED";
    case RunStatus::MaxIter: return "MAXITER";
  }
  return "?";
}

TraceRecord measure(const Engine& e, const GlobalProblem& problem) {
  const Matrix z = e.estimates();
  const auto n = z.rows();
  const Vector z_bar = z.colwise().mean().transpose();
  TraceRecord r;
  r.iter = e.iteration();
  r.optimality_gap = problem.value(z_bar) - problem.f_star;
  double mse = 0.0, cons = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    mse += (z.row(i).transpose() - problem.z_star).squaredNorm();
    cons = std::max(cons, (z.row(i).transpose() - z_bar).norm());
  }
  r.mse = mse / static_cast<double>(n);
  r.consensus_error = cons;
  r.grad_tracker_sum_error = (e.total_tracker() - e.gradient_sum()).cwiseAbs().maxCoeff();
  r.mass_error = std::abs(e.total_weight() - static_cast<double>(n));
  return r;
}

RunResult run(const RunConfig& cfg, TopologySource& topology, const GlobalProblem& problem,
              const RoundObserver& observer) {
  require(cfg.alpha > 0.0, "run: alpha must be > 0");
  require(cfg.max_iters >= 1, "run: max_iters must be >= 1");
  require(cfg.record_every >= 1, "run: record_every must be >= 1");
  const int n = topology.nodes();
  auto engine = make_engine(cfg.engine, problem, init_states(problem, n, cfg.init_seed), cfg.alpha, topology.tau_max());

  RunResult res;
  bool bounded = true;
  auto account = [&](const TraceRecord& r) {
    res.max_mass_error = std::max(res.max_mass_error, r.mass_error);
    res.max_tracker_error = std::max(res.max_tracker_error, r.grad_tracker_sum_error);
    if (bounded && engine->estimates().cwiseAbs().maxCoeff() > 1e6) bounded = false;
    if (bounded) res.max_tracker_error_bounded = std::max(res.max_tracker_error_bounded, r.grad_tracker_sum_error);
  };

  TraceRecord last = measure(*engine, problem);
  account(last);
  res.trace.push_back(last);
  res.status = RunStatus::MaxIter;
  for (long long k = 0; k < cfg.max_iters; ++k) {
    engine->step(topology.at(k));
    last = measure(*engine, problem);
    account(last);
    if (observer) observer(*engine, last);
    const bool diverged = !std::isfinite(last.mse) || last.mse > cfg.divergence_threshold;
    if (diverged) {
      res.status = RunStatus::Diverged;
      break;
    }
    if (last.optimality_gap < cfg.tol) {
      res.status = RunStatus::Converged;
      break;
    }
    if (last.iter % cfg.record_every == 0) res.trace.push_back(last);
  }
  if (res.trace.back().iter != last.iter) res.trace.push_back(last);
  res.iters = last.iter;
  res.final_gap = last.optimality_gap;
  res.final_mse = last.mse;
  res.final_estimates = engine->estimates();
  res.z_bar = res.final_estimates.colwise().mean().transpose();
  return res;
}

std::string status_line(const RunResult& r) {
  std::ostringstream os;
  os.precision(6);
  os << "STATUS " << to_string(r.status) << " iters=" << r.iters << " final_gap=" << std::scientific << r.final_gap;
  return os.str();
}

}  // namespace dtac
