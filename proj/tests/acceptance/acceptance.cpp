// Acceptance checks, one per criterion: `acceptance --criterion N` or `--all`.
#include <CLI11.hpp>

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "../support/oracles.hpp"
#include "dtac/config.hpp"
#include "dtac/experiment.hpp"
#include "dtac/rng.hpp"
#include "dtac/spectral.hpp"

using namespace dtac;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Conservation errors collected from every run made by criteria 1-5, with
// runs that end DIVERGED kept apart so the report shows where errors come from.
struct Conservation {
  double mass = 0.0;
  double tracker = 0.0;
  double diverged_mass = 0.0;
  double diverged_tracker = 0.0;
  void add(double m, double t) {
    mass = std::max(mass, m);
    tracker = std::max(tracker, t);
  }
  void add(const RunResult& r) {
    if (r.status == RunStatus::Diverged) {
      diverged_mass = std::max(diverged_mass, r.max_mass_error);
      diverged_tracker = std::max(diverged_tracker, r.max_tracker_error);
    } else {
      add(r.max_mass_error, r.max_tracker_error);
    }
  }
};
Conservation g_conservation;

ExperimentConfig reference_config() {
  ExperimentConfig c;  // n=10 ER p=0.5, quadratic, seed 7
  apply_override(c, "delay.tau_max=5");
  apply_override(c, "run.alpha=0.005");
  apply_override(c, "run.max_iters=20000");
  return c;
}

Verdict criterion1() {
  Stopwatch sw;
  const auto out = run_point(reference_config(), 5, 0.005);
  g_conservation.add(out.result);
  const double t = sw.seconds();
  const auto& r = out.result;
  return {r.status == RunStatus::Converged && r.final_gap < 1e-8 && r.iters <= 20000 && t < 10.0,
          fmt("status=%s iters=%lld final_gap=%.3e time=%.2fs", to_string(r.status).c_str(), r.iters, r.final_gap, t)};
}

Verdict criterion2() {
  Stopwatch sw;
  auto cfg = reference_config();
  apply_override(cfg, "switching.enabled=true");
  apply_override(cfg, "switching.period=2");
  apply_override(cfg, "run.record_every=1");
  const auto out = run_point(cfg, 5, 0.005);
  g_conservation.add(out.result);
  const double t = sw.seconds();
  const auto& tr = out.result.trace;
  int rises = 0;
  for (std::size_t i = 1; i < tr.size(); ++i) rises += tr[i].optimality_gap > tr[i - 1].optimality_gap;
  const auto& r = out.result;
  return {r.status == RunStatus::Converged && r.final_gap < 1e-8 && rises >= 1 && t < 20.0,
          fmt("status=%s iters=%lld final_gap=%.3e non_monotone=%d time=%.2fs", to_string(r.status).c_str(), r.iters,
              r.final_gap, rises, t)};
}

Verdict criterion3() {
  Stopwatch sw;
  auto cfg = reference_config();
  apply_override(cfg, "sweep.tau_max=5,10,15,20");
  apply_override(cfg, "sweep.alpha=0.001,0.005");
  apply_override(cfg, "run.record_every=100");
  const auto rep = run_experiment(cfg, "", 1);
  bool slow_ok = true, fast_ok = true;
  std::ostringstream os;
  for (const auto& o : rep.runs) {
    g_conservation.add(o.result);
    os << " tau" << o.tau_max << "/a" << o.alpha << "=" << to_string(o.result.status);
    if (o.alpha == 0.001 && o.result.status != RunStatus::Converged) slow_ok = false;
    if (o.alpha == 0.005 && o.tau_max >= 15 && o.result.status != RunStatus::Diverged) fast_ok = false;
  }
  const double t = sw.seconds();
  return {slow_ok && fast_ok && t < 120.0,
          fmt("alpha0.001_all_converged=%d alpha0.005_large_tau_diverged=%d time=%.1fs;", slow_ok, fast_ok, t) +
              os.str()};
}

Verdict criterion4() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = 4 + static_cast<int>(seed);
    const auto prob = make_quadratic(n, 3, seed);
    const auto g = generate_erdos_renyi(n, 0.5, seed);
    RunConfig rc;
    rc.alpha = 0.005;
    rc.max_iters = 1000;
    rc.tol = -1.0;
    rc.init_seed = seed;
    StaticTopology a(make_topology(g, DelayMap(g, 0))), b(make_topology(g, DelayMap(g, 0)));
    const auto x = run(rc, a, prob);
    rc.engine = EngineKind::AddOptNoDelay;
    const auto y = run(rc, b, prob);
    g_conservation.add(x);
    g_conservation.add(y);
    if (x.trace.size() != y.trace.size()) return {false, "trace lengths differ"};
    for (std::size_t i = 0; i < x.trace.size(); ++i) {
      const auto &p = x.trace[i], &q = y.trace[i];
      for (double d : {p.optimality_gap - q.optimality_gap, p.mse - q.mse, p.consensus_error - q.consensus_error,
                       p.grad_tracker_sum_error - q.grad_tracker_sum_error, p.mass_error - q.mass_error})
        worst = std::max(worst, std::abs(d));
    }
  }
  return {worst <= 1e-14, fmt("instances=5 iters=1000 max_metric_diff=%.3e", worst)};
}

Verdict criterion5() {
  Stopwatch sw;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);  // 2..8
    const int tau = static_cast<int>(seed % 4);     // 0..3
    const auto prob = make_quadratic(n, 3, 100 + seed);
    const auto g = generate_erdos_renyi(n, 0.5, 100 + seed);
    const auto topo = make_topology(g, assign_delays(g, tau, DelayMode::UniformRandom, 100 + seed));
    const auto init = init_states(prob, n, seed);
    const double alpha = 0.002;
    PerNodeEngine a(prob, init, alpha, tau);
    AugmentedEngine b(prob, init, alpha, tau);
    for (int k = 0; k < 500; ++k) {
      a.step(topo);
      b.step(topo);
      worst = std::max({worst, (a.numerators() - b.numerators()).cwiseAbs().maxCoeff(),
                        (a.weights() - b.weights()).cwiseAbs().maxCoeff(),
                        (a.trackers() - b.trackers()).cwiseAbs().maxCoeff(),
                        (a.estimates() - b.estimates()).cwiseAbs().maxCoeff()});
      g_conservation.add(std::abs(a.total_weight() - n),
                         (a.total_tracker() - a.gradient_sum()).cwiseAbs().maxCoeff());
      g_conservation.add(std::abs(b.total_weight() - n),
                         (b.total_tracker() - b.gradient_sum()).cwiseAbs().maxCoeff());
    }
  }
  const double t = sw.seconds();
  return {worst <= 1e-10 && t < 30.0, fmt("instances=10 iters=500 max_entry_diff=%.3e time=%.2fs", worst, t)};
}

Verdict criterion6() {
  g_conservation = {};
  for (auto* c : {criterion1, criterion2, criterion3, criterion4, criterion5}) c();
  const auto& k = g_conservation;
  const double mass = std::max(k.mass, k.diverged_mass), tracker = std::max(k.tracker, k.diverged_tracker);
  return {mass <= 1e-10 && tracker <= 1e-9,
          fmt("max_mass_error=%.3e max_tracker_error=%.3e; stable runs: mass=%.3e tracker=%.3e; diverged runs: "
              "mass=%.3e tracker=%.3e",
              mass, tracker, k.mass, k.tracker, k.diverged_mass, k.diverged_tracker)};
}

Matrix random_substochastic(int n, std::mt19937_64& rng, DirectedGraph& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  g = generate_erdos_renyi(n, 0.4, rng());
  Matrix C = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    C(j, j) = u(rng) + 0.05;
    for (int i : g.out_neighbors(j)) C(i, j) = u(rng) + 0.05;
    C.col(j) *= (0.2 + 0.79 * u(rng)) / C.col(j).sum();
  }
  return C;
}

Verdict criterion7() {
  Stopwatch sw;
  auto rng = make_rng(2024);
  int checked = 0, bad = 0;
  double worst = -1.0;
  for (int t = 0; t < 200; ++t) {
    DirectedGraph g;
    const Matrix C = random_substochastic(3 + t % 8, rng, g);
    for (int tau : {1, 2, 5}) {
      const auto r = check_spectral_bound(C, assign_delays(g, tau, DelayMode::UniformRandom, rng()));
      worst = std::max(worst, r.rho_Cbar - r.bound);
      bad += !r.holds;
      ++checked;
    }
  }
  int stoch = 0, stoch_bad = 0;
  double worst_stoch = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto g = generate_erdos_renyi(3 + t % 10, 0.4, rng());
    const auto C = build_column_stochastic_weights(g).C;
    const int tau = 1 + t % 5;
    const auto r = check_spectral_bound(C, assign_delays(g, tau, DelayMode::UniformRandom, rng()));
    worst_stoch = std::max(worst_stoch, std::abs(r.rho_Cbar - 1.0));
    stoch_bad += !r.holds;
    ++stoch;
  }
  const double s = sw.seconds();
  return {bad == 0 && stoch_bad == 0 && s < 60.0,
          fmt("substochastic=%d violations=%d max(rho_Cbar-bound)=%.3e stochastic=%d max|rho_Cbar-1|=%.3e time=%.2fs",
              checked, bad, worst, stoch, worst_stoch, s)};
}

Verdict criterion8() {
  auto rng = make_rng(2025);
  int cases = 0, bound_bad = 0, not_contractive = 0;
  double min_sigma = 1e300, max_sigma = 0.0, min_weighted = 1e300, max_weighted = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int n = 3 + t % 14;  // up to 16
    const auto g = generate_erdos_renyi(n, 0.4, rng());
    const auto C = build_column_stochastic_weights(g).C;
    const double sigma1 = contraction_sigma(C);
    for (int tau : {1, 2, 5}) {
      const auto aug = augment(C, assign_delays(g, tau, DelayMode::UniformRandom, rng()));
      const auto lim = limit_matrix(aug.Cbar);
      const double sigma = norm2(aug.Cbar - lim.limit);
      bound_bad += sigma > std::pow(sigma1, 1.0 / (1.0 + tau)) + 1e-9;
      not_contractive += !(sigma < 1.0);
      min_sigma = std::min(min_sigma, sigma);
      max_sigma = std::max(max_sigma, sigma);
      if (t < 20) {  // the weighted-norm factor is costlier; sample it
        const double w = weighted_contraction(aug.Cbar - lim.limit).sigma;
        min_weighted = std::min(min_weighted, w);
        max_weighted = std::max(max_weighted, w);
      }
      ++cases;
    }
  }
  return {bound_bad == 0 && not_contractive == 0,
          fmt("cases=%d bound_violations=%d sigma>=1=%d sigma_range=[%.6f, %.6f] weighted_norm_sigma_range=[%.4f, "
              "%.4f]",
              cases, bound_bad, not_contractive, min_sigma, max_sigma, min_weighted, max_weighted)};
}

Verdict criterion9() {
  int instances = 0, unstable = 0, g0_bad = 0, slope_bad = 0, uncertified = 0;
  double worst_rho = 0.0, worst_slope = 0.0;
  for (std::uint64_t seed = 1; instances < 10 && seed < 100; ++seed) {
    const int n = 3 + static_cast<int>(seed % 4), tau = static_cast<int>(seed % 3);
    const auto prob = make_quadratic(n, 2, seed);
    const auto g = generate_erdos_renyi(n, 0.6, seed);
    const auto d = assign_delays(g, tau, DelayMode::UniformRandom, seed);
    const auto rep = analyze_spectrum(build_column_stochastic_weights(g), d, prob.strong_convexity(), prob.lipschitz());
    ++instances;
    if (!rep.step) {
      ++uncertified;
      continue;
    }
    const auto& in = rep.step->inputs;
    const double amax = rep.step->admissible_max;
    for (int j = 1; j <= 20; ++j) {
      const double r = spectral_radius(Matrix(build_G(amax * j / 21.0, in)));
      worst_rho = std::max(worst_rho, r);
      unstable += !(r < 1.0);
    }
    const double r0 = spectral_radius(Matrix(build_G(0.0, in)));
    g0_bad += r0 < 1.0 - 1e-12;
    const double h = 1e-7 * amax;
    const double slope = (spectral_radius(Matrix(build_G(h, in))) - r0) / h;
    const double rel = std::abs(slope / (-in.n_aug() * in.s) - 1.0);
    worst_slope = std::max(worst_slope, rel);
    slope_bad += rel > 0.05;
  }
  return {unstable == 0 && g0_bad == 0 && slope_bad == 0 && uncertified == 0,
          fmt("instances=%d uncertified=%d max_rho_G=%.9f unstable=%d rho_G0_below_1=%d max_slope_rel_err=%.3e",
              instances, uncertified, worst_rho, unstable, g0_bad, worst_slope)};
}

Verdict criterion10() {
  auto rng = make_rng(77);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::vector<std::pair<std::string, GlobalProblem>> families = {
      {"quadratic", make_quadratic(4, 3, 1)},
      {"least_squares", make_least_squares(4, 3, 6, 1)},
      {"logistic", make_logistic(4, 3, 10, 0.1, 1)},
      {"svm", make_smooth_svm(4, 3, 10, 1.0, 10.0, 1)}};
  double worst_fd = 0.0, worst_oracle = 0.0;
  for (const auto& [name, prob] : families) {
    for (int t = 0; t < 20; ++t) {
      Vector z(prob.dim());
      for (int k = 0; k < z.size(); ++k) z(k) = 2.0 * nd(rng);
      for (const auto& f : prob.locals) {
        const Vector an = f->gradient(z);
        const Vector fd = oracle::fd_gradient([&](const Vector& v) { return f->value(v); }, z);
        worst_fd = std::max(worst_fd, (fd - an).norm() / an.norm());
      }
    }
    worst_oracle = std::max(worst_oracle, centralized_minimize(prob, 1e-10).grad_norm);
  }
  std::ostringstream os;
  bool runs_ok = true;
  for (const std::string fam : {"quadratic", "least_squares"}) {
    ExperimentConfig c;
    apply_override(c, "graph.n=4");
    apply_override(c, "graph.p=0.9");
    apply_override(c, "graph.seed=5");
    apply_override(c, "delay.tau_max=1");
    apply_override(c, "delay.mode=homogeneous");
    apply_override(c, "cost.type=" + fam);
    apply_override(c, "cost.dim=2");
    apply_override(c, "cost.rows_per_agent=6");
    apply_override(c, "cost.seed=5");
    apply_override(c, "run.max_iters=200000");
    apply_override(c, "run.tol=1e-14");
    apply_override(c, "run.record_every=1000");
    const auto inst = build_instance(c);
    const auto rep = analyze_spectrum(inst.topology.weights, inst.topology.delays, inst.problem.strong_convexity(),
                                      inst.problem.lipschitz());
    if (!rep.step) {
      runs_ok = false;
      os << " " << fam << ":no-certificate";
      continue;
    }
    const double alpha = 0.5 * rep.step->admissible_max;
    const auto out = run_point(c, 1, alpha);
    const double err = (out.result.z_bar - inst.problem.z_star).norm();
    runs_ok = runs_ok && err < 1e-6;
    os << fmt(" %s:alpha=%.3e status=%s iters=%lld |zbar-z*|=%.3e", fam.c_str(), alpha,
              to_string(out.result.status).c_str(), out.result.iters, err);
  }
  return {worst_fd < 1e-5 && worst_oracle < 1e-9 && runs_ok,
          fmt("max_fd_rel_err=%.3e max_oracle_grad_norm=%.3e;", worst_fd, worst_oracle) + os.str()};
}

Verdict criterion11() {
  Stopwatch sw;
  ExperimentConfig c;
  apply_override(c, "graph.type=exponential");
  apply_override(c, "graph.n=16");
  apply_override(c, "delay.tau_max=3");
  apply_override(c, "cost.type=logistic");
  apply_override(c, "cost.dim=10");
  apply_override(c, "cost.samples_per_agent=20");
  apply_override(c, "cost.lambda=0.1");
  apply_override(c, "run.alpha=0.05");
  apply_override(c, "run.record_every=1");
  const auto cmp = compare_engines(c, "");
  const long long a = iterations_to_gap(cmp.dtac, 1e-4), b = iterations_to_gap(cmp.addopt, 1e-4);
  const double t = sw.seconds();
  return {cmp.dtac.status == RunStatus::Converged && a > 0 && b > 0 && a > b && t < 120.0,
          fmt("dtac_status=%s dtac_iters_to_1e-4=%lld addopt_iters_to_1e-4=%lld time=%.2fs",
              to_string(cmp.dtac.status).c_str(), a, b, t)};
}

const std::map<int, std::function<Verdict()>> kCriteria = {
    {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},   {5, criterion5},  {6, criterion6},
    {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}};

bool report(int id) {
  Verdict v;
  try {
    v = kCriteria.at(id)();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("CRITERION %d %s %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int which = 0;
  app.add_option("--criterion", which, "criterion number (1-11)")->check(CLI::Range(1, 11));
  bool all = false;
  app.add_flag("--all", all, "run every criterion");
  CLI11_PARSE(app, argc, argv);
  if (!all && which == 0) {
    std::fprintf(stderr, "pass --criterion N or --all\n");
    return 2;
  }
  bool ok = true;
  if (all)
    for (const auto& [id, f] : kCriteria) ok = report(id) && ok;
  else
    ok = report(which);
  return ok ? 0 : 1;
}
