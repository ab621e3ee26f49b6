#include "dtac/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "dtac/costs.hpp"
#include "dtac/error.hpp"
#include "dtac/optimizer.hpp"
#include "dtac/rng.hpp"
#include "dtac/spectral.hpp"

namespace dtac {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Case {
  GlobalProblem problem;
  Topology topo;
};

Case random_case(int n, int tau, std::uint64_t seed) {
  auto g = generate_erdos_renyi(n, 0.5, seed);
  auto d = assign_delays(g, tau, DelayMode::UniformRandom, seed + 100);
  return {make_quadratic(n, 3, seed + 200), make_topology(std::move(g), std::move(d))};
}

SuiteResult oracle_equivalence() {
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const int n = 3 + static_cast<int>(s % 4), tau = static_cast<int>(s % 4);
    auto c = random_case(n, tau, s);
    auto init = init_states(c.problem, n, s);
    PerNodeEngine a(c.problem, init, 0.002, tau);
    AugmentedEngine b(c.problem, init, 0.002, tau);
    const auto aug = augment(c.topo.weights.C, c.topo.delays);
    for (int k = 0; k < 200; ++k) {
      a.step(c.topo);
      b.step(aug);
      worst = std::max({worst, (a.numerators() - b.numerators()).cwiseAbs().maxCoeff(),
                        (a.weights() - b.weights()).cwiseAbs().maxCoeff(),
                        (a.trackers() - b.trackers()).cwiseAbs().maxCoeff()});
    }
  }
  return {"oracle-equivalence", worst <= 1e-10, "max entry difference " + sci(worst)};
}

SuiteResult conservation() {
  double mass = 0.0, tracker = 0.0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    auto c = random_case(6, 3, s);
    StaticTopology topo(c.topo);
    RunConfig rc;
    rc.alpha = 0.005;
    rc.max_iters = 500;
    rc.record_every = 500;
    const auto r = run(rc, topo, c.problem);
    mass = std::max(mass, r.max_mass_error);
    tracker = std::max(tracker, r.max_tracker_error_bounded);
  }
  return {"conservation", mass <= 1e-10 && tracker <= 1e-9,
          "weight mass " + sci(mass) + ", tracker sum " + sci(tracker)};
}

SuiteResult reduction() {
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    auto c = random_case(6, 0, s);
    auto init = init_states(c.problem, 6, s);
    PerNodeEngine a(c.problem, init, 0.01, 0);
    AddOptEngine b(c.problem, init, 0.01);
    for (int k = 0; k < 300; ++k) {
      a.step(c.topo);
      b.step(c.topo);
      worst = std::max(worst, (a.estimates() - b.estimates()).cwiseAbs().maxCoeff());
    }
  }
  return {"reduction", worst <= 1e-14, "max estimate difference " + sci(worst)};
}

SuiteResult gradient_check() {
  std::vector<GlobalProblem> problems;
  problems.push_back(make_quadratic(2, 4, 1));
  problems.push_back(make_least_squares(2, 4, 6, 2, 0.1));
  problems.push_back(make_logistic(2, 3, 10, 0.1, 3));
  problems.push_back(make_smooth_svm(2, 3, 10, 1.0, 10.0, 4));
  auto rng = make_rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (const auto& p : problems) {
    const auto& f = *p.locals.front();
    for (int t = 0; t < 20; ++t) {
      Vector z(f.dim());
      for (int i = 0; i < f.dim(); ++i) z(i) = normal(rng);
      const Vector g = f.gradient(z);
      const double h = 1e-6 * (1.0 + z.norm());
      Vector fd(f.dim());
      for (int i = 0; i < f.dim(); ++i) {
        Vector zp = z, zm = z;
        zp(i) += h;
        zm(i) -= h;
        fd(i) = (f.value(zp) - f.value(zm)) / (2.0 * h);
      }
      worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
    }
  }
  return {"gradient-check", worst < 1e-5, "max relative error " + sci(worst) + " over 4 cost families"};
}

SuiteResult spectral_bound() {
  auto rng = make_rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0, cases = 0;
  for (int t = 0; t < 40; ++t) {
    const int n = 3 + t % 4;
    auto g = generate_erdos_renyi(n, 0.6, 300 + t);
    Matrix C = build_column_stochastic_weights(g).C;
    const bool stochastic = t % 4 == 0;
    if (!stochastic)
      for (int j = 0; j < n; ++j) C.col(j) *= 0.5 + 0.45 * u(rng);
    for (int tau : {1, 2, 5}) {
      ++cases;
      const auto d = assign_delays(g, tau, DelayMode::UniformRandom, 400 + t);
      if (!check_spectral_bound(C, d).holds) ++failures;
    }
  }
  return {"spectral-bound", failures == 0, std::to_string(cases - failures) + "/" + std::to_string(cases) + " hold"};
}

SuiteResult column_stochasticity(double perturbation) {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    auto g = generate_erdos_renyi(4 + t % 6, 0.5, 500 + t);
    Matrix C = build_column_stochastic_weights(g).C;
    C(0, 0) += perturbation;
    worst = std::max(worst, column_stochasticity_error(C));
    const auto d = assign_delays(g, 1 + t % 3, DelayMode::UniformRandom, 600 + t);
    const auto aug = augment(C, d, SliceCheck::Any);
    worst = std::max(worst, column_stochasticity_error(aug.Cbar));
  }
  return {"column-stochasticity", worst <= 1e-12, "max column-sum error " + sci(worst)};
}

}  // namespace

std::vector<SuiteResult> run_selftest(const SelfTestOptions& opt) {
  std::vector<std::function<SuiteResult()>> suites = {
      oracle_equivalence, conservation, reduction, gradient_check, spectral_bound,
      [&] { return column_stochasticity(opt.weight_perturbation); },
  };
  const char* names[] = {"oracle-equivalence", "conservation",   "reduction",
                         "gradient-check",     "spectral-bound", "column-stochasticity"};
  std::vector<SuiteResult> out;
  for (std::size_t i = 0; i < suites.size(); ++i) {
    try {
      out.push_back(suites[i]());
    } catch (const std::exception& e) {
      out.push_back({names[i], false, std::string("exception: ") + e.what()});
    }
  }
  return out;
}

}  // namespace dtac
