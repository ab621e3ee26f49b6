#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtac/experiment.hpp"

using namespace dtac;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  apply_override(c, "graph.n=6");
  apply_override(c, "cost.dim=2");
  apply_override(c, "run.max_iters=400");
  apply_override(c, "run.record_every=10");
  apply_override(c, "sweep.tau_max=0,2");
  apply_override(c, "sweep.alpha=0.005,0.01");
  apply_override(c, "output.tag=t");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("dtac_test_" + name);
  fs::remove_all(d);
  return d;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("file names and number format") {
  CHECK(trace_file_name("fig", 5, 0.005) == "fig_tau5_alpha0.005.csv");
  CHECK(trace_file_name("x", 0, 1e-4) == "x_tau0_alpha0.0001.csv");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
}

TEST_CASE("trace CSV layout") {
  std::ostringstream os;
  TraceRecord r;
  r.iter = 3;
  r.optimality_gap = 0.5;
  write_trace_csv(os, {r});
  const auto ls = lines(os.str());
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "iter,optimality_gap,mse,consensus_error,grad_tracker_sum_error,mass_error");
  CHECK(ls[1] == "3,0.5,0,0,0,0");
}

TEST_CASE("sweep writes traces, summary and networks") {
  const auto dir = fresh_dir("sweep");
  const auto rep = run_experiment(small_config(), dir.string(), 1);
  REQUIRE(rep.runs.size() == 4);
  CHECK(rep.runs[0].tau_max == 0);
  CHECK(rep.runs[3].alpha == 0.01);
  for (const auto& r : rep.runs) {
    REQUIRE(fs::exists(dir / r.trace_file));
    const auto ls = lines(slurp(dir / r.trace_file));
    CHECK(ls.size() == r.result.trace.size() + 1);
    std::ostringstream last;
    write_trace_csv(last, {r.result.trace.back()});
    CHECK(ls.back() == lines(last.str()).back());
  }
  CHECK(fs::exists(dir / "t_tau0_delays.txt"));
  CHECK(fs::exists(dir / "t_tau2_delays.txt"));
  const auto summary = lines(slurp(rep.summary_file));
  CHECK(summary.size() == 5);
  CHECK(summary[1].find("MAXITER") != std::string::npos);
}

TEST_CASE("parallel sweep reproduces the sequential one byte for byte") {
  const auto a = fresh_dir("seq"), b = fresh_dir("par");
  const auto ra = run_experiment(small_config(), a.string(), 1);
  const auto rb = run_experiment(small_config(), b.string(), 2);
  for (std::size_t i = 0; i < ra.runs.size(); ++i)
    CHECK(slurp(a / ra.runs[i].trace_file) == slurp(b / rb.runs[i].trace_file));
}

TEST_CASE("runs are reproducible across calls") {
  const auto c = small_config();
  const auto x = run_point(c, 2, 0.01), y = run_point(c, 2, 0.01);
  CHECK(x.result.final_gap == y.result.final_gap);
  CHECK(x.result.iters == y.result.iters);
}

TEST_CASE("zero-delay comparison columns coincide") {
  auto c = small_config();
  apply_override(c, "delay.tau_max=0");
  apply_override(c, "run.record_every=1");
  const auto dir = fresh_dir("cmp");
  const auto cmp = compare_engines(c, dir.string());
  REQUIRE(cmp.dtac.trace.size() == cmp.addopt.trace.size());
  for (std::size_t i = 0; i < cmp.dtac.trace.size(); ++i)
    CHECK(cmp.dtac.trace[i].optimality_gap == cmp.addopt.trace[i].optimality_gap);
  const auto ls = lines(slurp(dir / "t_compare.csv"));
  CHECK(ls[0] == "iter,dtac_gap,addopt_gap");
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto a = ls[i].find(','), b = ls[i].rfind(',');
    CHECK(ls[i].substr(a + 1, b - a - 1) == ls[i].substr(b + 1));
  }
  CHECK(iterations_to_gap(cmp.dtac, 1e300) == 0);
  CHECK(iterations_to_gap(cmp.dtac, -1.0) == -1);
}

TEST_CASE("a diverging run is marked in the comparison") {
  RunResult good, bad;
  for (int k = 0; k <= 4; ++k) {
    TraceRecord r;
    r.iter = k;
    r.optimality_gap = 1.0 / (k + 1);
    good.trace.push_back(r);
    if (k <= 2) bad.trace.push_back(r);
  }
  good.status = RunStatus::MaxIter;
  bad.status = RunStatus::Diverged;
  std::ostringstream os;
  write_comparison_csv(os, bad, good);
  const auto ls = lines(os.str());
  REQUIRE(ls.size() == 6);
  CHECK(ls[4].find("DIVERGED") != std::string::npos);
  CHECK(ls[5].rfind("4,", 0) == 0);
  CHECK(ls[5].find("DIVERGED") == std::string::npos);
}
