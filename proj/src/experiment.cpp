#include "dtac/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "dtac/error.hpp"

namespace dtac {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_file_name(const std::string& tag, int tau_max, double alpha) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return tag + "_tau" + std::to_string(tau_max) + "_alpha" + buf + ".csv";
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << "iter,optimality_gap,mse,consensus_error,grad_tracker_sum_error,mass_error\n";
  for (const auto& r : trace)
    os << r.iter << ',' << format_number(r.optimality_gap) << ',' << format_number(r.mse) << ','
       << format_number(r.consensus_error) << ',' << format_number(r.grad_tracker_sum_error) << ','
       << format_number(r.mass_error) << '\n';
}

void write_summary_csv(std::ostream& os, const std::vector<RunOutcome>& runs) {
  os << "tau_max,alpha,status,iters,final_gap,final_mse\n";
  for (const auto& r : runs)
    os << r.tau_max << ',' << format_number(r.alpha) << ',' << to_string(r.result.status) << ',' << r.result.iters
       << ',' << format_number(r.result.final_gap) << ',' << format_number(r.result.final_mse) << '\n';
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) fail(ErrorCode::Io, "cannot write `" + p.string() + "`");
  return f;
}

}  // namespace

RunOutcome run_point(const ExperimentConfig& cfg, int tau_max, double alpha) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto inst = build_instance(cfg, tau_max);
  auto source = make_source(cfg, inst, tau_max);
  RunConfig rc = cfg.run;
  rc.alpha = alpha;
  RunOutcome out;
  out.tau_max = tau_max;
  out.alpha = alpha;
  out.result = run(rc, *source, inst.problem);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

SweepReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int jobs) {
  validate(cfg);
  const auto points = sweep_points(cfg);
  if (!out_dir.empty()) fs::create_directories(out_dir);

  SweepReport rep;
  rep.runs.resize(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        auto& o = rep.runs[i];
        o = run_point(cfg, points[i].first, points[i].second);
        if (!out_dir.empty()) {
          const auto name = trace_file_name(cfg.tag, o.tau_max, o.alpha);
          auto f = open_out(fs::path(out_dir) / name);
          write_trace_csv(f, o.result.trace);
          o.trace_file = (fs::path(out_dir) / name).string();
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (!out_dir.empty()) {
    std::map<int, bool> dumped;
    for (const auto& [tau, alpha] : points) {
      if (dumped[tau] || cfg.switching.enabled) continue;
      dumped[tau] = true;
      const auto inst = build_instance(cfg, tau);
      auto f = open_out(fs::path(out_dir) / (cfg.tag + "_tau" + std::to_string(tau) + "_delays.txt"));
      write_delay_list(f, inst.topology.delays);
    }
    rep.summary_file = (fs::path(out_dir) / (cfg.tag + "_summary.csv")).string();
    auto f = open_out(rep.summary_file);
    write_summary_csv(f, rep.runs);
  }
  return rep;
}

long long iterations_to_gap(const RunResult& r, double gap) {
  for (const auto& t : r.trace)
    if (t.optimality_gap < gap) return t.iter;
  return -1;
}

void write_comparison_csv(std::ostream& os, const RunResult& dtac, const RunResult& addopt) {
  struct Cell {
    std::map<long long, std::string> v;
  };
  auto column = [](const RunResult& r) {
    Cell c;
    for (const auto& t : r.trace) c.v[t.iter] = format_number(t.optimality_gap);
    if (r.status == RunStatus::Diverged) c.v[r.trace.back().iter + 1] = "DIVERGED";
    return c;
  };
  const auto a = column(dtac), b = column(addopt);
  std::map<long long, int> iters;
  for (const auto& [k, _] : a.v) iters[k] = 1;
  for (const auto& [k, _] : b.v) iters[k] = 1;
  os << "iter,dtac_gap,addopt_gap\n";
  for (const auto& [k, _] : iters) {
    auto get = [k](const Cell& c) {
      auto it = c.v.find(k);
      return it == c.v.end() ? std::string() : it->second;
    };
    os << k << ',' << get(a) << ',' << get(b) << '\n';
  }
}

Comparison compare_engines(const ExperimentConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  const auto inst = build_instance(cfg);
  Comparison c;
  {
    auto src = make_source(cfg, inst, cfg.delay.tau_max);
    c.dtac = run(cfg.run, *src, inst.problem);
  }
  {
    auto src = make_source(cfg, inst, cfg.delay.tau_max);
    RunConfig rc = cfg.run;
    rc.engine = EngineKind::AddOptNoDelay;
    c.addopt = run(rc, *src, inst.problem);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    c.file = (fs::path(out_dir) / (cfg.tag + "_compare.csv")).string();
    auto f = open_out(c.file);
    write_comparison_csv(f, c.dtac, c.addopt);
  }
  return c;
}

}  // namespace dtac
