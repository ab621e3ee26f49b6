#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dtac/config.hpp"
#include "dtac/optimizer.hpp"

namespace dtac {

struct RunOutcome {
  int tau_max = 0;
  double alpha = 0.0;
  RunResult result;
  std::string trace_file;  // empty when nothing was written
  double seconds = 0.0;
};

/// `<tag>_tau<tau>_alpha<alpha>.csv`
std::string trace_file_name(const std::string& tag, int tau_max, double alpha);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);
void write_summary_csv(std::ostream& os, const std::vector<RunOutcome>& runs);

/// One run of the config at (tau_max, alpha).
RunOutcome run_point(const ExperimentConfig& cfg, int tau_max, double alpha);

struct SweepReport {
  std::vector<RunOutcome> runs;  // in sweep order
  std::string summary_file;
};

/// Runs every sweep point, `jobs` at a time. With a non-empty `out_dir`
/// writes one trace per run, `<tag>_summary.csv`, and the network files
/// `<tag>_tau<tau>_delays.txt`.
SweepReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int jobs = 1);

struct Comparison {
  RunResult dtac;
  RunResult addopt;
  std::string file;
};

/// Iteration at which the recorded gap first drops below `gap`, or -1.
long long iterations_to_gap(const RunResult& r, double gap);

/// The configured engine under delays against ADD-OPT without delays on
/// the same problem, graph and initial states. Writes
/// `<tag>_compare.csv` (iter,dtac_gap,addopt_gap) when `out_dir` is set; a
/// run that diverges gets a DIVERGED cell right after its last row.
Comparison compare_engines(const ExperimentConfig& cfg, const std::string& out_dir);
void write_comparison_csv(std::ostream& os, const RunResult& dtac, const RunResult& addopt);

std::string format_number(double v);

}  // namespace dtac
