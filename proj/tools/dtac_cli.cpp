#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtac/dtac.h"

namespace {

int exit_code(dtac_status s) {
  switch (s) {
    case DTAC_OK: return 0;
    case DTAC_ERR_CONFIG:
    case DTAC_ERR_INVALID_ARGUMENT:
    case DTAC_ERR_IO: return 1;
    case DTAC_ERR_NO_CERTIFIED_STEP: return 3;
    case DTAC_ERR_SELFTEST: return 4;
    case DTAC_ERR_ENGINE:
    case DTAC_ERR_INTERNAL: return 2;
  }
  return 2;
}

int report(dtac_status s) {
  std::cerr << "error: " << dtac_last_error() << "\n";
  return exit_code(s);
}

struct Common {
  std::string config;
  std::string out = "results";
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "config file (`section.key = value` lines)");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--set", c.sets, "override a config key: section.key=value (repeatable)")->take_all();
  sub->footer(dtac_config_keys_help());
}

using ConfigPtr = std::unique_ptr<dtac_config, decltype(&dtac_config_free)>;

dtac_status load(const Common& c, ConfigPtr& cfg) {
  dtac_config* raw = nullptr;
  if (auto s = dtac_config_new(&raw)) return s;
  cfg.reset(raw);
  if (!c.config.empty())
    if (auto s = dtac_config_load_file(raw, c.config.c_str())) return s;
  for (const auto& kv : c.sets)
    if (auto s = dtac_config_set_assignment(raw, kv.c_str())) return s;
  return dtac_config_validate(raw);
}

int cmd_run(const Common& c) {
  ConfigPtr cfg(nullptr, dtac_config_free);
  if (auto s = load(c, cfg)) return report(s);
  dtac_run* r = nullptr;
  if (auto s = dtac_run_execute(cfg.get(), c.out.c_str(), &r)) return report(s);
  std::cout << "trace " << dtac_run_trace_file(r) << "\n" << dtac_run_status_line(r) << "\n";
  dtac_run_free(r);
  return 0;
}

int cmd_sweep(const Common& c, int jobs) {
  ConfigPtr cfg(nullptr, dtac_config_free);
  if (auto s = load(c, cfg)) return report(s);
  dtac_sweep* sw = nullptr;
  if (auto s = dtac_sweep_execute(cfg.get(), c.out.c_str(), jobs, &sw)) return report(s);
  for (size_t i = 0; i < dtac_sweep_count(sw); ++i) {
    dtac_sweep_entry e;
    dtac_sweep_get(sw, i, &e);
    std::printf("tau_max=%d alpha=%g STATUS %s iters=%lld final_gap=%.6e\n", e.tau_max, e.alpha, e.status, e.iters,
                e.final_gap);
  }
  std::cout << "summary " << dtac_sweep_summary_file(sw) << "\n";
  dtac_sweep_free(sw);
  return 0;
}

int cmd_compare(const Common& c, double gap) {
  ConfigPtr cfg(nullptr, dtac_config_free);
  if (auto s = load(c, cfg)) return report(s);
  dtac_compare* cmp = nullptr;
  if (auto s = dtac_compare_execute(cfg.get(), c.out.c_str(), &cmp)) return report(s);
  const char* names[] = {"dtac", "addopt"};
  for (int w = 0; w < 2; ++w)
    std::printf("%-7s STATUS %s iters=%lld final_gap=%.6e iters_to_gap(%g)=%lld\n", names[w],
                dtac_compare_status(cmp, w), dtac_compare_iterations(cmp, w), dtac_compare_final_gap(cmp, w), gap,
                dtac_compare_iterations_to_gap(cmp, w, gap));
  std::cout << "comparison " << dtac_compare_file(cmp) << "\n";
  dtac_compare_free(cmp);
  return 0;
}

int cmd_spectral(const Common& c, const std::string& delays, bool write) {
  ConfigPtr cfg(nullptr, dtac_config_free);
  if (auto s = load(c, cfg)) return report(s);
  dtac_spectral* sp = nullptr;
  if (auto s = dtac_spectral_analyze(cfg.get(), delays.empty() ? nullptr : delays.c_str(), &sp)) return report(s);
  std::cout << dtac_spectral_text(sp);
  const bool ok = dtac_spectral_certified(sp);
  if (write) {
    std::filesystem::create_directories(c.out);
    std::ofstream f(std::filesystem::path(c.out) / "spectral.txt");
    f << dtac_spectral_record(sp) << "\n";
  }
  if (!ok) std::cerr << "no certified step size: " << dtac_spectral_error(sp) << "\n";
  dtac_spectral_free(sp);
  return ok ? 0 : 3;
}

int cmd_check_bound(const Common& c, const std::string& delays) {
  ConfigPtr cfg(nullptr, dtac_config_free);
  if (auto s = load(c, cfg)) return report(s);
  int holds = 0;
  double rc = 0, rcb = 0, b = 0;
  if (auto s = dtac_check_bound(cfg.get(), delays.empty() ? nullptr : delays.c_str(), &holds, &rc, &rcb, &b))
    return report(s);
  std::printf("rho_C    : %.12g\nrho_Cbar : %.12g\nbound    : %.12g\nholds    : %s\n", rc, rcb, b,
              holds ? "yes" : "no");
  return holds ? 0 : 4;
}

int cmd_selftest(double perturb) {
  dtac_selftest* t = nullptr;
  if (auto s = dtac_selftest_run(perturb, &t)) return report(s);
  std::string failed;
  for (size_t i = 0; i < dtac_selftest_count(t); ++i) {
    const bool ok = dtac_selftest_passed(t, i);
    std::printf("%s %-22s %s\n", ok ? "PASS" : "FAIL", dtac_selftest_name(t, i), dtac_selftest_detail(t, i));
    if (!ok) failed += std::string(failed.empty() ? "" : ", ") + dtac_selftest_name(t, i);
  }
  const bool all = dtac_selftest_all_passed(t);
  dtac_selftest_free(t);
  if (!all) {
    std::cerr << "selftest failed: " << failed << "\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-tolerant distributed optimization over digraphs"};
  app.require_subcommand(1);
  app.footer(dtac_config_keys_help());

  Common run_c, sweep_c, cmp_c, spec_c, bound_c;
  auto* run = app.add_subcommand("run", "single run; trace CSV to --out, status line to stdout");
  add_common(run, run_c);

  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "run the sweep.tau_max x sweep.alpha grid");
  add_common(sweep, sweep_c);
  sweep->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();

  double gap = 1e-4;
  auto* cmp = app.add_subcommand("compare", "delayed engine against delay-free ADD-OPT on the same problem");
  add_common(cmp, cmp_c);
  cmp->add_option("--gap", gap, "gap threshold for the iteration count")->capture_default_str();

  std::string spec_delays;
  bool spec_write = false;
  auto* spec = app.add_subcommand("spectral", "spectral report and certified step size (exit 3 if none)");
  add_common(spec, spec_c);
  spec->add_option("--delays", spec_delays, "delay list `from to tau` replacing the configured network");
  spec->add_flag("--write", spec_write, "also write a key=value record to --out/spectral.txt");

  std::string bound_delays;
  auto* bound = app.add_subcommand("check-bound", "check rho(Cbar) <= rho(C)^(1/(1+tau_max))");
  add_common(bound, bound_c);
  bound->add_option("--delays", bound_delays, "delay list `from to tau` replacing the configured network");

  double perturb = 0.0;
  auto* self = app.add_subcommand("selftest", "invariant suites at desk scale (exit 4 on failure)");
  self->footer(dtac_config_keys_help());
  self->add_option("--perturb-weights", perturb, "test hook: perturb weight matrices by this amount")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*run) return cmd_run(run_c);
  if (*sweep) return cmd_sweep(sweep_c, jobs);
  if (*cmp) return cmd_compare(cmp_c, gap);
  if (*spec) return cmd_spectral(spec_c, spec_delays, spec_write);
  if (*bound) return cmd_check_bound(bound_c, bound_delays);
  if (*self) return cmd_selftest(perturb);
  return 1;
}
