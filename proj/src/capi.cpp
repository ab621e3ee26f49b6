#include "dtac/dtac.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "dtac/config.hpp"
#include "dtac/error.hpp"
#include "dtac/experiment.hpp"
#include "dtac/selftest.hpp"
#include "dtac/spectral.hpp"

using namespace dtac;

struct dtac_config {
  ExperimentConfig cfg;
};

struct dtac_run {
  RunOutcome outcome;
  std::string status, status_line;
};

struct dtac_sweep {
  SweepReport report;
  std::vector<std::string> status;
};

struct dtac_compare {
  Comparison cmp;
  std::string status[2];
};

struct dtac_spectral {
  SpectralReport report;
  std::string text, record;
};

struct dtac_selftest {
  std::vector<SuiteResult> suites;
};

namespace {

thread_local std::string g_last_error;

dtac_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config: return DTAC_ERR_CONFIG;
    case ErrorCode::Engine: return DTAC_ERR_ENGINE;
    case ErrorCode::NoCertifiedStep: return DTAC_ERR_NO_CERTIFIED_STEP;
    case ErrorCode::SelfTest: return DTAC_ERR_SELFTEST;
    case ErrorCode::InvalidArgument: return DTAC_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return DTAC_ERR_IO;
  }
  return DTAC_ERR_INTERNAL;
}

template <class F>
dtac_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return DTAC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return DTAC_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DTAC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DTAC_ERR_INTERNAL;
  }
}

dtac_status null_arg(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return DTAC_ERR_INVALID_ARGUMENT;
}

ExperimentConfig with_delay_file(const dtac_config* cfg, const char* delay_file) {
  ExperimentConfig c = cfg->cfg;
  if (delay_file && *delay_file) c.delay.file = delay_file;
  return c;
}

}  // namespace

extern "C" {

const char* dtac_last_error(void) { return g_last_error.c_str(); }
const char* dtac_version(void) { return "1.0.0"; }
void dtac_string_free(char* s) { delete[] s; }

// --- configuration ---

dtac_status dtac_config_new(dtac_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new dtac_config{}; });
}

void dtac_config_free(dtac_config* cfg) { delete cfg; }

dtac_status dtac_config_load_file(dtac_config* cfg, const char* path) {
  if (!cfg || !path) return null_arg("cfg/path");
  return guarded([&] { cfg->cfg = load_config_file(path, cfg->cfg); });
}

dtac_status dtac_config_parse(dtac_config* cfg, const char* text) {
  if (!cfg || !text) return null_arg("cfg/text");
  return guarded([&] { cfg->cfg = parse_config(text, cfg->cfg); });
}

dtac_status dtac_config_set(dtac_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_arg("cfg/key/value");
  return guarded([&] { apply_setting(cfg->cfg, key, value); });
}

dtac_status dtac_config_set_assignment(dtac_config* cfg, const char* assignment) {
  if (!cfg || !assignment) return null_arg("cfg/assignment");
  return guarded([&] { apply_override(cfg->cfg, assignment); });
}

dtac_status dtac_config_validate(const dtac_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { validate(cfg->cfg); });
}

dtac_status dtac_config_to_text(const dtac_config* cfg, char** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] {
    const auto s = to_text(cfg->cfg);
    *out = new char[s.size() + 1];
    std::memcpy(*out, s.c_str(), s.size() + 1);
  });
}

size_t dtac_config_key_count(void) { return config_keys().size(); }

const char* dtac_config_key_name(size_t i) {
  return i < config_keys().size() ? config_keys()[i].name.c_str() : nullptr;
}

const char* dtac_config_key_help(size_t i) {
  return i < config_keys().size() ? config_keys()[i].help.c_str() : nullptr;
}

const char* dtac_config_keys_help(void) {
  static const std::string help = config_keys_help();
  return help.c_str();
}

// --- single run ---

dtac_status dtac_run_execute(const dtac_config* cfg, const char* out_dir, dtac_run** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] {
    validate(cfg->cfg);
    auto r = std::make_unique<dtac_run>();
    const auto& c = cfg->cfg;
    r->outcome = run_point(c, c.delay.tau_max, c.run.alpha);
    r->status = to_string(r->outcome.result.status);
    r->status_line = status_line(r->outcome.result);
    if (out_dir && *out_dir) {
      namespace fs = std::filesystem;
      fs::create_directories(out_dir);
      const auto path = fs::path(out_dir) / trace_file_name(c.tag, c.delay.tau_max, c.run.alpha);
      std::ofstream f(path);
      if (!f) fail(ErrorCode::Io, "cannot write `" + path.string() + "`");
      write_trace_csv(f, r->outcome.result.trace);
      r->outcome.trace_file = path.string();
      if (!c.switching.enabled) {
        const auto inst = build_instance(c);
        std::ofstream d(fs::path(out_dir) / (c.tag + "_tau" + std::to_string(c.delay.tau_max) + "_delays.txt"));
        write_delay_list(d, inst.topology.delays);
      }
    }
    *out = r.release();
  });
}

void dtac_run_free(dtac_run* r) { delete r; }
const char* dtac_run_status(const dtac_run* r) { return r ? r->status.c_str() : ""; }
const char* dtac_run_status_line(const dtac_run* r) { return r ? r->status_line.c_str() : ""; }
const char* dtac_run_trace_file(const dtac_run* r) { return r ? r->outcome.trace_file.c_str() : ""; }
long long dtac_run_iterations(const dtac_run* r) { return r ? r->outcome.result.iters : 0; }
double dtac_run_final_gap(const dtac_run* r) { return r ? r->outcome.result.final_gap : 0.0; }
double dtac_run_final_mse(const dtac_run* r) { return r ? r->outcome.result.final_mse : 0.0; }
double dtac_run_max_mass_error(const dtac_run* r) { return r ? r->outcome.result.max_mass_error : 0.0; }
double dtac_run_max_tracker_error(const dtac_run* r) { return r ? r->outcome.result.max_tracker_error : 0.0; }
size_t dtac_run_trace_length(const dtac_run* r) { return r ? r->outcome.result.trace.size() : 0; }

dtac_status dtac_run_trace_row(const dtac_run* r, size_t i, dtac_trace_row* out) {
  if (!r || !out) return null_arg("run/out");
  if (i >= r->outcome.result.trace.size()) {
    g_last_error = "trace row out of range";
    return DTAC_ERR_INVALID_ARGUMENT;
  }
  const auto& t = r->outcome.result.trace[i];
  *out = {t.iter, t.optimality_gap, t.mse, t.consensus_error, t.grad_tracker_sum_error, t.mass_error};
  return DTAC_OK;
}

size_t dtac_run_average_estimate(const dtac_run* r, double* buf, size_t len) {
  if (!r) return 0;
  const auto& z = r->outcome.result.z_bar;
  for (size_t i = 0; buf && i < len && i < static_cast<size_t>(z.size()); ++i) buf[i] = z(i);
  return static_cast<size_t>(z.size());
}

// --- sweep ---

dtac_status dtac_sweep_execute(const dtac_config* cfg, const char* out_dir, int jobs, dtac_sweep** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] {
    auto s = std::make_unique<dtac_sweep>();
    s->report = run_experiment(cfg->cfg, out_dir ? out_dir : "", jobs);
    for (const auto& r : s->report.runs) s->status.push_back(to_string(r.result.status));
    *out = s.release();
  });
}

void dtac_sweep_free(dtac_sweep* s) { delete s; }
size_t dtac_sweep_count(const dtac_sweep* s) { return s ? s->report.runs.size() : 0; }

dtac_status dtac_sweep_get(const dtac_sweep* s, size_t i, dtac_sweep_entry* out) {
  if (!s || !out) return null_arg("sweep/out");
  if (i >= s->report.runs.size()) {
    g_last_error = "sweep entry out of range";
    return DTAC_ERR_INVALID_ARGUMENT;
  }
  const auto& r = s->report.runs[i];
  *out = {r.tau_max,         r.alpha,           s->status[i].c_str(), r.result.iters,
          r.result.final_gap, r.result.final_mse, r.trace_file.c_str()};
  return DTAC_OK;
}

const char* dtac_sweep_summary_file(const dtac_sweep* s) { return s ? s->report.summary_file.c_str() : ""; }

// --- comparison ---

dtac_status dtac_compare_execute(const dtac_config* cfg, const char* out_dir, dtac_compare** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] {
    auto c = std::make_unique<dtac_compare>();
    c->cmp = compare_engines(cfg->cfg, out_dir ? out_dir : "");
    c->status[0] = to_string(c->cmp.dtac.status);
    c->status[1] = to_string(c->cmp.addopt.status);
    *out = c.release();
  });
}

void dtac_compare_free(dtac_compare* c) { delete c; }

static const RunResult* pick(const dtac_compare* c, int which) {
  if (!c || which < 0 || which > 1) return nullptr;
  return which == 0 ? &c->cmp.dtac : &c->cmp.addopt;
}

const char* dtac_compare_status(const dtac_compare* c, int which) {
  return pick(c, which) ? c->status[which].c_str() : "";
}
long long dtac_compare_iterations(const dtac_compare* c, int which) {
  const auto* r = pick(c, which);
  return r ? r->iters : -1;
}
double dtac_compare_final_gap(const dtac_compare* c, int which) {
  const auto* r = pick(c, which);
  return r ? r->final_gap : 0.0;
}
long long dtac_compare_iterations_to_gap(const dtac_compare* c, int which, double gap) {
  const auto* r = pick(c, which);
  return r ? iterations_to_gap(*r, gap) : -1;
}
const char* dtac_compare_file(const dtac_compare* c) { return c ? c->cmp.file.c_str() : ""; }

// --- spectral ---

dtac_status dtac_spectral_analyze(const dtac_config* cfg, const char* delay_file, dtac_spectral** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] {
    const auto c = with_delay_file(cfg, delay_file);
    validate(c);
    const auto inst = build_instance(c);
    SpectralOptions opt;
    opt.pilot_iters = c.spectral.pilot_iters;
    opt.norm = c.spectral.norm;
    opt.c_override = c.spectral.c;
    opt.d_override = c.spectral.d;
    auto s = std::make_unique<dtac_spectral>();
    s->report = analyze_spectrum(inst.topology.weights, inst.topology.delays, inst.problem.strong_convexity(),
                                 inst.problem.lipschitz(), opt);
    s->text = format_report_text(s->report);
    s->record = format_report_record(s->report);
    *out = s.release();
  });
}

void dtac_spectral_free(dtac_spectral* s) { delete s; }
int dtac_spectral_certified(const dtac_spectral* s) {
  return s && s->report.step && s->report.step->admissible_max > 0.0;
}
double dtac_spectral_admissible_max(const dtac_spectral* s) {
  return s && s->report.step ? s->report.step->admissible_max : 0.0;
}

dtac_status dtac_spectral_value(const dtac_spectral* s, const char* key, double* out) {
  if (!s || !key || !out) return null_arg("spectral/key/out");
  const auto& r = s->report;
  const std::map<std::string, double> base = {
      {"n", r.n},           {"tau_max", r.tau_max},     {"rho_C", r.rho_C},         {"rho_Cbar", r.rho_Cbar},
      {"bound", r.bound},   {"sigma", r.sigma},         {"sigma1", r.sigma1},       {"rho_sigma", r.rho_sigma},
      {"kappa", r.kappa},   {"kappa_aug", r.kappa_aug}, {"epsilon", r.epsilon},     {"epsilon_aug", r.epsilon_aug},
      {"y", r.pilot.y},     {"y_minus", r.pilot.y_minus}, {"gamma1", r.pilot.gamma1}, {"T", r.pilot.T},
      {"s", r.s},           {"l", r.l},                 {"sigma_cert", r.sigma_cert}};
  if (auto it = base.find(key); it != base.end()) {
    *out = it->second;
    return DTAC_OK;
  }
  if (r.step) {
    const auto& b = *r.step;
    const std::map<std::string, double> step = {{"c", b.inputs.c},       {"d", b.inputs.d},
                                                {"delta", b.delta},      {"theta", b.theta},
                                                {"alpha3", b.alpha3},    {"alpha_cap", b.cap},
                                                {"admissible_max", b.admissible_max}};
    if (auto it = step.find(key); it != step.end()) {
      *out = it->second;
      return DTAC_OK;
    }
  } else {
    g_last_error = "no certified step size: " + r.step_error;
    return DTAC_ERR_NO_CERTIFIED_STEP;
  }
  g_last_error = std::string("unknown spectral key `") + key + "`";
  return DTAC_ERR_INVALID_ARGUMENT;
}

const char* dtac_spectral_text(const dtac_spectral* s) { return s ? s->text.c_str() : ""; }
const char* dtac_spectral_record(const dtac_spectral* s) { return s ? s->record.c_str() : ""; }
const char* dtac_spectral_error(const dtac_spectral* s) { return s ? s->report.step_error.c_str() : ""; }

dtac_status dtac_check_bound(const dtac_config* cfg, const char* delay_file, int* holds, double* rho_c,
                             double* rho_cbar, double* bound) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    const auto c = with_delay_file(cfg, delay_file);
    validate(c);
    const auto inst = build_instance(c);
    const auto b = check_spectral_bound(inst.topology.weights.C, inst.topology.delays);
    if (holds) *holds = b.holds;
    if (rho_c) *rho_c = b.rho_C;
    if (rho_cbar) *rho_cbar = b.rho_Cbar;
    if (bound) *bound = b.bound;
  });
}

// --- self-test ---

dtac_status dtac_selftest_run(double weight_perturbation, dtac_selftest** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    SelfTestOptions opt;
    opt.weight_perturbation = weight_perturbation;
    *out = new dtac_selftest{run_selftest(opt)};
  });
}

void dtac_selftest_free(dtac_selftest* t) { delete t; }
size_t dtac_selftest_count(const dtac_selftest* t) { return t ? t->suites.size() : 0; }
const char* dtac_selftest_name(const dtac_selftest* t, size_t i) {
  return t && i < t->suites.size() ? t->suites[i].name.c_str() : "";
}
int dtac_selftest_passed(const dtac_selftest* t, size_t i) { return t && i < t->suites.size() && t->suites[i].passed; }
const char* dtac_selftest_detail(const dtac_selftest* t, size_t i) {
  return t && i < t->suites.size() ? t->suites[i].detail.c_str() : "";
}
int dtac_selftest_all_passed(const dtac_selftest* t) {
  if (!t) return 0;
  for (const auto& s : t->suites)
    if (!s.passed) return 0;
  return 1;
}

}  // extern "C"
