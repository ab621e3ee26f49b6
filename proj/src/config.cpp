#include "dtac/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "dtac/error.hpp"

namespace dtac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  fail(ErrorCode::Config, key + ": cannot parse `" + value + "` as " + expected);
}

template <class T>
T parse_number(const std::string& key, const std::string& v, const char* what) {
  T out{};
  const auto* first = v.data();
  const auto* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, v, what);
  return out;
}

int to_int(const std::string& k, const std::string& v) { return parse_number<int>(k, v, "an integer"); }
std::uint64_t to_u64(const std::string& k, const std::string& v) {
  return parse_number<std::uint64_t>(k, v, "a non-negative integer");
}
long long to_ll(const std::string& k, const std::string& v) { return parse_number<long long>(k, v, "an integer"); }

double to_double(const std::string& k, const std::string& v) {
  // from_chars for double is missing on older libstdc++.
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) bad_value(k, v, "a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(k, v, "a number");
  }
}

bool to_bool(const std::string& k, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(k, v, "a boolean");
}

template <class T, class F>
std::vector<T> to_list(const std::string& k, const std::string& v, F conv) {
  std::vector<T> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(conv(k, trim(item)));
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>)
      s += num(xs[i]);
    else
      s += std::to_string(xs[i]);
  }
  return s;
}

struct KeyDef {
  std::string name, help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeyDef>& key_table() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<KeyDef> table = {
      {"graph.type", "erdos_renyi | exponential | file",
       [](C& c, S v) { c.graph.type = v; }, [](const C& c) { return c.graph.type; }},
      {"graph.n", "number of agents",
       [](C& c, S v) { c.graph.n = to_int("graph.n", v); }, [](const C& c) { return std::to_string(c.graph.n); }},
      {"graph.p", "edge probability of the directed ER model",
       [](C& c, S v) { c.graph.p = to_double("graph.p", v); }, [](const C& c) { return num(c.graph.p); }},
      {"graph.seed", "graph sampling seed",
       [](C& c, S v) { c.graph.seed = to_u64("graph.seed", v); },
       [](const C& c) { return std::to_string(c.graph.seed); }},
      {"graph.file", "edge list (`from to` per line) used when graph.type = file",
       [](C& c, S v) { c.graph.file = v; }, [](const C& c) { return c.graph.file; }},
      {"delay.tau_max", "delay bound",
       [](C& c, S v) { c.delay.tau_max = to_int("delay.tau_max", v); },
       [](const C& c) { return std::to_string(c.delay.tau_max); }},
      {"delay.mode", "uniform | homogeneous | zero",
       [](C& c, S v) { c.delay.mode = delay_mode_from_string(v); },
       [](const C& c) { return to_string(c.delay.mode); }},
      {"delay.seed", "delay sampling seed",
       [](C& c, S v) { c.delay.seed = to_u64("delay.seed", v); },
       [](const C& c) { return std::to_string(c.delay.seed); }},
      {"delay.file", "delay list (`from to tau` per line); overrides graph.* and delay.mode",
       [](C& c, S v) { c.delay.file = v; }, [](const C& c) { return c.delay.file; }},
      {"cost.type", "quadratic | least_squares | logistic | svm",
       [](C& c, S v) { c.cost.type = v; }, [](const C& c) { return c.cost.type; }},
      {"cost.dim", "decision dimension (feature dimension for logistic/svm)",
       [](C& c, S v) { c.cost.dim = to_int("cost.dim", v); }, [](const C& c) { return std::to_string(c.cost.dim); }},
      {"cost.seed", "problem data seed",
       [](C& c, S v) { c.cost.seed = to_u64("cost.seed", v); },
       [](const C& c) { return std::to_string(c.cost.seed); }},
      {"cost.b_scale", "quadratic: standard deviation of the linear terms",
       [](C& c, S v) { c.cost.b_scale = to_double("cost.b_scale", v); }, [](const C& c) { return num(c.cost.b_scale); }},
      {"cost.rows_per_agent", "least_squares: measurement rows per agent",
       [](C& c, S v) { c.cost.rows_per_agent = to_int("cost.rows_per_agent", v); },
       [](const C& c) { return std::to_string(c.cost.rows_per_agent); }},
      {"cost.ridge", "least_squares: ridge weight per agent",
       [](C& c, S v) { c.cost.ridge = to_double("cost.ridge", v); }, [](const C& c) { return num(c.cost.ridge); }},
      {"cost.lambda", "logistic: weight regularizer",
       [](C& c, S v) { c.cost.lambda = to_double("cost.lambda", v); }, [](const C& c) { return num(c.cost.lambda); }},
      {"cost.samples_per_agent", "logistic/svm: samples per agent",
       [](C& c, S v) { c.cost.samples_per_agent = to_int("cost.samples_per_agent", v); },
       [](const C& c) { return std::to_string(c.cost.samples_per_agent); }},
      {"cost.average", "logistic: scale the loss by 1/samples",
       [](C& c, S v) { c.cost.average = to_bool("cost.average", v); },
       [](const C& c) { return std::string(c.cost.average ? "true" : "false"); }},
      {"cost.bias_ridge", "logistic: optional ridge on the bias",
       [](C& c, S v) { c.cost.bias_ridge = to_double("cost.bias_ridge", v); },
       [](const C& c) { return num(c.cost.bias_ridge); }},
      {"cost.separation", "logistic/svm: distance between the two clusters",
       [](C& c, S v) { c.cost.separation = to_double("cost.separation", v); },
       [](const C& c) { return num(c.cost.separation); }},
      {"cost.margin", "svm: loss weight C",
       [](C& c, S v) { c.cost.margin = to_double("cost.margin", v); }, [](const C& c) { return num(c.cost.margin); }},
      {"cost.mu", "svm: smoothing parameter",
       [](C& c, S v) { c.cost.mu = to_double("cost.mu", v); }, [](const C& c) { return num(c.cost.mu); }},
      {"run.alpha", "gradient-tracking step size",
       [](C& c, S v) { c.run.alpha = to_double("run.alpha", v); }, [](const C& c) { return num(c.run.alpha); }},
      {"run.max_iters", "iteration cap",
       [](C& c, S v) { c.run.max_iters = to_ll("run.max_iters", v); },
       [](const C& c) { return std::to_string(c.run.max_iters); }},
      {"run.tol", "stop once the optimality gap drops below this",
       [](C& c, S v) { c.run.tol = to_double("run.tol", v); }, [](const C& c) { return num(c.run.tol); }},
      {"run.engine", "per-node | augmented-oracle | addopt-nodelay",
       [](C& c, S v) { c.run.engine = engine_from_string(v); }, [](const C& c) { return to_string(c.run.engine); }},
      {"run.record_every", "trace cadence in iterations",
       [](C& c, S v) { c.run.record_every = to_int("run.record_every", v); },
       [](const C& c) { return std::to_string(c.run.record_every); }},
      {"run.init_seed", "seed of the initial states",
       [](C& c, S v) { c.run.init_seed = to_u64("run.init_seed", v); },
       [](const C& c) { return std::to_string(c.run.init_seed); }},
      {"run.divergence_threshold", "MSE above which a run is marked DIVERGED",
       [](C& c, S v) { c.run.divergence_threshold = to_double("run.divergence_threshold", v); },
       [](const C& c) { return num(c.run.divergence_threshold); }},
      {"switching.enabled", "redraw graph and delays periodically",
       [](C& c, S v) { c.switching.enabled = to_bool("switching.enabled", v); },
       [](const C& c) { return std::string(c.switching.enabled ? "true" : "false"); }},
      {"switching.period", "iterations between redraws",
       [](C& c, S v) { c.switching.period = to_int("switching.period", v); },
       [](const C& c) { return std::to_string(c.switching.period); }},
      {"switching.require_strong", "false allows individually disconnected epochs (no certified rate)",
       [](C& c, S v) { c.switching.require_strong = to_bool("switching.require_strong", v); },
       [](const C& c) { return std::string(c.switching.require_strong ? "true" : "false"); }},
      {"sweep.tau_max", "comma-separated delay bounds (default: delay.tau_max)",
       [](C& c, S v) { c.sweep.tau_max = to_list<int>("sweep.tau_max", v, to_int); },
       [](const C& c) { return join(c.sweep.tau_max); }},
      {"sweep.alpha", "comma-separated step sizes (default: run.alpha)",
       [](C& c, S v) { c.sweep.alpha = to_list<double>("sweep.alpha", v, to_double); },
       [](const C& c) { return join(c.sweep.alpha); }},
      {"sweep.max_runs", "cap on the sweep cross-product",
       [](C& c, S v) { c.sweep.max_runs = to_int("sweep.max_runs", v); },
       [](const C& c) { return std::to_string(c.sweep.max_runs); }},
      {"spectral.pilot_iters", "horizon of the weight-only pilot run",
       [](C& c, S v) { c.spectral.pilot_iters = to_int("spectral.pilot_iters", v); },
       [](const C& c) { return std::to_string(c.spectral.pilot_iters); }},
      {"spectral.norm", "auto | euclidean | weighted",
       [](C& c, S v) { c.spectral.norm = norm_from_string(v); }, [](const C& c) { return to_string(c.spectral.norm); }},
      {"spectral.c", "override of the norm-equivalence constant c",
       [](C& c, S v) { c.spectral.c = to_double("spectral.c", v); },
       [](const C& c) { return c.spectral.c ? num(*c.spectral.c) : std::string(); }},
      {"spectral.d", "override of the norm-equivalence constant d",
       [](C& c, S v) { c.spectral.d = to_double("spectral.d", v); },
       [](const C& c) { return c.spectral.d ? num(*c.spectral.d) : std::string(); }},
      {"output.tag", "prefix of trace file names",
       [](C& c, S v) { c.tag = v; }, [](const C& c) { return c.tag; }},
  };
  return table;
}

const KeyDef& find_key(const std::string& key) {
  for (const auto& k : key_table())
    if (k.name == key) return k;
  fail(ErrorCode::Config, "unknown config key `" + key + "`");
}

void check(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) fail(ErrorCode::Config, key + ": " + msg);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& k : key_table()) out.push_back({k.name, k.help});
    return out;
  }();
  return keys;
}

namespace {

// Shortest %g form that reads back to the same double; other text unchanged.
std::string short_number(const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || v.find(',') != std::string::npos) return v;
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, d);
    if (std::strtod(buf, nullptr) == d) return buf;
  }
  return v;
}

}  // namespace

std::string config_keys_help() {
  std::ostringstream os;
  os << "Config keys (file lines `section.key = value`, or --set section.key=value):\n";
  const ExperimentConfig defaults;
  for (const auto& k : key_table()) {
    std::string name = "  " + k.name;
    name.resize(std::max<std::size_t>(name.size() + 1, 28), ' ');
    const auto def = short_number(k.get(defaults));
    os << name << k.help;
    if (!def.empty()) os << " [" << def << "]";
    os << "\n";
  }
  return os.str();
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  find_key(key).set(cfg, value);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorCode::Config, "override `" + assignment + "` is not of the form key=value");
  apply_setting(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig cfg) {
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::Config, where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Config, where + "expected `section.key = value`");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(ErrorCode::Config, where + "missing key");
    if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
    try {
      apply_setting(cfg, key, value);
    } catch (const Error& e) {
      fail(e.code() == ErrorCode::Config ? ErrorCode::Config : e.code(), where + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::Config, "cannot open config file `" + path + "`");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void validate(const ExperimentConfig& c) {
  const auto& t = c.graph.type;
  check(t == "erdos_renyi" || t == "exponential" || t == "file", "graph.type", "unknown graph type `" + t + "`");
  check(c.graph.n >= 2, "graph.n", "needs at least 2 agents");
  check(c.graph.p > 0.0 && c.graph.p <= 1.0, "graph.p", "must lie in (0, 1]");
  check(t != "file" || !c.graph.file.empty() || !c.delay.file.empty(), "graph.file", "required when graph.type = file");
  check(c.delay.tau_max >= 0, "delay.tau_max", "must be >= 0");
  const auto& ct = c.cost.type;
  check(ct == "quadratic" || ct == "least_squares" || ct == "logistic" || ct == "svm", "cost.type",
        "unknown cost type `" + ct + "`");
  check(c.cost.dim >= 1, "cost.dim", "must be >= 1");
  check(c.cost.b_scale >= 0.0, "cost.b_scale", "must be >= 0");
  check(c.cost.rows_per_agent >= 1, "cost.rows_per_agent", "must be >= 1");
  check(c.cost.ridge >= 0.0, "cost.ridge", "must be >= 0");
  check(c.cost.lambda > 0.0, "cost.lambda", "must be > 0");
  check(c.cost.samples_per_agent >= 2, "cost.samples_per_agent", "must be >= 2");
  check(c.cost.bias_ridge >= 0.0, "cost.bias_ridge", "must be >= 0");
  check(c.cost.separation >= 0.0, "cost.separation", "must be >= 0");
  check(c.cost.margin > 0.0, "cost.margin", "must be > 0");
  check(c.cost.mu > 0.0, "cost.mu", "must be > 0");
  check(c.run.alpha > 0.0 && std::isfinite(c.run.alpha), "run.alpha", "must be > 0");
  check(c.run.max_iters >= 1, "run.max_iters", "must be >= 1");
  check(c.run.tol >= 0.0, "run.tol", "must be >= 0");
  check(c.run.record_every >= 1, "run.record_every", "must be >= 1");
  check(c.run.divergence_threshold > 0.0, "run.divergence_threshold", "must be > 0");
  check(c.switching.period >= 1, "switching.period", "must be >= 1");
  check(!(c.switching.enabled && (t == "file" || !c.delay.file.empty())), "switching.enabled",
        "switching redraws ER graphs; it cannot be combined with graph or delay files");
  check(!(c.switching.enabled && t == "exponential"), "switching.enabled",
        "switching redraws ER graphs; set graph.type = erdos_renyi");
  for (int tau : c.sweep.tau_max) check(tau >= 0, "sweep.tau_max", "entries must be >= 0");
  for (double a : c.sweep.alpha) check(a > 0.0, "sweep.alpha", "entries must be > 0");
  check(c.sweep.max_runs >= 1, "sweep.max_runs", "must be >= 1");
  const auto runs = sweep_points(c).size();
  check(static_cast<int>(runs) <= c.sweep.max_runs, "sweep.max_runs",
        std::to_string(runs) + " sweep points exceed the budget of " + std::to_string(c.sweep.max_runs));
  check(c.spectral.pilot_iters >= 1, "spectral.pilot_iters", "must be >= 1");
  check(!c.spectral.c || *c.spectral.c > 0.0, "spectral.c", "must be > 0");
  check(!c.spectral.d || *c.spectral.d > 0.0, "spectral.d", "must be > 0");
  check(!c.tag.empty() && c.tag.find('/') == std::string::npos, "output.tag", "must be a non-empty file prefix");
}

std::string to_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& k : key_table()) {
    const auto v = k.get(cfg);
    if (!v.empty()) os << k.name << " = " << v << "\n";
  }
  return os.str();
}

std::vector<std::pair<int, double>> sweep_points(const ExperimentConfig& cfg) {
  const auto taus = cfg.sweep.tau_max.empty() ? std::vector<int>{cfg.delay.tau_max} : cfg.sweep.tau_max;
  const auto alphas = cfg.sweep.alpha.empty() ? std::vector<double>{cfg.run.alpha} : cfg.sweep.alpha;
  std::vector<std::pair<int, double>> out;
  for (int t : taus)
    for (double a : alphas) out.emplace_back(t, a);
  return out;
}

GlobalProblem build_problem(const ExperimentConfig& cfg, int n) {
  const auto& c = cfg.cost;
  if (c.type == "quadratic") return make_quadratic(n, c.dim, c.seed, c.b_scale);
  if (c.type == "least_squares") return make_least_squares(n, c.dim, c.rows_per_agent, c.seed, c.ridge);
  if (c.type == "logistic")
    return make_logistic(n, c.dim, c.samples_per_agent, c.lambda, c.seed, c.average, c.bias_ridge, c.separation);
  if (c.type == "svm") return make_smooth_svm(n, c.dim, c.samples_per_agent, c.margin, c.mu, c.seed, c.separation);
  fail(ErrorCode::Config, "unknown cost type `" + c.type + "`");
}

Instance build_instance(const ExperimentConfig& cfg, std::optional<int> tau_max) {
  const int tau = tau_max.value_or(cfg.delay.tau_max);
  DirectedGraph g;
  DelayMap d;
  if (!cfg.delay.file.empty()) {
    std::ifstream f(cfg.delay.file);
    if (!f) fail(ErrorCode::Config, "cannot open delay file `" + cfg.delay.file + "`");
    auto gd = read_delay_list(f);
    g = std::move(gd.graph);
    d = DelayMap(g, std::max(tau, gd.delays.tau_max()));
    for (const auto& e : gd.delays.links()) d.set_delay(e.from, e.to, gd.delays.delay(e.from, e.to));
  } else {
    if (cfg.graph.type == "erdos_renyi") {
      g = generate_erdos_renyi(cfg.graph.n, cfg.graph.p, cfg.graph.seed);
    } else if (cfg.graph.type == "exponential") {
      g = generate_exponential_graph(cfg.graph.n);
    } else if (cfg.graph.type == "file") {
      std::ifstream f(cfg.graph.file);
      if (!f) fail(ErrorCode::Config, "cannot open graph file `" + cfg.graph.file + "`");
      g = read_edge_list(f);
    } else {
      fail(ErrorCode::Config, "unknown graph type `" + cfg.graph.type + "`");
    }
    d = assign_delays(g, tau, cfg.delay.mode, cfg.delay.seed);
  }
  auto problem = build_problem(cfg, g.size());
  return {std::move(problem), make_topology(std::move(g), std::move(d))};
}

std::unique_ptr<TopologySource> make_source(const ExperimentConfig& cfg, const Instance& inst, int tau_max) {
  if (!cfg.switching.enabled) return std::make_unique<StaticTopology>(inst.topology);
  SwitchingSchedule s;
  s.period = cfg.switching.period;
  s.n = cfg.graph.n;
  s.p = cfg.graph.p;
  s.graph_seed = cfg.graph.seed;
  s.tau_max = tau_max;
  s.delay_mode = cfg.delay.mode;
  s.delay_seed = cfg.delay.seed;
  s.require_strong = cfg.switching.require_strong;
  return std::make_unique<SwitchingTopology>(s);
}

DelayMode delay_mode_from_string(const std::string& s) {
  if (s == "uniform" || s == "uniform-random" || s == "uniform_random") return DelayMode::UniformRandom;
  if (s == "homogeneous" || s == "homogeneous-max" || s == "homogeneous_max") return DelayMode::HomogeneousMax;
  if (s == "zero") return DelayMode::Zero;
  fail(ErrorCode::Config, "delay.mode: unknown mode `" + s + "` (uniform, homogeneous, zero)");
}

std::string to_string(DelayMode m) {
  switch (m) {
    case DelayMode::UniformRandom: return "uniform";
    case DelayMode::HomogeneousMax: return "homogeneous";
    case DelayMode::Zero: return "zero";
  }
  return "?";
}

NormChoice norm_from_string(const std::string& s) {
  if (s == "auto") return NormChoice::Auto;
  if (s == "euclidean") return NormChoice::Euclidean;
  if (s == "weighted") return NormChoice::Weighted;
  fail(ErrorCode::Config, "spectral.norm: unknown norm `" + s + "` (auto, euclidean, weighted)");
}

std::string to_string(NormChoice c) {
  switch (c) {
    case NormChoice::Auto: return "auto";
    case NormChoice::Euclidean: return "euclidean";
    case NormChoice::Weighted: return "weighted";
  }
  return "?";
}

}  // namespace dtac
