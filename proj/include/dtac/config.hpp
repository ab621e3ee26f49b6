#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dtac/delay.hpp"
#include "dtac/optimizer.hpp"
#include "dtac/spectral.hpp"

namespace dtac {

struct GraphSection {
  std::string type = "erdos_renyi";  // erdos_renyi | exponential | file
  int n = 10;
  double p = 0.5;
  std::uint64_t seed = 7;
  std::string file;
};

struct DelaySection {
  int tau_max = 5;
  DelayMode mode = DelayMode::UniformRandom;
  std::uint64_t seed = 7;
  std::string file;  // `from to tau` list; replaces graph and delays
};

struct CostSection {
  std::string type = "quadratic";  // quadratic | least_squares | logistic | svm
  int dim = 5;
  std::uint64_t seed = 7;
  double b_scale = 1.0;
  int rows_per_agent = 8;
  double ridge = 0.0;
  double lambda = 0.1;
  int samples_per_agent = 20;
  bool average = true;
  double bias_ridge = 0.0;
  double separation = 2.0;
  double margin = 1.0;
  double mu = 10.0;
};

struct SwitchingSection {
  bool enabled = false;
  int period = 2;
  bool require_strong = true;
};

struct SweepSection {
  std::vector<int> tau_max;   // empty: delay.tau_max
  std::vector<double> alpha;  // empty: run.alpha
  int max_runs = 64;
};

struct SpectralSection {
  int pilot_iters = 500;
  NormChoice norm = NormChoice::Auto;
  std::optional<double> c, d;
};

struct ExperimentConfig {
  GraphSection graph;
  DelaySection delay;
  CostSection cost;
  RunConfig run;
  SwitchingSection switching;
  SweepSection sweep;
  SpectralSection spectral;
  std::string tag = "run";
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every recognised `section.key`, in documentation order.
const std::vector<ConfigKey>& config_keys();
std::string config_keys_help();

/// Parses `section.key = value` lines; `#` starts a comment. A bare
/// `[section]` header prefixes following keys that lack a dot.
/// Throws ErrorCode::Config with the line number on malformed input and
/// on unknown keys.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

/// Sets one key (the `--set k=v` path).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Range checks; throws ErrorCode::Config naming the offending key.
void validate(const ExperimentConfig& cfg);

/// Renders the full config in the same text format (round-trips).
std::string to_text(const ExperimentConfig& cfg);

std::vector<std::pair<int, double>> sweep_points(const ExperimentConfig& cfg);

/// The concrete problem and network a config describes.
struct Instance {
  GlobalProblem problem;
  Topology topology;  // static topology (epoch 0 when switching)
};

/// Builds the instance at the given delay bound (defaults to delay.tau_max).
Instance build_instance(const ExperimentConfig& cfg, std::optional<int> tau_max = std::nullopt);
GlobalProblem build_problem(const ExperimentConfig& cfg, int n);
std::unique_ptr<TopologySource> make_source(const ExperimentConfig& cfg, const Instance& inst, int tau_max);

DelayMode delay_mode_from_string(const std::string& s);
std::string to_string(DelayMode m);
NormChoice norm_from_string(const std::string& s);
std::string to_string(NormChoice c);

}  // namespace dtac
