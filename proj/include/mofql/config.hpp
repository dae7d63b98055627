// Run configuration and its key = value text format.

#pragma once

#include "mofql/fuzzy.hpp"
#include "mofql/learner.hpp"
#include "mofql/peg.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mofql {

struct RunConfig
{
  std::uint64_t seed = 1;
  int episodes = 1000;

  LearnerParams learner;
  RaySpec<double> rays = std::size_t{10};

  InputSpec distance_input{"distance", 0.0, 10.0, 6};
  InputSpec angle_input{"beta_e", -std::numbers::pi / 4.0, std::numbers::pi / 4.0, 5};
  /// Steering angles available to every rule.
  std::vector<double> actions{-std::numbers::pi / 3.0, -std::numbers::pi / 6.0, 0.0, std::numbers::pi / 6.0,
                              std::numbers::pi / 3.0};

  EnvConfig env;

  std::size_t hv_window = 50;
  /// Trajectories of every n-th episode (and the last) go to trajectories.csv.
  int trajectory_every = 100;
  std::string out = "run";

  // eval
  int eval_episodes = 1;
  double eval_jitter = 0.0;

  // sweep
  std::vector<std::size_t> sweep_h{5, 10, 20, 30, 50};
  std::vector<double> sweep_tau{1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<double> sweep_gamma{0.9, 0.7, 0.5, 0.3, 0.1};
  std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
  unsigned threads = 0;

  void validate() const;
};

/// Parses "1.5", "pi", "-pi/4", "3pi/8", "0.25pi".
double parse_real(std::string_view text);

/// Parses "theta:phi;theta:phi;..." with parse_real angles.
std::vector<Ray<double>> parse_ray_list(std::string_view text);

/// Sets one key; throws std::invalid_argument for unknown keys or bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Applies every `key = value` line of `text`; blank lines and `#` comments
/// are ignored.
void apply_config_text(RunConfig& cfg, std::string_view text);

RunConfig load_config(const std::string& path);

/// Canonical text form; feeding it back through apply_config_text reproduces
/// the configuration.
std::string to_config_text(const RunConfig& cfg);

} // namespace mofql
