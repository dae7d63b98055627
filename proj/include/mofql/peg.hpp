// Pursuit-evasion game: one evader, one faster pure-pursuit pursuer, a
// target disc on the right edge of the arena and a static obstacle.

#pragma once

#include "mofql/pareto.hpp"

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <numbers>
#include <random>
#include <string>
#include <string_view>

namespace mofql {

inline constexpr double kSteerLimit = std::numbers::pi / 3.0;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

struct AgentState
{
  double x = 0.0;
  double y = 0.0;
  double beta = 0.0;
  double v = 1.0;
  double wheelbase = 0.5;
};

struct Arena
{
  double width = 10.0;
  double height = 10.0;
  Eigen::Vector2d target_center{10.0, 5.0};
  double target_radius = 2.0;
  Eigen::Vector2d obstacle_center{5.0, 5.0};
  double obstacle_radius = 1.0;
  double capture_radius = 0.5;
  double dt = 0.1;
  int max_steps = 500;
  /// Leaving the square ends the episode as a timeout.
  bool walls_end_episode = true;

  void validate() const;
  bool contains(double x, double y) const;
};

struct EnvConfig
{
  Arena arena;
  AgentState evader{0.5, 5.0, 0.0, 1.0, 0.5};
  AgentState pursuer{0.5, 1.0, 0.0, 1.1, 0.5};
  double pursuit_gain = 2.0;
  /// Half-width of the uniform perturbation applied to both start positions.
  double start_jitter = 0.0;
  /// Optional terminal bonuses added to the final reward vector.
  ObjectiveVector reach_bonus = ObjectiveVector::Zero();
  ObjectiveVector capture_bonus = ObjectiveVector::Zero();
  ObjectiveVector collision_bonus = ObjectiveVector::Zero();
};

struct Observation
{
  double d_et = 0.0;
  double d_ep = 0.0;
  double d_eo = 0.0;
  double beta_e = 0.0;

  std::array<double, 4> as_array() const { return {d_et, d_ep, d_eo, beta_e}; }
};

enum class Outcome
{
  Running,
  Reached,
  Captured,
  Collided,
  Timeout,
};

std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

/// Explicit Euler step of the bicycle model with the steering angle clamped
/// to +-pi/3.
AgentState step_kinematics(const AgentState& s, double psi, double dt);

Observation observe(const AgentState& evader, const AgentState& pursuer, const Arena& arena);

/// (r_EP, r_ET, r_EO): growth of the pursuer gap, shrinkage of the target
/// distance, growth of the obstacle distance.
ObjectiveVector reward_vector(const Observation& now, const Observation& next);

/// Proportional pure pursuit toward the evader, saturated at +-pi/3.
double pursuer_policy(const AgentState& pursuer, const AgentState& evader, double gain = 2.0);

/// Precedence Captured > Collided > Reached > Timeout.
Outcome check_termination(const Observation& obs, int step, const Arena& arena, bool in_bounds = true);

struct StepResult
{
  Observation observation;
  ObjectiveVector reward = ObjectiveVector::Zero();
  Outcome outcome = Outcome::Running;
};

class PegEnv
{
public:
  explicit PegEnv(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const AgentState& evader() const { return evader_; }
  const AgentState& pursuer() const { return pursuer_; }
  int steps() const { return steps_; }
  const Observation& observation() const { return obs_; }

  /// Starts a new episode; `rng` is only drawn from when start_jitter > 0.
  Observation reset(std::mt19937_64& rng);
  Observation reset();

  /// Advances both agents one step with the evader steering at `psi`.
  StepResult step(double psi);

private:
  EnvConfig config_;
  AgentState evader_;
  AgentState pursuer_;
  Observation obs_;
  int steps_ = 0;
};

/// One trajectory CSV row.
struct TrajectoryRow
{
  int episode = 0;
  int step = 0;
  AgentState evader;
  AgentState pursuer;
  Observation obs;
  ObjectiveVector reward = ObjectiveVector::Zero();
  Outcome outcome = Outcome::Running;
};

void write_trajectory_header(std::ostream& os);
void write_trajectory_row(std::ostream& os, const TrajectoryRow& row);

} // namespace mofql
