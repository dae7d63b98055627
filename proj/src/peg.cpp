#include "mofql/peg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mofql {

double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a > std::numbers::pi)
    a -= two_pi;
  else if (a <= -std::numbers::pi)
    a += two_pi;
  return a;
}

void Arena::validate() const
{
  if (!(width > 0 && height > 0 && target_radius > 0 && obstacle_radius > 0 && capture_radius > 0 && dt > 0))
    throw std::invalid_argument("arena: sizes, radii and dt must be positive");
  if (max_steps < 1)
    throw std::invalid_argument("arena: max_steps must be at least 1");
}

bool Arena::contains(double x, double y) const
{
  return x >= 0.0 && x <= width && y >= 0.0 && y <= height;
}

std::string_view to_string(Outcome o)
{
  switch (o) {
  case Outcome::Running: return "running";
  case Outcome::Reached: return "reached";
  case Outcome::Captured: return "captured";
  case Outcome::Collided: return "collided";
  case Outcome::Timeout: return "timeout";
  }
  return "unknown";
}

Outcome outcome_from_string(std::string_view s)
{
  for (auto o : {Outcome::Running, Outcome::Reached, Outcome::Captured, Outcome::Collided, Outcome::Timeout})
    if (to_string(o) == s)
      return o;
  throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

AgentState step_kinematics(const AgentState& s, double psi, double dt)
{
  if (!(dt > 0))
    throw std::invalid_argument("step_kinematics: dt must be positive");
  const double steer = std::clamp(psi, -kSteerLimit, kSteerLimit);
  AgentState n = s;
  n.x += s.v * std::cos(s.beta) * dt;
  n.y += s.v * std::sin(s.beta) * dt;
  n.beta = wrap_angle(s.beta + (s.v * steer / s.wheelbase) * dt);
  return n;
}

Observation observe(const AgentState& evader, const AgentState& pursuer, const Arena& arena)
{
  const Eigen::Vector2d e(evader.x, evader.y);
  return {(e - arena.target_center).norm(), (e - Eigen::Vector2d(pursuer.x, pursuer.y)).norm(),
          (e - arena.obstacle_center).norm(), wrap_angle(evader.beta)};
}

ObjectiveVector reward_vector(const Observation& now, const Observation& next)
{
  return {next.d_ep - now.d_ep, now.d_et - next.d_et, next.d_eo - now.d_eo};
}

double pursuer_policy(const AgentState& pursuer, const AgentState& evader, double gain)
{
  const double bearing = std::atan2(evader.y - pursuer.y, evader.x - pursuer.x);
  return std::clamp(gain * wrap_angle(bearing - pursuer.beta), -kSteerLimit, kSteerLimit);
}

Outcome check_termination(const Observation& obs, int step, const Arena& arena, bool in_bounds)
{
  if (obs.d_ep <= arena.capture_radius)
    return Outcome::Captured;
  if (obs.d_eo <= arena.obstacle_radius)
    return Outcome::Collided;
  if (obs.d_et <= arena.target_radius)
    return Outcome::Reached;
  if (step >= arena.max_steps || !in_bounds)
    return Outcome::Timeout;
  return Outcome::Running;
}

PegEnv::PegEnv(EnvConfig config) : config_(std::move(config))
{
  config_.arena.validate();
  if (!(config_.evader.v > 0 && config_.pursuer.v > 0 && config_.evader.wheelbase > 0 &&
        config_.pursuer.wheelbase > 0))
    throw std::invalid_argument("env: speeds and wheelbases must be positive");
  if (!(config_.start_jitter >= 0))
    throw std::invalid_argument("env: start_jitter must be non-negative");
  reset();
}

Observation PegEnv::reset()
{
  evader_ = config_.evader;
  pursuer_ = config_.pursuer;
  steps_ = 0;
  obs_ = observe(evader_, pursuer_, config_.arena);
  return obs_;
}

Observation PegEnv::reset(std::mt19937_64& rng)
{
  reset();
  if (config_.start_jitter > 0) {
    std::uniform_real_distribution<double> jitter(-config_.start_jitter, config_.start_jitter);
    evader_.x += jitter(rng);
    evader_.y += jitter(rng);
    pursuer_.x += jitter(rng);
    pursuer_.y += jitter(rng);
    obs_ = observe(evader_, pursuer_, config_.arena);
  }
  return obs_;
}

StepResult PegEnv::step(double psi)
{
  const double pursuit = pursuer_policy(pursuer_, evader_, config_.pursuit_gain);
  evader_ = step_kinematics(evader_, psi, config_.arena.dt);
  pursuer_ = step_kinematics(pursuer_, pursuit, config_.arena.dt);
  ++steps_;

  StepResult out;
  out.observation = observe(evader_, pursuer_, config_.arena);
  out.reward = reward_vector(obs_, out.observation);
  const bool in_bounds = !config_.arena.walls_end_episode || config_.arena.contains(evader_.x, evader_.y);
  out.outcome = check_termination(out.observation, steps_, config_.arena, in_bounds);
  switch (out.outcome) {
  case Outcome::Reached: out.reward += config_.reach_bonus; break;
  case Outcome::Captured: out.reward += config_.capture_bonus; break;
  case Outcome::Collided: out.reward += config_.collision_bonus; break;
  default: break;
  }
  obs_ = out.observation;
  return out;
}

void write_trajectory_header(std::ostream& os)
{
  os << "# mofql trajectory v1\n"
     << "episode,step,evader_x,evader_y,evader_beta,pursuer_x,pursuer_y,pursuer_beta,"
        "d_et,d_ep,d_eo,r_ep,r_et,r_eo,outcome\n";
}

void write_trajectory_row(std::ostream& os, const TrajectoryRow& r)
{
  os << r.episode << ',' << r.step << ',' << r.evader.x << ',' << r.evader.y << ',' << r.evader.beta << ','
     << r.pursuer.x << ',' << r.pursuer.y << ',' << r.pursuer.beta << ',' << r.obs.d_et << ',' << r.obs.d_ep
     << ',' << r.obs.d_eo << ',' << r.reward(0) << ',' << r.reward(1) << ',' << r.reward(2) << ','
     << to_string(r.outcome) << '\n';
}

}  // namespace mofql
