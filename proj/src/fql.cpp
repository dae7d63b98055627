#include "mofql/fql.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mofql {

QTable::QTable(Eigen::Index rules, Eigen::Index actions, double alpha_, double gamma_, double tau_,
               double initial)
    : q(Eigen::MatrixXd::Constant(rules, actions, initial)), alpha(alpha_), gamma(gamma_), tau(tau_)
{
  if (rules < 1 || actions < 1)
    throw std::invalid_argument("QTable: need at least one rule and one action");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("QTable: discount must lie in [0, 1]");
  if (!(tau > 0.0))
    throw std::invalid_argument("QTable: temperature must be positive");
}

Eigen::VectorXd action_probabilities(const QTable& table, Eigen::Index rule)
{
  const Eigen::VectorXd logits = table.tau * table.q.row(rule).transpose();
  const Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
  return w / w.sum();
}

std::vector<Eigen::Index> select_actions(const QTable& table, const Firing& firing, std::mt19937_64& rng)
{
  std::vector<Eigen::Index> chosen;
  chosen.reserve(firing.size());
  for (const auto& r : firing)
    chosen.push_back(sample_index(action_probabilities(table, r.rule), rng));
  return chosen;
}

double global_q(const QTable& table, const Firing& firing, std::span<const Eigen::Index> chosen)
{
  if (chosen.size() != firing.size())
    throw std::invalid_argument("global_q: one chosen action per active rule required");
  double v = 0.0;
  for (std::size_t i = 0; i < firing.size(); ++i)
    v += firing[i].strength * table.q(firing[i].rule, chosen[i]);
  return v;
}

double global_q_max(const QTable& table, const Firing& firing)
{
  double v = 0.0;
  for (const auto& r : firing)
    v += r.strength * table.q.row(r.rule).maxCoeff();
  return v;
}

double td_update(QTable& table, const Firing& firing_t, std::span<const Eigen::Index> chosen_t,
                 double reward, const Firing& firing_next, bool terminal)
{
  if (!std::isfinite(reward))
    throw std::domain_error("td_update: non-finite reward");
  const double bootstrap = terminal ? 0.0 : table.gamma * global_q_max(table, firing_next);
  const double error = reward + bootstrap - global_q(table, firing_t, chosen_t);
  for (std::size_t i = 0; i < firing_t.size(); ++i)
    table.q(firing_t[i].rule, chosen_t[i]) += table.alpha * error * firing_t[i].strength;
  return error;
}

double scalar_reward(const ObjectiveVector& reward, const ObjectiveVector& weights)
{
  return weights.dot(reward);
}

double scalar_bellman_value(std::span<const ScalarTransition> transitions, double gamma)
{
  if (transitions.empty())
    throw std::invalid_argument("scalar_bellman_value: no transitions");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : transitions)
    best = std::max(best, t.reward + gamma * t.successor_value);
  return best;
}

} // namespace mofql
