// Single-objective fuzzy Q-learning over a scalarized reward.

#pragma once

#include "mofql/fuzzy.hpp"
#include "mofql/pareto.hpp"

#include <Eigen/Core>

#include <random>
#include <span>
#include <vector>

namespace mofql {

/// Rule x action table of scalar Q-values with its learning constants.
struct QTable
{
  Eigen::MatrixXd q;
  double alpha = 0.01;
  double gamma = 0.9;
  double tau = 1.0;

  QTable(Eigen::Index rules, Eigen::Index actions, double alpha, double gamma, double tau,
         double initial = 0.0);

  Eigen::Index rule_count() const { return q.rows(); }
  Eigen::Index action_count() const { return q.cols(); }
};

/// softmax(tau * Q(l, .)).
Eigen::VectorXd action_probabilities(const QTable& table, Eigen::Index rule);

/// One sampled action per active rule, aligned with `firing`.
std::vector<Eigen::Index> select_actions(const QTable& table, const Firing& firing, std::mt19937_64& rng);

/// sum_l phi_l Q(l, a_l)
double global_q(const QTable& table, const Firing& firing, std::span<const Eigen::Index> chosen);

/// sum_l phi_l max_a Q(l, a)
double global_q_max(const QTable& table, const Firing& firing);

/// Fuzzy TD update of the chosen (rule, action) pairs. On terminal
/// transitions the bootstrap term is dropped. Returns the TD error.
double td_update(QTable& table, const Firing& firing_t, std::span<const Eigen::Index> chosen_t,
                 double reward, const Firing& firing_next, bool terminal = false);

/// k1 r_EP + k2 r_ET + k3 r_EO
double scalar_reward(const ObjectiveVector& reward, const ObjectiveVector& weights);

struct ScalarTransition
{
  double reward = 0.0;
  double successor_value = 0.0;
};

/// max over transitions of r + gamma V*(s').
double scalar_bellman_value(std::span<const ScalarTransition> transitions, double gamma);

} // namespace mofql
