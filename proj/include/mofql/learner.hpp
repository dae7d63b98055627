// Multi-objective fuzzy Q-learning.
//
// Every (rule, action) pair holds a set of non-dominated Q-vectors. Actions
// are chosen per rule by a softmax over normalized hypervolumes; the
// bootstrap target is evaluated once per preference ray by taking, in every
// active rule, the Q-vector nearest to that ray and blending by firing
// strength. Each update produces one candidate set per ray; their union is
// filtered to its non-dominated part and pruned back to a fixed size.

#pragma once

#include "mofql/fuzzy.hpp"
#include "mofql/pareto.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mofql {

struct LearnerParams
{
  double alpha = 0.01;
  double gamma = 0.9;
  double tau = 2.0;
  /// Maximum rows kept per Q-set; 0 means "one per ray".
  std::size_t prune_limit = 0;
  ObjectiveVector reference = ObjectiveVector::Zero();
  ObjectiveVector initial = ObjectiveVector::Constant(0.01);
};

class MOQStore
{
public:
  MOQStore(Index rules, Index actions, std::vector<Ray<double>> rays, const LearnerParams& params);

  Index rule_count() const { return rules_; }
  Index action_count() const { return actions_; }
  Index ray_count() const { return static_cast<Index>(rays_.size()); }

  const std::vector<Ray<double>>& rays() const { return rays_; }
  /// Unit ray directions, one per row.
  const ObjectiveMatrix& directions() const { return directions_; }

  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  double tau() const { return tau_; }
  std::size_t prune_limit() const { return prune_limit_; }
  const ObjectiveVector& reference() const { return reference_; }

  const NDSetd& qset(Index rule, Index action) const { return qsets_[slot(rule, action)]; }
  void set_qset(Index rule, Index action, NDSetd s);

  friend bool operator==(const MOQStore& a, const MOQStore& b);

private:
  std::size_t slot(Index rule, Index action) const;

  Index rules_;
  Index actions_;
  std::vector<Ray<double>> rays_;
  ObjectiveMatrix directions_;
  double alpha_;
  double gamma_;
  double tau_;
  std::size_t prune_limit_;
  ObjectiveVector reference_;
  std::vector<NDSetd> qsets_;
};

/// Hypervolume of every action's Q-set for one rule.
Eigen::VectorXd action_hypervolumes(const MOQStore& store, Index rule);

/// Softmax-over-normalized-hypervolume draw for one rule.
HypervolumeSelection<double> select_action_hv(const MOQStore& store, Index rule, std::mt19937_64& rng);

/// One hypervolume-selected action per active rule, aligned with `firing`.
std::vector<Index> select_actions_hv(const MOQStore& store, const Firing& firing, std::mt19937_64& rng);

/// ND union of all action Q-sets of one rule.
NDSetd rule_global_nd(const MOQStore& store, Index rule);

/// Q*_i(x) for every ray i, one row per ray.
struct GlobalPolicySnapshot
{
  ObjectiveMatrix per_ray;
};

GlobalPolicySnapshot ray_global_q(const MOQStore& store, const Firing& firing);

/// Bootstrap value used on terminal transitions.
GlobalPolicySnapshot zero_snapshot(const MOQStore& store);

/// Per ray: (reward + gamma Q*_i) minus each row of q(rule, action).
std::vector<ObjectiveMatrix> mo_td_errors(const MOQStore& store, const ObjectiveVector& reward,
                                          const GlobalPolicySnapshot& next, Index rule, Index action);

/// Keeps `limit` rows: first the row nearest each ray (in ray order,
/// deduplicated), then evenly strided picks from the rest ordered by azimuth.
/// Surviving rows keep their original relative order.
NDSetd prune_uniform(const NDSetd& s, const ObjectiveMatrix& ray_directions, std::size_t limit);

/// Applies ND( union_i q + alpha phi eps_i ), prunes, stores and returns the
/// new set. A zero firing strength leaves the store untouched.
const NDSetd& update_qsets(MOQStore& store, Index rule, Index action, double phi,
                           const std::vector<ObjectiveMatrix>& errors);

struct StepTransition
{
  Firing firing_t;
  std::vector<Index> chosen_t;
  ObjectiveVector reward = ObjectiveVector::Zero();
  Firing firing_next;
  bool terminal = false;
};

/// One learning step: bootstrap from the pre-update store, then update the
/// chosen action of every rule active at time t.
void train_step(MOQStore& store, const StepTransition& transition);

/// Deterministic preference-conditioned policy: in every active rule, the
/// action whose Q-vector nearest to `ray` has the largest hypervolume (ties
/// broken by projection onto the ray, then by lowest index).
std::vector<Index> greedy_actions(const MOQStore& store, const Firing& firing, const Ray<double>& ray);

/// Hypervolume of the ND set of the last `window` return vectors, measured
/// from the componentwise minimum of those returns and the origin.
double global_hypervolume_metric(std::span<const ObjectiveVector> returns, std::size_t window);

// Plain-text persistence; see docs in store_io.cpp for the schema.
void save_store(const MOQStore& store, std::ostream& os);
MOQStore load_store(std::istream& is);
void save_store(const MOQStore& store, const std::string& path);
MOQStore load_store(const std::string& path);

} // namespace mofql
