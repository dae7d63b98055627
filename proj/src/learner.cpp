#include "mofql/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mofql {

MOQStore::MOQStore(Index rules, Index actions, std::vector<Ray<double>> rays, const LearnerParams& params)
    : rules_(rules),
      actions_(actions),
      rays_(std::move(rays)),
      alpha_(params.alpha),
      gamma_(params.gamma),
      tau_(params.tau),
      prune_limit_(params.prune_limit == 0 ? rays_.size() : params.prune_limit),
      reference_(params.reference)
{
  if (rules_ < 1 || actions_ < 1)
    throw std::invalid_argument("MOQStore: need at least one rule and one action");
  if (rays_.empty())
    throw std::invalid_argument("MOQStore: need at least one ray");
  if (!(alpha_ >= 0.0) || !(gamma_ >= 0.0 && gamma_ <= 1.0) || !(tau_ > 0.0))
    throw std::invalid_argument("MOQStore: require alpha >= 0, gamma in [0, 1], tau > 0");
  if (!params.initial.allFinite() || !reference_.allFinite())
    throw std::invalid_argument("MOQStore: non-finite initial value or reference");

  directions_.resize(static_cast<Index>(rays_.size()), 3);
  for (std::size_t i = 0; i < rays_.size(); ++i)
    directions_.row(static_cast<Index>(i)) = rays_[i].direction().transpose();

  qsets_.assign(static_cast<std::size_t>(rules_ * actions_), NDSetd::singleton(params.initial, reference_));
}

std::size_t MOQStore::slot(Index rule, Index action) const
{
  if (rule < 0 || rule >= rules_ || action < 0 || action >= actions_)
    throw std::out_of_range("MOQStore: rule or action index out of range");
  return static_cast<std::size_t>(rule * actions_ + action);
}

void MOQStore::set_qset(Index rule, Index action, NDSetd s)
{
  if (s.empty())
    throw std::invalid_argument("MOQStore: Q-sets may not be empty");
  qsets_[slot(rule, action)] = std::move(s);
}

bool operator==(const MOQStore& a, const MOQStore& b)
{
  return a.rules_ == b.rules_ && a.actions_ == b.actions_ && a.rays_ == b.rays_ && a.alpha_ == b.alpha_ &&
         a.gamma_ == b.gamma_ && a.tau_ == b.tau_ && a.prune_limit_ == b.prune_limit_ &&
         a.reference_ == b.reference_ && a.qsets_ == b.qsets_;
}

Eigen::VectorXd action_hypervolumes(const MOQStore& store, Index rule)
{
  Eigen::VectorXd hv(store.action_count());
  for (Index a = 0; a < store.action_count(); ++a)
    hv(a) = hypervolume3(store.qset(rule, a));
  return hv;
}

HypervolumeSelection<double> select_action_hv(const MOQStore& store, Index rule, std::mt19937_64& rng)
{
  return normalize_and_select(action_hypervolumes(store, rule), store.tau(), rng);
}

std::vector<Index> select_actions_hv(const MOQStore& store, const Firing& firing, std::mt19937_64& rng)
{
  std::vector<Index> chosen;
  chosen.reserve(firing.size());
  for (const auto& r : firing)
    chosen.push_back(select_action_hv(store, r.rule, rng).index);
  return chosen;
}

NDSetd rule_global_nd(const MOQStore& store, Index rule)
{
  Index total = 0;
  for (Index a = 0; a < store.action_count(); ++a)
    total += store.qset(rule, a).size();
  ObjectiveMatrix all(total, 3);
  Index at = 0;
  for (Index a = 0; a < store.action_count(); ++a) {
    const auto& rows = store.qset(rule, a).rows();
    all.middleRows(at, rows.rows()) = rows;
    at += rows.rows();
  }
  return nd_filter(all, store.reference());
}

GlobalPolicySnapshot ray_global_q(const MOQStore& store, const Firing& firing)
{
  GlobalPolicySnapshot snap{ObjectiveMatrix::Zero(store.ray_count(), 3)};
  for (const auto& r : firing) {
    if (r.strength <= 0.0)
      continue;
    const NDSetd front = rule_global_nd(store, r.rule);
    const auto nearest = nearest_rows(front.rows(), store.directions());
    for (Index i = 0; i < store.ray_count(); ++i)
      snap.per_ray.row(i) += r.strength * front.rows().row(nearest[static_cast<std::size_t>(i)]);
  }
  return snap;
}

GlobalPolicySnapshot zero_snapshot(const MOQStore& store)
{
  return {ObjectiveMatrix::Zero(store.ray_count(), 3)};
}

std::vector<ObjectiveMatrix> mo_td_errors(const MOQStore& store, const ObjectiveVector& reward,
                                          const GlobalPolicySnapshot& next, Index rule, Index action)
{
  if (!reward.allFinite())
    throw std::domain_error("mo_td_errors: non-finite reward");
  if (next.per_ray.rows() != store.ray_count())
    throw std::invalid_argument("mo_td_errors: snapshot does not match ray count");
  const auto& q = store.qset(rule, action).rows();
  std::vector<ObjectiveMatrix> errors;
  errors.reserve(static_cast<std::size_t>(store.ray_count()));
  for (Index i = 0; i < store.ray_count(); ++i) {
    const ObjectiveVector target = reward + store.gamma() * next.per_ray.row(i).transpose();
    errors.push_back((-q).rowwise() + target.transpose());
  }
  return errors;
}

NDSetd prune_uniform(const NDSetd& s, const ObjectiveMatrix& ray_directions, std::size_t limit)
{
  const auto n = static_cast<std::size_t>(s.size());
  if (limit == 0)
    throw std::invalid_argument("prune_uniform: limit must be positive");
  if (n <= limit)
    return s;

  std::vector<char> taken(n, 0);
  std::size_t kept = 0;
  const auto nearest = nearest_rows(s.rows(), ray_directions);
  for (std::size_t i = 0; i < nearest.size() && kept < limit; ++i) {
    const auto k = static_cast<std::size_t>(nearest[i]);
    if (!taken[k]) {
      taken[k] = 1;
      ++kept;
    }
  }

  if (kept < limit) {
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < n; ++k)
      if (!taken[k])
        rest.push_back(k);
    std::vector<double> azimuth(n);
    for (std::size_t k : rest)
      azimuth[k] = std::atan2(s.rows()(static_cast<Index>(k), 1), s.rows()(static_cast<Index>(k), 0));
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) { return azimuth[a] < azimuth[b]; });

    const std::size_t slots = limit - kept;
    for (std::size_t j = 0; j < slots; ++j) {
      const auto pick = static_cast<std::size_t>((static_cast<double>(j) + 0.5) * static_cast<double>(rest.size()) /
                                                 static_cast<double>(slots));
      taken[rest[std::min(pick, rest.size() - 1)]] = 1;
    }
  }

  ObjectiveMatrix rows(static_cast<Index>(limit), 3);
  Index at = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (taken[k])
      rows.row(at++) = s.rows().row(static_cast<Index>(k));
  rows.conservativeResize(at, 3);
  return NDSetd::from_nondominated(std::move(rows), s.reference());
}

const NDSetd& update_qsets(MOQStore& store, Index rule, Index action, double phi,
                           const std::vector<ObjectiveMatrix>& errors)
{
  if (!(phi >= 0.0 && phi <= 1.0))
    throw std::invalid_argument("update_qsets: firing strength must lie in [0, 1]");
  if (static_cast<Index>(errors.size()) != store.ray_count())
    throw std::invalid_argument("update_qsets: one error matrix per ray required");
  const auto& current = store.qset(rule, action);
  if (phi == 0.0)
    return current;

  const auto& q = current.rows();
  const Index k = q.rows();
  const double step = store.alpha() * phi;
  ObjectiveMatrix leads(store.ray_count(), 3);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].rows() != k)
      throw std::invalid_argument("update_qsets: error matrix must match the Q-set row count");
    leads.row(static_cast<Index>(i)) = errors[i].row(0);
  }

  // Every row of errors[i] is target_i - q_j, so a ray whose target is
  // dominated contributes only candidates dominated within the same j.
  const auto rays = nd_filter_indices(leads);
  ObjectiveMatrix candidates(k * static_cast<Index>(rays.size()), 3);
  for (std::size_t b = 0; b < rays.size(); ++b)
    candidates.middleRows(static_cast<Index>(b) * k, k) = q + step * errors[static_cast<std::size_t>(rays[b])];

  NDSetd next = nd_filter(candidates, store.reference());
  if (static_cast<std::size_t>(next.size()) > store.prune_limit())
    next = prune_uniform(next, store.directions(), store.prune_limit());
  store.set_qset(rule, action, std::move(next));
  return store.qset(rule, action);
}

void train_step(MOQStore& store, const StepTransition& t)
{
  if (t.chosen_t.size() != t.firing_t.size())
    throw std::invalid_argument("train_step: one chosen action per active rule required");
  const GlobalPolicySnapshot next = t.terminal ? zero_snapshot(store) : ray_global_q(store, t.firing_next);
  for (std::size_t i = 0; i < t.firing_t.size(); ++i) {
    const auto& r = t.firing_t[i];
    if (r.strength <= 0.0)
      continue;
    const auto errors = mo_td_errors(store, t.reward, next, r.rule, t.chosen_t[i]);
    update_qsets(store, r.rule, t.chosen_t[i], r.strength, errors);
  }
}

std::vector<Index> greedy_actions(const MOQStore& store, const Firing& firing, const Ray<double>& ray)
{
  const ObjectiveVector u = ray.direction();
  std::vector<Index> chosen;
  chosen.reserve(firing.size());
  for (const auto& r : firing) {
    Index best = 0;
    double best_hv = -1.0;
    double best_proj = -std::numeric_limits<double>::infinity();
    for (Index a = 0; a < store.action_count(); ++a) {
      const auto& s = store.qset(r.rule, a);
      const ObjectiveVector g = s.row(nearest_row(s.rows(), u));
      const double hv = hypervolume3(ObjectiveMatrix(g.transpose()), store.reference());
      const double proj = g.dot(u);
      if (hv > best_hv || (hv == best_hv && proj > best_proj)) {
        best = a;
        best_hv = hv;
        best_proj = proj;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

double global_hypervolume_metric(std::span<const ObjectiveVector> returns, std::size_t window)
{
  if (window == 0)
    throw std::invalid_argument("global_hypervolume_metric: window must be positive");
  if (returns.empty())
    throw std::invalid_argument("global_hypervolume_metric: no episodes");
  const std::size_t n = std::min(window, returns.size());
  const auto recent = returns.last(n);

  ObjectiveMatrix rows(static_cast<Index>(n), 3);
  ObjectiveVector low = ObjectiveVector::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    rows.row(static_cast<Index>(i)) = recent[i].transpose();
    low = low.cwiseMin(recent[i]);
  }
  const NDSetd front = nd_filter(rows, low);
  return hypervolume3(front);
}

} // namespace mofql
