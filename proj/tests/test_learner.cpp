#include "mofql/fql.hpp"
#include "mofql/learner.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace mofql;
using std::numbers::pi;

namespace {

ObjectiveMatrix rows(std::initializer_list<std::array<double, 3>> list)
{
  ObjectiveMatrix m(static_cast<Index>(list.size()), 3);
  Index i = 0;
  for (const auto& r : list)
    m.row(i++) << r[0], r[1], r[2];
  return m;
}

LearnerParams params(double alpha, double gamma, double tau = 1.0)
{
  LearnerParams p;
  p.alpha = alpha;
  p.gamma = gamma;
  p.tau = tau;
  return p;
}

std::vector<Ray<double>> rays(std::size_t h)
{
  return sample_rays(RaySpec<double>{h});
}

bool mutually_nondominated(const NDSetd& s)
{
  const auto pts = oracle::to_points(s.rows());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j && (oracle::dominates(pts[i], pts[j]) || pts[i] == pts[j]))
        return false;
  return true;
}

} // namespace

TEST(MOQStore, InitialisesEverySetToTheSeedVector)
{
  const MOQStore s(4, 3, rays(5), LearnerParams{});
  EXPECT_EQ(s.prune_limit(), 5u);
  for (Index l = 0; l < 4; ++l)
    for (Index a = 0; a < 3; ++a)
      EXPECT_EQ(s.qset(l, a).rows(), rows({{0.01, 0.01, 0.01}}));
  EXPECT_EQ(s.directions().rows(), 5);
}

TEST(MOQStore, Validation)
{
  EXPECT_THROW(MOQStore(0, 1, rays(1), LearnerParams{}), std::invalid_argument);
  EXPECT_THROW(MOQStore(1, 1, {}, LearnerParams{}), std::invalid_argument);
  EXPECT_THROW(MOQStore(1, 1, rays(1), params(0.1, 1.2)), std::invalid_argument);
  EXPECT_THROW(MOQStore(1, 1, rays(1), params(0.1, 0.9, 0.0)), std::invalid_argument);
  MOQStore s(1, 1, rays(1), LearnerParams{});
  EXPECT_THROW(s.qset(1, 0), std::out_of_range);
  EXPECT_THROW(s.set_qset(0, 0, NDSetd{}), std::invalid_argument);
}

TEST(SelectActionHv, ActionTableDistribution)
{
  MOQStore s(1, 6, rays(1), params(0.01, 0.9, 1.0));
  const auto table = rows({{12, 3, 2}, {9, 7, 5}, {3, 13, 2}, {6, 9, 8}, {4, 4, 10}, {1, 1, 14}});
  for (Index a = 0; a < 6; ++a)
    s.set_qset(0, a, NDSetd::from_nondominated(table.middleRows(a, 1)));
  std::mt19937_64 rng(1);
  const auto sel = select_action_hv(s, 0, rng);
  const double probs[] = {0.1494, 0.1875, 0.1503, 0.2091, 0.1622, 0.1415};
  for (Index a = 0; a < 6; ++a)
    EXPECT_NEAR(sel.probabilities(a), probs[a], 5e-5);
}

TEST(SelectActionHv, DominantAndIdenticalSets)
{
  MOQStore s(1, 3, rays(1), params(0.01, 0.9, 2.0));
  std::mt19937_64 rng(1);
  const auto same = select_action_hv(s, 0, rng);
  for (Index a = 0; a < 3; ++a)
    EXPECT_NEAR(same.probabilities(a), 1.0 / 3.0, 1e-15);

  s.set_qset(0, 1, NDSetd::singleton(ObjectiveVector(5, 5, 5)));
  const auto skewed = select_action_hv(s, 0, rng);
  Index best = 0;
  skewed.probabilities.maxCoeff(&best);
  EXPECT_EQ(best, 1);
}

TEST(RuleGlobalNd, Examples)
{
  MOQStore one(1, 1, rays(1), LearnerParams{});
  one.set_qset(0, 0, nd_filter(rows({{1, 2, 3}, {3, 2, 1}})));
  EXPECT_EQ(rule_global_nd(one, 0).rows(), one.qset(0, 0).rows());

  MOQStore two(1, 2, rays(1), LearnerParams{});
  two.set_qset(0, 0, NDSetd::singleton(ObjectiveVector(1, 0, 0)));
  two.set_qset(0, 1, NDSetd::singleton(ObjectiveVector(0, 1, 0)));
  EXPECT_EQ(rule_global_nd(two, 0).rows(), rows({{1, 0, 0}, {0, 1, 0}}));

  two.set_qset(0, 0, NDSetd::singleton(ObjectiveVector(1, 1, 1)));
  two.set_qset(0, 1, NDSetd::singleton(ObjectiveVector(2, 2, 2)));
  EXPECT_EQ(rule_global_nd(two, 0).rows(), rows({{2, 2, 2}}));
}

TEST(RayGlobalQ, SingleRuleAndUniformSets)
{
  const std::vector<Ray<double>> rs{{pi / 2, 0.0}, {0.0, 0.0}};
  MOQStore s(3, 2, rs, LearnerParams{});
  s.set_qset(1, 0, nd_filter(rows({{5, 1, 0}, {0, 1, 5}})));
  s.set_qset(1, 1, NDSetd::singleton(ObjectiveVector(0, 0, 0)));
  const auto snap = ray_global_q(s, Firing{{1, 1.0}});
  ASSERT_EQ(snap.per_ray.rows(), 2);
  EXPECT_EQ(snap.per_ray.row(0), rows({{5, 1, 0}}));
  EXPECT_EQ(snap.per_ray.row(1), rows({{0, 1, 5}}));

  MOQStore u(3, 2, rs, LearnerParams{});
  const auto flat = ray_global_q(u, Firing{{0, 0.2}, {2, 0.8}});
  for (Index i = 0; i < 2; ++i)
    EXPECT_TRUE(flat.per_ray.row(i).isApprox(rows({{0.01, 0.01, 0.01}}), 1e-15));
}

TEST(RayGlobalQ, TwoRulesHandComputed)
{
  const std::vector<Ray<double>> rs{{pi / 2, 0.0}};
  MOQStore s(2, 2, rs, LearnerParams{});
  s.set_qset(0, 0, nd_filter(rows({{4, 0, 0}, {0, 4, 0}})));
  s.set_qset(0, 1, NDSetd::singleton(ObjectiveVector(1, 1, 1)));
  s.set_qset(1, 0, NDSetd::singleton(ObjectiveVector(0, 0, 2)));
  s.set_qset(1, 1, NDSetd::singleton(ObjectiveVector(2, 1, 0)));
  // Rule 0 nearest to the x-axis: [4,0,0]. Rule 1: [2,1,0] (distance 1 vs 2).
  const auto snap = ray_global_q(s, Firing{{0, 0.25}, {1, 0.75}});
  EXPECT_TRUE(snap.per_ray.row(0).isApprox(rows({{0.25 * 4 + 0.75 * 2, 0.75 * 1, 0.0}}), 1e-15));
}

TEST(RayGlobalQ, ConvexCombinationOfContributors)
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 3);
  MOQStore s(6, 3, rays(7), LearnerParams{});
  for (Index l = 0; l < 6; ++l)
    for (Index a = 0; a < 3; ++a) {
      ObjectiveMatrix m(4, 3);
      for (Index i = 0; i < 4; ++i)
        m.row(i) << u(rng), u(rng), u(rng);
      s.set_qset(l, a, nd_filter(m));
    }
  const Firing f{{0, 0.1}, {2, 0.3}, {5, 0.6}};
  const auto snap = ray_global_q(s, f);
  ASSERT_EQ(snap.per_ray.rows(), 7);
  ObjectiveVector lo = ObjectiveVector::Constant(1e9), hi = ObjectiveVector::Constant(-1e9);
  for (const auto& r : f) {
    const auto g = rule_global_nd(s, r.rule);
    lo = lo.cwiseMin(g.rows().colwise().minCoeff().transpose());
    hi = hi.cwiseMax(g.rows().colwise().maxCoeff().transpose());
  }
  for (Index i = 0; i < 7; ++i)
    for (Index k = 0; k < 3; ++k) {
      EXPECT_GE(snap.per_ray(i, k), lo(k) - 1e-12);
      EXPECT_LE(snap.per_ray(i, k), hi(k) + 1e-12);
    }
}

TEST(MoTdErrors, Examples)
{
  MOQStore zero(1, 1, rays(1), params(0.1, 0.0));
  zero.set_qset(0, 0, NDSetd::singleton(ObjectiveVector::Zero()));
  const auto e0 = mo_td_errors(zero, ObjectiveVector(1, 2, 3), zero_snapshot(zero), 0, 0);
  ASSERT_EQ(e0.size(), 1u);
  EXPECT_EQ(e0[0], rows({{1, 2, 3}}));

  MOQStore s(1, 1, rays(1), params(0.1, 0.5));
  s.set_qset(0, 0, nd_filter(rows({{1, 1, 1}, {0, 2, 1}})));
  const GlobalPolicySnapshot next{rows({{2, 2, 2}})};
  const auto e = mo_td_errors(s, ObjectiveVector(1, 1, 1), next, 0, 0);
  EXPECT_EQ(e[0], rows({{1, 1, 1}, {2, 0, 1}}));

  s.set_qset(0, 0, NDSetd::singleton(ObjectiveVector(0, 0, 0)));
  EXPECT_EQ(mo_td_errors(s, ObjectiveVector(0, 0, 0), GlobalPolicySnapshot{rows({{0, 0, 0}})}, 0, 0)[0],
            rows({{0, 0, 0}}));
}

TEST(MoTdErrors, Validation)
{
  MOQStore s(1, 1, rays(2), LearnerParams{});
  EXPECT_THROW(mo_td_errors(s, ObjectiveVector(NAN, 0, 0), zero_snapshot(s), 0, 0), std::domain_error);
  EXPECT_THROW(mo_td_errors(s, ObjectiveVector::Zero(), GlobalPolicySnapshot{rows({{0, 0, 0}})}, 0, 0),
               std::invalid_argument);
}

TEST(UpdateQsets, HandExamples)
{
  LearnerParams p = params(1.0, 0.9);
  p.initial = ObjectiveVector(1, 1, 1);
  MOQStore s(1, 1, rays(1), p);
  EXPECT_EQ(update_qsets(s, 0, 0, 1.0, {rows({{1, 0, 0}})}).rows(), rows({{2, 1, 1}}));

  MOQStore frozen(1, 1, rays(3), params(0.0, 0.9));
  const auto before = frozen.qset(0, 0);
  update_qsets(frozen, 0, 0, 1.0, {rows({{1, 0, 0}}), rows({{0, 1, 0}}), rows({{0, 0, 1}})});
  EXPECT_EQ(frozen.qset(0, 0), before);

  LearnerParams q = params(1.0, 0.9);
  q.initial = ObjectiveVector(1, 1, 1);
  MOQStore two(1, 1, rays(2), q);
  const auto& out = update_qsets(two, 0, 0, 1.0, {rows({{1, 0, 0}}), rows({{0, 1, 0}})});
  EXPECT_EQ(out.rows(), rows({{2, 1, 1}, {1, 2, 1}}));
}

TEST(UpdateQsets, ZeroFiringLeavesStoreUntouched)
{
  MOQStore s(1, 1, rays(1), params(1.0, 0.9));
  const auto before = s;
  update_qsets(s, 0, 0, 0.0, {rows({{5, 5, 5}})});
  EXPECT_EQ(s, before);
  EXPECT_THROW(update_qsets(s, 0, 0, 1.5, {rows({{5, 5, 5}})}), std::invalid_argument);
  EXPECT_THROW(update_qsets(s, 0, 0, 0.5, {}), std::invalid_argument);
}

TEST(UpdateQsets, RayPrefilterDoesNotChangeTheResult)
{
  // Reference: ND of the full union, pruned, computed without skipping rays.
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t h = 1 + t % 12;
    LearnerParams p = params(0.5, 0.9);
    p.prune_limit = 1 + t % 7;
    MOQStore s(1, 1, rays(h), p);
    ObjectiveMatrix start(5, 3);
    for (Index i = 0; i < 5; ++i)
      start.row(i) << u(rng), u(rng), u(rng);
    s.set_qset(0, 0, nd_filter(start));
    const auto& q = s.qset(0, 0).rows();

    std::vector<ObjectiveMatrix> errors;
    ObjectiveMatrix all(q.rows() * static_cast<Index>(h), 3);
    for (std::size_t i = 0; i < h; ++i) {
      const ObjectiveVector target(u(rng), u(rng), u(rng));
      errors.push_back((-q).rowwise() + target.transpose());
      all.middleRows(static_cast<Index>(i) * q.rows(), q.rows()) = q + 0.5 * 0.7 * errors.back();
    }
    NDSetd want = nd_filter(all);
    if (static_cast<std::size_t>(want.size()) > s.prune_limit())
      want = prune_uniform(want, s.directions(), s.prune_limit());

    auto got = oracle::to_points(update_qsets(s, 0, 0, 0.7, errors).rows());
    auto ref = oracle::to_points(want.rows());
    std::sort(got.begin(), got.end());
    std::sort(ref.begin(), ref.end());
    EXPECT_EQ(got, ref);
  }
}

TEST(PruneUniform, KeepsRayAnchorsAndLimit)
{
  const std::vector<Ray<double>> rs{{pi / 2, 0.0}, {0.0, 0.0}};
  ObjectiveMatrix m(8, 3);
  for (Index i = 0; i < 8; ++i) {
    const double t = (pi / 2) * i / 7.0;
    m.row(i) << std::cos(t), std::sin(t) * 0.5, std::sin(t) * 0.5 + (i == 7 ? 1.0 : 0.0);
  }
  const auto s = nd_filter(m);
  ASSERT_EQ(s.size(), 8);
  ObjectiveMatrix dirs(2, 3);
  dirs.row(0) = rs[0].direction().transpose();
  dirs.row(1) = rs[1].direction().transpose();

  const auto pruned = prune_uniform(s, dirs, 4);
  ASSERT_EQ(pruned.size(), 4);
  EXPECT_EQ(pruned.rows().row(0), s.rows().row(0));
  EXPECT_EQ(pruned.rows().row(3), s.rows().row(7));
  EXPECT_TRUE(mutually_nondominated(pruned));

  EXPECT_EQ(prune_uniform(s, dirs, 8), s);
  EXPECT_EQ(prune_uniform(s, dirs, 1).size(), 1);
  EXPECT_THROW(prune_uniform(s, dirs, 0), std::invalid_argument);
}

TEST(UpdateQsets, InvariantsHoldUnderRandomUpdates)
{
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1), phi(0, 1);
  MOQStore s(3, 2, rays(6), params(0.3, 0.9));
  for (int t = 0; t < 2000; ++t) {
    const Index l = static_cast<Index>(rng() % 3), a = static_cast<Index>(rng() % 2);
    GlobalPolicySnapshot next{ObjectiveMatrix(6, 3)};
    for (Index i = 0; i < 6; ++i)
      next.per_ray.row(i) << u(rng), u(rng), u(rng);
    const auto errors = mo_td_errors(s, ObjectiveVector(u(rng), u(rng), u(rng)), next, l, a);
    const auto& out = update_qsets(s, l, a, phi(rng), errors);
    ASSERT_GE(out.size(), 1);
    ASSERT_LE(static_cast<std::size_t>(out.size()), s.prune_limit());
    ASSERT_TRUE(mutually_nondominated(out));
  }
}

TEST(TrainStep, TerminalUsesZeroBootstrapAndTouchesOnlyActiveRules)
{
  LearnerParams p = params(1.0, 0.9);
  p.initial = ObjectiveVector(1, 1, 1);
  MOQStore s(3, 2, rays(1), p);
  const auto before = s;
  StepTransition t;
  t.firing_t = {{1, 1.0}};
  t.chosen_t = {0};
  t.reward = ObjectiveVector(2, 3, 4);
  t.firing_next = {{2, 1.0}};
  t.terminal = true;
  train_step(s, t);
  EXPECT_EQ(s.qset(1, 0).rows(), rows({{2, 3, 4}}));
  EXPECT_EQ(s.qset(1, 1), before.qset(1, 1));
  EXPECT_EQ(s.qset(0, 0), before.qset(0, 0));
  EXPECT_EQ(s.qset(2, 0), before.qset(2, 0));

  t.terminal = false;
  t.chosen_t = {1};
  train_step(s, t);
  EXPECT_TRUE(s.qset(1, 1).rows().isApprox(rows({{2 + 0.9, 3 + 0.9, 4 + 0.9}}), 1e-15));
  EXPECT_THROW(train_step(s, StepTransition{{{0, 1.0}}, {}, ObjectiveVector::Zero(), {{0, 1.0}}, false}),
               std::invalid_argument);
}

TEST(TrainStep, BootstrapsFromThePreUpdateStore)
{
  // The next state shares the rule being updated; the target must use the
  // value before this step's update.
  LearnerParams p = params(0.5, 1.0);
  p.initial = ObjectiveVector(1, 1, 1);
  MOQStore s(1, 1, rays(1), p);
  train_step(s, StepTransition{{{0, 1.0}}, {0}, ObjectiveVector(1, 1, 1), {{0, 1.0}}, false});
  EXPECT_TRUE(s.qset(0, 0).rows().isApprox(rows({{1.5, 1.5, 1.5}}), 1e-15));
}

// One rule, two actions, one ray, identical reward components: every
// component of the (singleton) Q-sets must follow the scalar learner.
TEST(TrainStep, ScalarEquivalenceOnAToyProblem)
{
  const double alpha = 0.1, gamma = 0.8;
  LearnerParams p = params(alpha, gamma, 2.0);
  MOQStore mo(1, 2, {{pi / 4, pi / 4}}, p);
  QTable sc(1, 2, alpha, gamma, 2.0, 0.01);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> r(-1.0, 1.0);
  for (int step = 0; step < 10000; ++step) {
    const Index a = static_cast<Index>(rng() % 2);
    const double reward = r(rng) + (a == 1 ? 0.3 : 0.0);
    const bool terminal = step % 37 == 36;
    const std::vector<Index> chosen{a};
    train_step(mo, StepTransition{{{0, 1.0}}, chosen, ObjectiveVector::Constant(reward), {{0, 1.0}}, terminal});
    td_update(sc, Firing{{0, 1.0}}, chosen, reward, Firing{{0, 1.0}}, terminal);
    for (Index k = 0; k < 2; ++k) {
      ASSERT_EQ(mo.qset(0, k).size(), 1);
      for (Index c = 0; c < 3; ++c)
        ASSERT_NEAR(mo.qset(0, k).rows()(0, c), sc.q(0, k), 1e-9) << "step " << step;
    }
  }
}

TEST(GreedyActions, PicksLargestHypervolumeNearTheRay)
{
  const Ray<double> x_axis{pi / 2, 0.0};
  MOQStore s(2, 3, {x_axis}, LearnerParams{});
  s.set_qset(0, 0, NDSetd::singleton(ObjectiveVector(1, 1, 1)));
  s.set_qset(0, 1, nd_filter(rows({{4, 1, 1}, {0.5, 9, 9}})));
  s.set_qset(0, 2, NDSetd::singleton(ObjectiveVector(3, 1, 1)));
  // Rule 1: all volumes zero, so the projection onto the ray decides.
  s.set_qset(1, 0, NDSetd::singleton(ObjectiveVector(1, -1, 0)));
  s.set_qset(1, 1, NDSetd::singleton(ObjectiveVector(2, -1, 0)));
  s.set_qset(1, 2, NDSetd::singleton(ObjectiveVector(2, -1, 0)));
  const auto chosen = greedy_actions(s, Firing{{0, 0.5}, {1, 0.5}}, x_axis);
  EXPECT_EQ(chosen, (std::vector<Index>{1, 1}));
}

TEST(GlobalHypervolumeMetric, Examples)
{
  const std::vector<ObjectiveVector> one{ObjectiveVector(1, 1, 1)};
  EXPECT_DOUBLE_EQ(global_hypervolume_metric(one, 10), 1.0);

  const std::vector<ObjectiveVector> same{ObjectiveVector(2, 3, 4), ObjectiveVector(2, 3, 4)};
  EXPECT_DOUBLE_EQ(global_hypervolume_metric(same, 10), 24.0);

  std::vector<ObjectiveVector> h{ObjectiveVector(-1, 2, 0.5), ObjectiveVector(1, -2, 1), ObjectiveVector(0, 0, 2)};
  const double base = global_hypervolume_metric(h, 10);
  auto with_dominated = h;
  with_dominated.insert(with_dominated.begin() + 1, ObjectiveVector(-1, -2, 0.5));
  EXPECT_DOUBLE_EQ(global_hypervolume_metric(with_dominated, 10), base);

  // Measured from min(returns, 0) = (-1, -2, 0).
  const double want =
      oracle::hv_grid({{-1, 2, 0.5}, {1, -2, 1}, {0, 0, 2}}, {-1, -2, 0});
  EXPECT_NEAR(base, want, 1e-12);
}

TEST(GlobalHypervolumeMetric, WindowAndErrors)
{
  const std::vector<ObjectiveVector> h{ObjectiveVector(9, 9, 9), ObjectiveVector(1, 1, 1)};
  EXPECT_DOUBLE_EQ(global_hypervolume_metric(h, 1), 1.0);
  EXPECT_THROW(global_hypervolume_metric(h, 0), std::invalid_argument);
  EXPECT_THROW(global_hypervolume_metric(std::span<const ObjectiveVector>{}, 3), std::invalid_argument);
}
