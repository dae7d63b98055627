// Training, evaluation and sweep drivers plus their CSV artifacts.

#pragma once

#include "mofql/config.hpp"
#include "mofql/fuzzy.hpp"
#include "mofql/learner.hpp"
#include "mofql/peg.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace mofql {

/// Independent random sub-streams derived from one master seed. Each
/// consumer owns its stream, so adding a consumer never shifts another's
/// draws.
enum class Stream : std::uint32_t
{
  Environment = 1,
  Selection = 2,
  Demo = 3,
  Evaluation = 4,
};

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream, std::uint64_t salt = 0);

struct EpisodeRecord
{
  int index = 0;
  Outcome outcome = Outcome::Running;
  int steps = 0;
  ObjectiveVector returns = ObjectiveVector::Zero();
  double global_hypervolume = 0.0;
  double wall_time_ms = 0.0;
};

FuzzyRuleBase make_rule_base(const RunConfig& cfg);
MOQStore make_store(const RunConfig& cfg);

struct TrainingResult
{
  MOQStore store;
  std::vector<EpisodeRecord> episodes;
  std::vector<TrajectoryRow> trajectories;
};

/// Runs cfg.episodes training episodes. Deterministic in (cfg, cfg.seed)
/// apart from the wall-time fields.
TrainingResult run_training(const RunConfig& cfg, bool keep_trajectories = true);

/// Deterministic columns only, so that identical runs give identical bytes.
void write_episodes_csv(std::ostream& os, const std::vector<EpisodeRecord>& episodes);
void write_timing_csv(std::ostream& os, const std::vector<EpisodeRecord>& episodes);
void write_trajectories_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows);

/// Writes store.txt, episodes.csv, timing.csv, trajectories.csv and
/// config.txt under cfg.out.
TrainingResult cmd_train(const RunConfig& cfg);

enum class EvalPolicy
{
  Greedy,
  Random,
};

struct EvalResult
{
  Outcome outcome = Outcome::Running;
  int steps = 0;
  ObjectiveVector returns = ObjectiveVector::Zero();
  std::vector<TrajectoryRow> trajectory;
};

/// One evaluation episode. Start positions are jittered by cfg.eval_jitter
/// from a stream keyed on (cfg.seed, episode), identical for every policy.
/// The random policy steers uniformly in [-pi/3, pi/3].
EvalResult run_eval_episode(const MOQStore* store, const RunConfig& cfg, const Ray<double>& ray,
                            EvalPolicy policy, int episode);

/// The 5 x 5 angle grid used for preference-conditioned evaluation:
/// theta in {pi/4, 3pi/16, pi/8, pi/16, 0}, phi in {pi/2, 3pi/8, pi/4, pi/8, 0}.
std::vector<Ray<double>> evaluation_angle_grid();

struct EvalSummary
{
  Ray<double> ray;
  std::vector<EvalResult> episodes;
  double reach_rate() const;
};

/// Evaluates each ray for cfg.eval_episodes episodes, writing
/// eval_<k>.csv trajectories and eval_summary.csv under cfg.out.
std::vector<EvalSummary> cmd_eval(const std::string& store_path, const RunConfig& cfg,
                                  const std::vector<Ray<double>>& rays, EvalPolicy policy);

struct SweepCell
{
  std::size_t rays = 5;
  double tau = 1.0;
  double gamma = 0.9;
};

struct SweepRun
{
  SweepCell cell;
  std::uint64_t seed = 0;
  double final_global_hypervolume = 0.0;
  double mean_episode_ms = 0.0;
  double total_ms = 0.0;
};

std::vector<SweepCell> sweep_grid(const RunConfig& cfg);

/// Trains every (cell, seed) pair on a worker pool; results are returned in
/// (cell, seed) order regardless of scheduling.
std::vector<SweepRun> run_sweep(const RunConfig& base, const std::vector<SweepCell>& cells,
                                const std::vector<std::uint64_t>& seeds, unsigned threads);

/// One row per cell: means over seeds.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRun>& runs);
void write_sweep_runs_csv(std::ostream& os, const std::vector<SweepRun>& runs);

/// Writes sweep.csv and sweep_runs.csv under cfg.out.
std::vector<SweepRun> cmd_sweep(const RunConfig& cfg);

// Pareto-front demonstration on synthetic point clouds.

enum class DemoShape
{
  Convex,
  Plane,
  Concave,
};

DemoShape demo_shape_from_string(const std::string& s);
std::string to_string(DemoShape s);

/// True for points of the unit cube lying under the shape's surface:
///   convex:  x^2 + y^2 + z^2 <= 1
///   plane:   x + y + z <= 1.5
///   concave: (1-x)^2 + (1-y)^2 + (1-z)^2 >= 1
bool under_surface(DemoShape shape, const ObjectiveVector& p);

struct ParetoDemo
{
  ObjectiveMatrix points;
  NDSetd front;
  std::vector<Index> front_indices;
};

/// Rejection-samples n points under the surface and extracts their front.
ParetoDemo pareto_demo(DemoShape shape, std::size_t n, std::uint64_t seed);

/// Writes points.csv and front.csv under `out`.
ParetoDemo cmd_pareto_demo(DemoShape shape, std::size_t n, std::uint64_t seed, const std::string& out);

} // namespace mofql
