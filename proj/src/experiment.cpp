#include "mofql/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace mofql {

namespace {

std::string fmt(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_output(const std::string& dir, const std::string& name)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const auto path = (std::filesystem::path(dir) / name).string();
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

bool is_terminal(Outcome o)
{
  return o == Outcome::Reached || o == Outcome::Captured || o == Outcome::Collided;
}

std::vector<double> chosen_angles(const RunConfig& cfg, const std::vector<Index>& chosen)
{
  std::vector<double> out;
  out.reserve(chosen.size());
  for (Index a : chosen)
    out.push_back(cfg.actions[static_cast<std::size_t>(a)]);
  return out;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

} // namespace

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream, std::uint64_t salt)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(salt),
                    static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

FuzzyRuleBase make_rule_base(const RunConfig& cfg)
{
  InputSpec d_et = cfg.distance_input;
  InputSpec d_ep = cfg.distance_input;
  InputSpec d_eo = cfg.distance_input;
  d_et.name = "d_et";
  d_ep.name = "d_ep";
  d_eo.name = "d_eo";
  return FuzzyRuleBase({d_et, d_ep, d_eo, cfg.angle_input});
}

MOQStore make_store(const RunConfig& cfg)
{
  const auto rules = make_rule_base(cfg).rule_count();
  return MOQStore(rules, static_cast<Index>(cfg.actions.size()), sample_rays(cfg.rays), cfg.learner);
}

TrainingResult run_training(const RunConfig& cfg, bool keep_trajectories)
{
  cfg.validate();
  const FuzzyRuleBase rules = make_rule_base(cfg);
  TrainingResult result{make_store(cfg), {}, {}};
  PegEnv env(cfg.env);
  auto env_rng = make_stream(cfg.seed, Stream::Environment);
  auto select_rng = make_stream(cfg.seed, Stream::Selection);

  std::vector<ObjectiveVector> returns;
  returns.reserve(static_cast<std::size_t>(cfg.episodes));
  result.episodes.reserve(static_cast<std::size_t>(cfg.episodes));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto start = Clock::now();
    const bool log = keep_trajectories && (ep % cfg.trajectory_every == 0 || ep + 1 == cfg.episodes);

    Observation obs = env.reset(env_rng);
    StepTransition t;
    t.firing_t = rules.firing_strengths(obs.as_array());
    EpisodeRecord rec;
    rec.index = ep;
    if (log)
      result.trajectories.push_back({ep, 0, env.evader(), env.pursuer(), obs, ObjectiveVector::Zero(), Outcome::Running});

    while (true) {
      t.chosen_t = select_actions_hv(result.store, t.firing_t, select_rng);
      const double psi = defuzzify(t.firing_t, chosen_angles(cfg, t.chosen_t));
      const StepResult step = env.step(psi);
      t.reward = step.reward;
      t.firing_next = rules.firing_strengths(step.observation.as_array());
      t.terminal = is_terminal(step.outcome);
      train_step(result.store, t);

      rec.returns += step.reward;
      if (log)
        result.trajectories.push_back(
            {ep, env.steps(), env.evader(), env.pursuer(), step.observation, step.reward, step.outcome});
      std::swap(t.firing_t, t.firing_next);
      if (step.outcome != Outcome::Running) {
        rec.outcome = step.outcome;
        break;
      }
    }
    rec.steps = env.steps();
    returns.push_back(rec.returns);
    rec.global_hypervolume = global_hypervolume_metric(returns, cfg.hv_window);
    rec.wall_time_ms = elapsed_ms(start);
    result.episodes.push_back(rec);
  }
  return result;
}

void write_episodes_csv(std::ostream& os, const std::vector<EpisodeRecord>& episodes)
{
  os << "# mofql episodes v1; global_hypervolume is the hypervolume of the non-dominated recent episode "
        "returns (reconstructed metric)\n"
     << "episode,outcome,steps,return_evade,return_reach,return_avoid,global_hypervolume\n";
  for (const auto& e : episodes)
    os << e.index << ',' << to_string(e.outcome) << ',' << e.steps << ',' << fmt(e.returns(0)) << ','
       << fmt(e.returns(1)) << ',' << fmt(e.returns(2)) << ',' << fmt(e.global_hypervolume) << '\n';
}

void write_timing_csv(std::ostream& os, const std::vector<EpisodeRecord>& episodes)
{
  os << "# mofql timing v1\n"
     << "episode,steps,wall_time_ms\n";
  for (const auto& e : episodes)
    os << e.index << ',' << e.steps << ',' << fmt(e.wall_time_ms) << '\n';
}

void write_trajectories_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows)
{
  const auto old = os.precision(10);
  write_trajectory_header(os);
  for (const auto& r : rows)
    write_trajectory_row(os, r);
  os.precision(old);
}

TrainingResult cmd_train(const RunConfig& cfg)
{
  auto episodes_os = open_output(cfg.out, "episodes.csv");
  TrainingResult result = run_training(cfg);
  write_episodes_csv(episodes_os, result.episodes);
  auto timing_os = open_output(cfg.out, "timing.csv");
  write_timing_csv(timing_os, result.episodes);
  auto traj_os = open_output(cfg.out, "trajectories.csv");
  write_trajectories_csv(traj_os, result.trajectories);
  auto config_os = open_output(cfg.out, "config.txt");
  config_os << to_config_text(cfg);
  save_store(result.store, (std::filesystem::path(cfg.out) / "store.txt").string());
  if (!episodes_os || !timing_os || !traj_os || !config_os)
    throw std::runtime_error("failed writing run artifacts under '" + cfg.out + "'");
  return result;
}

EvalResult run_eval_episode(const MOQStore* store, const RunConfig& cfg, const Ray<double>& ray,
                            EvalPolicy policy, int episode)
{
  if (policy == EvalPolicy::Greedy && store == nullptr)
    throw std::invalid_argument("greedy evaluation needs a store");
  const FuzzyRuleBase rules = make_rule_base(cfg);
  if (store && (store->rule_count() != rules.rule_count() ||
                store->action_count() != static_cast<Index>(cfg.actions.size())))
    throw std::invalid_argument("store dimensions do not match the configured rule base and action set");

  EnvConfig env_cfg = cfg.env;
  env_cfg.start_jitter = cfg.eval_jitter;
  PegEnv env(env_cfg);
  auto start_rng = make_stream(cfg.seed, Stream::Evaluation, static_cast<std::uint64_t>(episode));
  auto steer_rng = make_stream(cfg.seed, Stream::Selection, static_cast<std::uint64_t>(episode) + 1);
  std::uniform_real_distribution<double> steer(-kSteerLimit, kSteerLimit);

  EvalResult out;
  Observation obs = env.reset(start_rng);
  out.trajectory.push_back({episode, 0, env.evader(), env.pursuer(), obs, ObjectiveVector::Zero(), Outcome::Running});
  while (true) {
    double psi = 0.0;
    if (policy == EvalPolicy::Greedy) {
      const Firing firing = rules.firing_strengths(obs.as_array());
      psi = defuzzify(firing, chosen_angles(cfg, greedy_actions(*store, firing, ray)));
    } else {
      psi = steer(steer_rng);
    }
    const StepResult step = env.step(psi);
    out.returns += step.reward;
    obs = step.observation;
    out.trajectory.push_back({episode, env.steps(), env.evader(), env.pursuer(), obs, step.reward, step.outcome});
    if (step.outcome != Outcome::Running) {
      out.outcome = step.outcome;
      break;
    }
  }
  out.steps = env.steps();
  return out;
}

std::vector<Ray<double>> evaluation_angle_grid()
{
  constexpr double pi = std::numbers::pi;
  const double thetas[] = {pi / 4, 3 * pi / 16, pi / 8, pi / 16, 0.0};
  const double phis[] = {pi / 2, 3 * pi / 8, pi / 4, pi / 8, 0.0};
  std::vector<Ray<double>> grid;
  for (double t : thetas)
    for (double p : phis)
      grid.push_back({t, p});
  return grid;
}

double EvalSummary::reach_rate() const
{
  if (episodes.empty())
    return 0.0;
  std::size_t reached = 0;
  for (const auto& e : episodes)
    reached += e.outcome == Outcome::Reached;
  return static_cast<double>(reached) / static_cast<double>(episodes.size());
}

std::vector<EvalSummary> cmd_eval(const std::string& store_path, const RunConfig& cfg,
                                  const std::vector<Ray<double>>& rays, EvalPolicy policy)
{
  const MOQStore store = load_store(store_path);
  std::vector<EvalSummary> summaries;
  auto summary_os = open_output(cfg.out, "eval_summary.csv");
  summary_os << "# mofql eval v1\n"
             << "ray,theta,phi,episode,outcome,steps,return_evade,return_reach,return_avoid,trajectory\n";
  for (std::size_t k = 0; k < rays.size(); ++k) {
    EvalSummary s{rays[k], {}};
    const std::string name = "eval_" + std::to_string(k) + ".csv";
    auto traj_os = open_output(cfg.out, name);
    std::vector<TrajectoryRow> rows;
    for (int ep = 0; ep < cfg.eval_episodes; ++ep) {
      auto r = run_eval_episode(&store, cfg, rays[k], policy, ep);
      rows.insert(rows.end(), r.trajectory.begin(), r.trajectory.end());
      summary_os << k << ',' << fmt(rays[k].theta) << ',' << fmt(rays[k].phi) << ',' << ep << ','
                 << to_string(r.outcome) << ',' << r.steps << ',' << fmt(r.returns(0)) << ',' << fmt(r.returns(1))
                 << ',' << fmt(r.returns(2)) << ',' << name << '\n';
      s.episodes.push_back(std::move(r));
    }
    write_trajectories_csv(traj_os, rows);
    summaries.push_back(std::move(s));
  }
  if (!summary_os)
    throw std::runtime_error("failed writing eval_summary.csv");
  return summaries;
}

std::vector<SweepCell> sweep_grid(const RunConfig& cfg)
{
  std::vector<SweepCell> cells;
  for (std::size_t h : cfg.sweep_h)
    for (double tau : cfg.sweep_tau)
      for (double gamma : cfg.sweep_gamma)
        cells.push_back({h, tau, gamma});
  return cells;
}

std::vector<SweepRun> run_sweep(const RunConfig& base, const std::vector<SweepCell>& cells,
                                const std::vector<std::uint64_t>& seeds, unsigned threads)
{
  if (cells.empty() || seeds.empty())
    throw std::invalid_argument("sweep: empty grid or seed list");
  std::vector<SweepRun> runs(cells.size() * seeds.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t s = 0; s < seeds.size(); ++s)
      runs[c * seeds.size() + s] = SweepRun{cells[c], seeds[s]};

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        RunConfig cfg = base;
        cfg.seed = runs[i].seed;
        cfg.rays = runs[i].cell.rays;
        cfg.learner.tau = runs[i].cell.tau;
        cfg.learner.gamma = runs[i].cell.gamma;
        const auto start = Clock::now();
        const TrainingResult r = run_training(cfg, false);
        runs[i].total_ms = elapsed_ms(start);
        double sum = 0.0;
        for (const auto& e : r.episodes)
          sum += e.wall_time_ms;
        runs[i].mean_episode_ms = r.episodes.empty() ? 0.0 : sum / static_cast<double>(r.episodes.size());
        runs[i].final_global_hypervolume = r.episodes.empty() ? 0.0 : r.episodes.back().global_hypervolume;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                                     static_cast<unsigned>(runs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i)
      pool.emplace_back(worker);
  }
  if (error)
    std::rethrow_exception(error);
  return runs;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRun>& runs)
{
  os << "# mofql sweep v1; hypervolume column uses the reconstructed global hypervolume metric\n"
     << "rays,tau,gamma,seeds,mean_final_global_hypervolume,mean_episode_ms,mean_run_ms\n";
  std::size_t i = 0;
  while (i < runs.size()) {
    std::size_t j = i;
    double hv = 0.0, ep_ms = 0.0, run_ms = 0.0;
    while (j < runs.size() && runs[j].cell.rays == runs[i].cell.rays && runs[j].cell.tau == runs[i].cell.tau &&
           runs[j].cell.gamma == runs[i].cell.gamma) {
      hv += runs[j].final_global_hypervolume;
      ep_ms += runs[j].mean_episode_ms;
      run_ms += runs[j].total_ms;
      ++j;
    }
    const auto n = static_cast<double>(j - i);
    os << runs[i].cell.rays << ',' << fmt(runs[i].cell.tau) << ',' << fmt(runs[i].cell.gamma) << ',' << (j - i)
       << ',' << fmt(hv / n) << ',' << fmt(ep_ms / n) << ',' << fmt(run_ms / n) << '\n';
    i = j;
  }
}

void write_sweep_runs_csv(std::ostream& os, const std::vector<SweepRun>& runs)
{
  os << "# mofql sweep runs v1\n"
     << "rays,tau,gamma,seed,final_global_hypervolume,mean_episode_ms,run_ms\n";
  for (const auto& r : runs)
    os << r.cell.rays << ',' << fmt(r.cell.tau) << ',' << fmt(r.cell.gamma) << ',' << r.seed << ','
       << fmt(r.final_global_hypervolume) << ',' << fmt(r.mean_episode_ms) << ',' << fmt(r.total_ms) << '\n';
}

std::vector<SweepRun> cmd_sweep(const RunConfig& cfg)
{
  cfg.validate();
  auto sweep_os = open_output(cfg.out, "sweep.csv");
  auto runs_os = open_output(cfg.out, "sweep_runs.csv");
  auto runs = run_sweep(cfg, sweep_grid(cfg), cfg.sweep_seeds, cfg.threads);
  write_sweep_csv(sweep_os, runs);
  write_sweep_runs_csv(runs_os, runs);
  if (!sweep_os || !runs_os)
    throw std::runtime_error("failed writing sweep results under '" + cfg.out + "'");
  return runs;
}

} // namespace mofql
