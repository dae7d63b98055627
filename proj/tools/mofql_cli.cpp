// mofql: train, evaluate and sweep multi-objective fuzzy Q-learners on the
// pursuit-evasion game, and run the synthetic Pareto-front demo.

#include "mofql/config.hpp"
#include "mofql/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonOptions
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts)
{
  cmd->add_option("--config", opts.config, "key = value configuration file");
  cmd->add_option("--seed", opts.seed, "master random seed");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--set", opts.overrides, "override a config key (key=value), repeatable");
}

mofql::RunConfig resolve(const CommonOptions& opts)
{
  mofql::RunConfig cfg = opts.config.empty() ? mofql::RunConfig{} : mofql::load_config(opts.config);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    mofql::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.seed)
    cfg.seed = *opts.seed;
  if (opts.out)
    cfg.out = *opts.out;
  cfg.validate();
  return cfg;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Multi-objective fuzzy Q-learning for a pursuit-evasion game"};
  app.require_subcommand(1);

  CommonOptions train_opts, eval_opts, sweep_opts, demo_opts;

  auto* train = app.add_subcommand("train", "train a learner and write store, episodes and trajectories");
  add_common(train, train_opts);

  auto* eval = app.add_subcommand("eval", "greedy preference-conditioned evaluation of a stored learner");
  add_common(eval, eval_opts);
  std::string store_path;
  std::string theta = "pi/4", phi = "pi/2";
  bool grid = false;
  std::string policy = "greedy";
  eval->add_option("--store", store_path, "store file written by train")->required();
  eval->add_option("--theta", theta, "evaluation ray polar angle (e.g. pi/4)");
  eval->add_option("--phi", phi, "evaluation ray azimuth (e.g. pi/2)");
  eval->add_flag("--grid", grid, "evaluate the 5x5 angle grid instead of a single ray");
  eval->add_option("--policy", policy, "greedy or random")->check(CLI::IsMember({"greedy", "random"}));

  auto* sweep = app.add_subcommand("sweep", "train over a grid of ray counts, temperatures and discounts");
  add_common(sweep, sweep_opts);

  auto* demo = app.add_subcommand("pareto-demo", "sample a synthetic point cloud and extract its front");
  add_common(demo, demo_opts);
  std::string shape = "convex";
  std::size_t n = 500;
  demo->add_option("--shape", shape, "convex, plane or concave");
  demo->add_option("--n", n, "number of points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const auto cfg = resolve(train_opts);
      const auto result = mofql::cmd_train(cfg);
      std::size_t reached = 0;
      for (const auto& e : result.episodes)
        reached += e.outcome == mofql::Outcome::Reached;
      std::cout << "trained " << result.episodes.size() << " episodes, reached target in " << reached
                << ", final global hypervolume "
                << (result.episodes.empty() ? 0.0 : result.episodes.back().global_hypervolume) << '\n'
                << "artifacts in " << cfg.out << '\n';
    } else if (*eval) {
      const auto cfg = resolve(eval_opts);
      std::vector<mofql::Ray<double>> rays;
      if (grid)
        rays = mofql::evaluation_angle_grid();
      else
        rays.push_back({mofql::parse_real(theta), mofql::parse_real(phi)});
      (void)mofql::sample_rays(mofql::RaySpec<double>{rays});
      const auto summaries = mofql::cmd_eval(
          store_path, cfg, rays, policy == "greedy" ? mofql::EvalPolicy::Greedy : mofql::EvalPolicy::Random);
      for (const auto& s : summaries)
        std::cout << "theta=" << s.ray.theta << " phi=" << s.ray.phi << " reach_rate=" << s.reach_rate()
                  << " last_outcome=" << mofql::to_string(s.episodes.back().outcome) << '\n';
    } else if (*sweep) {
      const auto cfg = resolve(sweep_opts);
      const auto runs = mofql::cmd_sweep(cfg);
      std::cout << "completed " << runs.size() << " runs, results in " << cfg.out << "/sweep.csv\n";
    } else if (*demo) {
      const auto cfg = resolve(demo_opts);
      const auto result = mofql::cmd_pareto_demo(mofql::demo_shape_from_string(shape), n, cfg.seed, cfg.out);
      std::cout << shape << ": " << result.points.rows() << " points, " << result.front.size()
                << " on the front, hypervolume " << mofql::hypervolume3(result.front) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
