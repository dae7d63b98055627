#include "mofql/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mofql {

namespace {

std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  while (true) {
    const auto p = s.find(sep);
    out.push_back(trim(s.substr(0, p)));
    if (p == std::string_view::npos)
      break;
    s.remove_prefix(p + 1);
  }
  return out;
}

double plain_number(std::string_view s)
{
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("malformed number '" + std::string(s) + "'");
  return v;
}

template <typename Int>
Int parse_int(std::string_view s)
{
  s = trim(s);
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("malformed integer '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view s)
{
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes")
    return true;
  if (s == "false" || s == "0" || s == "no")
    return false;
  throw std::invalid_argument("malformed boolean '" + std::string(s) + "'");
}

std::vector<double> parse_reals(std::string_view s, std::size_t expected = 0)
{
  std::vector<double> out;
  for (auto part : split(s, ','))
    out.push_back(parse_real(part));
  if (expected != 0 && out.size() != expected)
    throw std::invalid_argument("expected " + std::to_string(expected) + " comma-separated values");
  return out;
}

ObjectiveVector parse_vec3(std::string_view s)
{
  const auto v = parse_reals(s, 3);
  return {v[0], v[1], v[2]};
}

std::string fmt(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Range, typename F>
std::string join(const Range& r, F f, const char* sep = ",")
{
  std::string out;
  bool first = true;
  for (const auto& x : r) {
    if (!first)
      out += sep;
    out += f(x);
    first = false;
  }
  return out;
}

std::string vec3(const ObjectiveVector& v)
{
  return fmt(v(0)) + "," + fmt(v(1)) + "," + fmt(v(2));
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters()
{
  static const std::map<std::string, Setter, std::less<>> table = {
      {"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_int<std::uint64_t>(v); }},
      {"episodes", [](RunConfig& c, std::string_view v) { c.episodes = parse_int<int>(v); }},
      {"alpha", [](RunConfig& c, std::string_view v) { c.learner.alpha = parse_real(v); }},
      {"gamma", [](RunConfig& c, std::string_view v) { c.learner.gamma = parse_real(v); }},
      {"tau", [](RunConfig& c, std::string_view v) { c.learner.tau = parse_real(v); }},
      {"prune_limit", [](RunConfig& c, std::string_view v) { c.learner.prune_limit = parse_int<std::size_t>(v); }},
      {"reference", [](RunConfig& c, std::string_view v) { c.learner.reference = parse_vec3(v); }},
      {"initial", [](RunConfig& c, std::string_view v) { c.learner.initial = parse_vec3(v); }},
      {"rays",
       [](RunConfig& c, std::string_view v) {
         if (v.find(':') != std::string_view::npos)
           c.rays = parse_ray_list(v);
         else
           c.rays = parse_int<std::size_t>(v);
       }},
      {"distance_range",
       [](RunConfig& c, std::string_view v) {
         const auto r = parse_reals(v, 2);
         c.distance_input.lo = r[0];
         c.distance_input.hi = r[1];
       }},
      {"distance_mfs", [](RunConfig& c, std::string_view v) { c.distance_input.mf_count = parse_int<int>(v); }},
      {"angle_range",
       [](RunConfig& c, std::string_view v) {
         const auto r = parse_reals(v, 2);
         c.angle_input.lo = r[0];
         c.angle_input.hi = r[1];
       }},
      {"angle_mfs", [](RunConfig& c, std::string_view v) { c.angle_input.mf_count = parse_int<int>(v); }},
      {"actions", [](RunConfig& c, std::string_view v) { c.actions = parse_reals(v); }},
      {"dt", [](RunConfig& c, std::string_view v) { c.env.arena.dt = parse_real(v); }},
      {"max_steps", [](RunConfig& c, std::string_view v) { c.env.arena.max_steps = parse_int<int>(v); }},
      {"capture_radius", [](RunConfig& c, std::string_view v) { c.env.arena.capture_radius = parse_real(v); }},
      {"obstacle_radius", [](RunConfig& c, std::string_view v) { c.env.arena.obstacle_radius = parse_real(v); }},
      {"target_radius", [](RunConfig& c, std::string_view v) { c.env.arena.target_radius = parse_real(v); }},
      {"target_center",
       [](RunConfig& c, std::string_view v) {
         const auto r = parse_reals(v, 2);
         c.env.arena.target_center = {r[0], r[1]};
       }},
      {"obstacle_center",
       [](RunConfig& c, std::string_view v) {
         const auto r = parse_reals(v, 2);
         c.env.arena.obstacle_center = {r[0], r[1]};
       }},
      {"arena_size",
       [](RunConfig& c, std::string_view v) {
         const auto r = parse_reals(v, 2);
         c.env.arena.width = r[0];
         c.env.arena.height = r[1];
       }},
      {"walls_end_episode", [](RunConfig& c, std::string_view v) { c.env.arena.walls_end_episode = parse_bool(v); }},
      {"wheelbase",
       [](RunConfig& c, std::string_view v) { c.env.evader.wheelbase = c.env.pursuer.wheelbase = parse_real(v); }},
      {"evader_speed", [](RunConfig& c, std::string_view v) { c.env.evader.v = parse_real(v); }},
      {"pursuer_speed", [](RunConfig& c, std::string_view v) { c.env.pursuer.v = parse_real(v); }},
      {"evader_start",
       [](RunConfig& c, std::string_view v) {
         const auto p = parse_vec3(v);
         c.env.evader.x = p(0);
         c.env.evader.y = p(1);
         c.env.evader.beta = p(2);
       }},
      {"pursuer_start",
       [](RunConfig& c, std::string_view v) {
         const auto p = parse_vec3(v);
         c.env.pursuer.x = p(0);
         c.env.pursuer.y = p(1);
         c.env.pursuer.beta = p(2);
       }},
      {"pursuit_gain", [](RunConfig& c, std::string_view v) { c.env.pursuit_gain = parse_real(v); }},
      {"start_jitter", [](RunConfig& c, std::string_view v) { c.env.start_jitter = parse_real(v); }},
      {"reach_bonus", [](RunConfig& c, std::string_view v) { c.env.reach_bonus = parse_vec3(v); }},
      {"capture_bonus", [](RunConfig& c, std::string_view v) { c.env.capture_bonus = parse_vec3(v); }},
      {"collision_bonus", [](RunConfig& c, std::string_view v) { c.env.collision_bonus = parse_vec3(v); }},
      {"hv_window", [](RunConfig& c, std::string_view v) { c.hv_window = parse_int<std::size_t>(v); }},
      {"trajectory_every", [](RunConfig& c, std::string_view v) { c.trajectory_every = parse_int<int>(v); }},
      {"out", [](RunConfig& c, std::string_view v) { c.out = std::string(v); }},
      {"eval_episodes", [](RunConfig& c, std::string_view v) { c.eval_episodes = parse_int<int>(v); }},
      {"eval_jitter", [](RunConfig& c, std::string_view v) { c.eval_jitter = parse_real(v); }},
      {"sweep_h",
       [](RunConfig& c, std::string_view v) {
         c.sweep_h.clear();
         for (auto p : split(v, ','))
           c.sweep_h.push_back(parse_int<std::size_t>(p));
       }},
      {"sweep_tau", [](RunConfig& c, std::string_view v) { c.sweep_tau = parse_reals(v); }},
      {"sweep_gamma", [](RunConfig& c, std::string_view v) { c.sweep_gamma = parse_reals(v); }},
      {"sweep_seeds",
       [](RunConfig& c, std::string_view v) {
         c.sweep_seeds.clear();
         for (auto p : split(v, ','))
           c.sweep_seeds.push_back(parse_int<std::uint64_t>(p));
       }},
      {"threads", [](RunConfig& c, std::string_view v) { c.threads = parse_int<unsigned>(v); }},
  };
  return table;
}

} // namespace

double parse_real(std::string_view text)
{
  std::string_view s = trim(text);
  const auto p = s.find("pi");
  if (p == std::string_view::npos)
    return plain_number(s);

  // [sign][coef]pi[/den]
  std::string_view head = s.substr(0, p);
  std::string_view tail = s.substr(p + 2);
  double sign = 1.0;
  if (!head.empty() && (head.front() == '-' || head.front() == '+')) {
    sign = head.front() == '-' ? -1.0 : 1.0;
    head.remove_prefix(1);
  }
  if (!head.empty() && head.back() == '*')
    head.remove_suffix(1);
  const double coef = head.empty() ? 1.0 : plain_number(head);
  double den = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/')
      throw std::invalid_argument("malformed angle '" + std::string(s) + "'");
    den = plain_number(tail.substr(1));
    if (den == 0.0)
      throw std::invalid_argument("zero denominator in '" + std::string(s) + "'");
  }
  return sign * coef * std::numbers::pi / den;
}

std::vector<Ray<double>> parse_ray_list(std::string_view text)
{
  std::vector<Ray<double>> rays;
  for (auto item : split(text, ';')) {
    if (item.empty())
      continue;
    const auto parts = split(item, ':');
    if (parts.size() != 2)
      throw std::invalid_argument("ray '" + std::string(item) + "' must be theta:phi");
    rays.push_back({parse_real(parts[0]), parse_real(parts[1])});
  }
  if (rays.empty())
    throw std::invalid_argument("empty ray list");
  return rays;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value)
{
  const auto& table = setters();
  const auto it = table.find(trim(key));
  if (it == table.end())
    throw std::invalid_argument("unknown config key '" + std::string(trim(key)) + "'");
  try {
    it->second(cfg, trim(value));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config key '" + it->first + "': " + e.what());
  }
}

void apply_config_text(RunConfig& cfg, std::string_view text)
{
  std::size_t number = 0;
  for (auto line : split(text, '\n')) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = trim(line.substr(0, hash));
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

RunConfig load_config(const std::string& path)
{
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, ss.str());
  return cfg;
}

void RunConfig::validate() const
{
  if (episodes < 0)
    throw std::invalid_argument("episodes must be non-negative");
  if (actions.empty())
    throw std::invalid_argument("action set is empty");
  for (double a : actions)
    if (std::abs(a) > kSteerLimit + 1e-12)
      throw std::invalid_argument("steering actions must lie in [-pi/3, pi/3]");
  if (hv_window == 0)
    throw std::invalid_argument("hv_window must be positive");
  if (trajectory_every < 1)
    throw std::invalid_argument("trajectory_every must be positive");
  if (eval_episodes < 1)
    throw std::invalid_argument("eval_episodes must be positive");
  if (sweep_h.empty() || sweep_tau.empty() || sweep_gamma.empty() || sweep_seeds.empty())
    throw std::invalid_argument("sweep grids must be non-empty");
  distance_input.validate();
  angle_input.validate();
  env.arena.validate();
  (void)sample_rays(rays);
}

std::string to_config_text(const RunConfig& c)
{
  std::ostringstream os;
  const auto& a = c.env.arena;
  os << "seed = " << c.seed << '\n'
     << "episodes = " << c.episodes << '\n'
     << "alpha = " << fmt(c.learner.alpha) << '\n'
     << "gamma = " << fmt(c.learner.gamma) << '\n'
     << "tau = " << fmt(c.learner.tau) << '\n'
     << "prune_limit = " << c.learner.prune_limit << '\n'
     << "reference = " << vec3(c.learner.reference) << '\n'
     << "initial = " << vec3(c.learner.initial) << '\n';
  if (const auto* n = std::get_if<std::size_t>(&c.rays))
    os << "rays = " << *n << '\n';
  else
    os << "rays = "
       << join(std::get<std::vector<Ray<double>>>(c.rays),
               [](const Ray<double>& r) { return fmt(r.theta) + ":" + fmt(r.phi); }, ";")
       << '\n';
  os << "distance_range = " << fmt(c.distance_input.lo) << ',' << fmt(c.distance_input.hi) << '\n'
     << "distance_mfs = " << c.distance_input.mf_count << '\n'
     << "angle_range = " << fmt(c.angle_input.lo) << ',' << fmt(c.angle_input.hi) << '\n'
     << "angle_mfs = " << c.angle_input.mf_count << '\n'
     << "actions = " << join(c.actions, fmt) << '\n'
     << "dt = " << fmt(a.dt) << '\n'
     << "max_steps = " << a.max_steps << '\n'
     << "capture_radius = " << fmt(a.capture_radius) << '\n'
     << "obstacle_radius = " << fmt(a.obstacle_radius) << '\n'
     << "target_radius = " << fmt(a.target_radius) << '\n'
     << "target_center = " << fmt(a.target_center.x()) << ',' << fmt(a.target_center.y()) << '\n'
     << "obstacle_center = " << fmt(a.obstacle_center.x()) << ',' << fmt(a.obstacle_center.y()) << '\n'
     << "arena_size = " << fmt(a.width) << ',' << fmt(a.height) << '\n'
     << "walls_end_episode = " << (a.walls_end_episode ? "true" : "false") << '\n'
     << "evader_speed = " << fmt(c.env.evader.v) << '\n'
     << "pursuer_speed = " << fmt(c.env.pursuer.v) << '\n'
     << "evader_start = " << fmt(c.env.evader.x) << ',' << fmt(c.env.evader.y) << ',' << fmt(c.env.evader.beta)
     << '\n'
     << "pursuer_start = " << fmt(c.env.pursuer.x) << ',' << fmt(c.env.pursuer.y) << ','
     << fmt(c.env.pursuer.beta) << '\n'
     << "pursuit_gain = " << fmt(c.env.pursuit_gain) << '\n'
     << "start_jitter = " << fmt(c.env.start_jitter) << '\n'
     << "reach_bonus = " << vec3(c.env.reach_bonus) << '\n'
     << "capture_bonus = " << vec3(c.env.capture_bonus) << '\n'
     << "collision_bonus = " << vec3(c.env.collision_bonus) << '\n'
     << "hv_window = " << c.hv_window << '\n'
     << "trajectory_every = " << c.trajectory_every << '\n'
     << "out = " << c.out << '\n'
     << "eval_episodes = " << c.eval_episodes << '\n'
     << "eval_jitter = " << fmt(c.eval_jitter) << '\n'
     << "sweep_h = " << join(c.sweep_h, [](std::size_t h) { return std::to_string(h); }) << '\n'
     << "sweep_tau = " << join(c.sweep_tau, fmt) << '\n'
     << "sweep_gamma = " << join(c.sweep_gamma, fmt) << '\n'
     << "sweep_seeds = " << join(c.sweep_seeds, [](std::uint64_t s) { return std::to_string(s); }) << '\n'
     << "threads = " << c.threads << '\n';
  if (c.env.evader.wheelbase == c.env.pursuer.wheelbase)
    os << "wheelbase = " << fmt(c.env.evader.wheelbase) << '\n';
  return os.str();
}

} // namespace mofql
