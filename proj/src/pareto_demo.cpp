#include "mofql/experiment.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mofql {

namespace {

std::string fmt(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace

DemoShape demo_shape_from_string(const std::string& s)
{
  if (s == "convex")
    return DemoShape::Convex;
  if (s == "plane")
    return DemoShape::Plane;
  if (s == "concave")
    return DemoShape::Concave;
  throw std::invalid_argument("unknown shape '" + s + "' (expected convex, plane or concave)");
}

std::string to_string(DemoShape s)
{
  switch (s) {
  case DemoShape::Convex: return "convex";
  case DemoShape::Plane: return "plane";
  case DemoShape::Concave: return "concave";
  }
  return "unknown";
}

bool under_surface(DemoShape shape, const ObjectiveVector& p)
{
  switch (shape) {
  case DemoShape::Convex: return p.squaredNorm() <= 1.0;
  case DemoShape::Plane: return p.sum() <= 1.5;
  case DemoShape::Concave: return (ObjectiveVector::Ones() - p).squaredNorm() >= 1.0;
  }
  return false;
}

ParetoDemo pareto_demo(DemoShape shape, std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw std::invalid_argument("pareto_demo: need at least one point");
  auto rng = make_stream(seed, Stream::Demo);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParetoDemo demo;
  demo.points.resize(static_cast<Index>(n), 3);
  for (Index i = 0; i < static_cast<Index>(n);) {
    const ObjectiveVector p(unit(rng), unit(rng), unit(rng));
    if (under_surface(shape, p))
      demo.points.row(i++) = p.transpose();
  }
  demo.front_indices = nd_filter_indices(demo.points);
  demo.front = nd_filter(demo.points);
  return demo;
}

ParetoDemo cmd_pareto_demo(DemoShape shape, std::size_t n, std::uint64_t seed, const std::string& out)
{
  ParetoDemo demo = pareto_demo(shape, n, seed);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" + out + "': " + ec.message());

  const auto dir = std::filesystem::path(out);
  std::ofstream points((dir / "points.csv").string(), std::ios::binary);
  std::ofstream front((dir / "front.csv").string(), std::ios::binary);
  if (!points || !front)
    throw std::runtime_error("cannot write demo output under '" + out + "'");

  std::vector<char> on_front(n, 0);
  for (Index i : demo.front_indices)
    on_front[static_cast<std::size_t>(i)] = 1;
  points << "# mofql pareto-demo points v1; shape=" << to_string(shape) << "\n"
         << "index,x,y,z,on_front\n";
  for (Index i = 0; i < demo.points.rows(); ++i)
    points << i << ',' << fmt(demo.points(i, 0)) << ',' << fmt(demo.points(i, 1)) << ','
           << fmt(demo.points(i, 2)) << ',' << int(on_front[static_cast<std::size_t>(i)]) << '\n';
  front << "# mofql pareto-demo front v1; shape=" << to_string(shape)
        << "; hypervolume=" << fmt(hypervolume3(demo.front)) << "\n"
        << "index,x,y,z\n";
  for (Index i : demo.front_indices)
    front << i << ',' << fmt(demo.points(i, 0)) << ',' << fmt(demo.points(i, 1)) << ','
          << fmt(demo.points(i, 2)) << '\n';
  if (!points || !front)
    throw std::runtime_error("failed writing demo output under '" + out + "'");
  return demo;
}

} // namespace mofql
