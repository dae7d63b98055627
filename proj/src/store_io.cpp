// Store file schema (plain text, one record per line, fields separated by a
// single space, numbers in shortest round-trip decimal form):
//
//   mofql-store v1
//   rules <L>
//   actions <m>
//   alpha <a>
//   gamma <g>
//   tau <t>
//   prune_limit <n>
//   reference <x> <y> <z>
//   rays <H>
//   ray <theta> <phi>            (H lines)
//   qset <rule> <action> <k>     (L*m blocks, rule-major)
//   <x> <y> <z>                  (k lines per block)
//   end

#include "mofql/learner.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <system_error>

namespace mofql {

namespace {

constexpr std::string_view kMagic = "mofql-store v1";

std::string fmt(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void corrupt(const std::string& what, std::size_t line)
{
  throw std::runtime_error("store: " + what + " (line " + std::to_string(line) + ")");
}

class Reader
{
public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::vector<std::string_view> fields(std::string_view expected_tag, std::size_t count)
  {
    next();
    std::vector<std::string_view> out;
    std::string_view rest = line_;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      out.push_back(rest.substr(0, sp));
      if (sp == std::string_view::npos)
        break;
      rest.remove_prefix(sp + 1);
    }
    if (!expected_tag.empty()) {
      if (out.empty() || out.front() != expected_tag)
        corrupt("expected '" + std::string(expected_tag) + "'", number_);
      out.erase(out.begin());
    }
    if (out.size() != count)
      corrupt("wrong field count", number_);
    return out;
  }

  void expect_line(std::string_view text)
  {
    next();
    if (line_ != text)
      corrupt("expected '" + std::string(text) + "'", number_);
  }

  double real(std::string_view s) const
  {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      corrupt("malformed number '" + std::string(s) + "'", number_);
    return v;
  }

  long long integer(std::string_view s) const
  {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0)
      corrupt("malformed count '" + std::string(s) + "'", number_);
    return v;
  }

  std::size_t line() const { return number_; }

private:
  void next()
  {
    if (!std::getline(is_, line_))
      corrupt("unexpected end of file", number_ + 1);
    ++number_;
  }

  std::istream& is_;
  std::string line_;
  std::size_t number_ = 0;
};

} // namespace

void save_store(const MOQStore& store, std::ostream& os)
{
  os << kMagic << '\n';
  os << "rules " << store.rule_count() << '\n';
  os << "actions " << store.action_count() << '\n';
  os << "alpha " << fmt(store.alpha()) << '\n';
  os << "gamma " << fmt(store.gamma()) << '\n';
  os << "tau " << fmt(store.tau()) << '\n';
  os << "prune_limit " << store.prune_limit() << '\n';
  const auto& r = store.reference();
  os << "reference " << fmt(r(0)) << ' ' << fmt(r(1)) << ' ' << fmt(r(2)) << '\n';
  os << "rays " << store.ray_count() << '\n';
  for (const auto& ray : store.rays())
    os << "ray " << fmt(ray.theta) << ' ' << fmt(ray.phi) << '\n';
  for (Index l = 0; l < store.rule_count(); ++l) {
    for (Index a = 0; a < store.action_count(); ++a) {
      const auto& rows = store.qset(l, a).rows();
      os << "qset " << l << ' ' << a << ' ' << rows.rows() << '\n';
      for (Index k = 0; k < rows.rows(); ++k)
        os << fmt(rows(k, 0)) << ' ' << fmt(rows(k, 1)) << ' ' << fmt(rows(k, 2)) << '\n';
    }
  }
  os << "end\n";
}

MOQStore load_store(std::istream& is)
{
  Reader in(is);
  in.expect_line(kMagic);
  const auto rules = static_cast<Index>(in.integer(in.fields("rules", 1)[0]));
  const auto actions = static_cast<Index>(in.integer(in.fields("actions", 1)[0]));
  LearnerParams params;
  params.alpha = in.real(in.fields("alpha", 1)[0]);
  params.gamma = in.real(in.fields("gamma", 1)[0]);
  params.tau = in.real(in.fields("tau", 1)[0]);
  params.prune_limit = static_cast<std::size_t>(in.integer(in.fields("prune_limit", 1)[0]));
  {
    const auto f = in.fields("reference", 3);
    params.reference = ObjectiveVector(in.real(f[0]), in.real(f[1]), in.real(f[2]));
  }
  const auto ray_count = in.integer(in.fields("rays", 1)[0]);
  std::vector<Ray<double>> rays;
  for (long long i = 0; i < ray_count; ++i) {
    const auto f = in.fields("ray", 2);
    rays.push_back({in.real(f[0]), in.real(f[1])});
  }
  if (params.prune_limit == 0)
    corrupt("prune_limit must be positive", in.line());

  MOQStore store = [&] {
    try {
      return MOQStore(rules, actions, std::move(rays), params);
    } catch (const std::invalid_argument& e) {
      corrupt(e.what(), in.line());
    }
  }();

  for (Index l = 0; l < rules; ++l) {
    for (Index a = 0; a < actions; ++a) {
      const auto f = in.fields("qset", 3);
      if (in.integer(f[0]) != l || in.integer(f[1]) != a)
        corrupt("Q-sets out of order", in.line());
      const auto k = static_cast<Index>(in.integer(f[2]));
      if (k == 0)
        corrupt("empty Q-set", in.line());
      ObjectiveMatrix rows(k, 3);
      for (Index i = 0; i < k; ++i) {
        const auto v = in.fields("", 3);
        for (Index c = 0; c < 3; ++c)
          rows(i, c) = in.real(v[static_cast<std::size_t>(c)]);
      }
      if (!rows.allFinite() || static_cast<Index>(nd_filter_indices(rows).size()) != k)
        corrupt("Q-set is not a finite non-dominated set", in.line());
      store.set_qset(l, a, NDSetd::from_nondominated(std::move(rows), params.reference));
    }
  }
  in.expect_line("end");
  return store;
}

void save_store(const MOQStore& store, const std::string& path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  save_store(store, os);
  if (!os)
    throw std::runtime_error("failed writing '" + path + "'");
}

MOQStore load_store(const std::string& path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw std::runtime_error("cannot open store '" + path + "'");
  return load_store(is);
}

} // namespace mofql
