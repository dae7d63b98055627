// Multi-objective algebra over 3-objective payoff vectors.
//
// Everything here is a pure function of its arguments. Point sets are k x 3
// row-major Eigen matrices, one objective vector per row, in the order
// (evade, reach, avoid). All comparisons use the maximization sense.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mofql {

using Index = Eigen::Index;

template <typename Scalar>
using Objective = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using ObjectiveRows = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;

using ObjectiveVector = Objective<double>;
using ObjectiveMatrix = ObjectiveRows<double>;

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* where)
{
  if (!m.allFinite())
    throw std::domain_error(std::string(where) + ": non-finite objective value");
}

template <typename Derived>
Objective<typename Derived::Scalar> as_objective(const Eigen::MatrixBase<Derived>& v)
{
  static_assert(Derived::SizeAtCompileTime == 3 || Derived::SizeAtCompileTime == Eigen::Dynamic,
                "objective vectors have three components");
  if (v.size() != 3)
    throw std::invalid_argument("objective vectors have three components");
  return Objective<typename Derived::Scalar>(v(0), v(1), v(2));
}

} // namespace detail

/// Pareto dominance in the maximization sense: u >= v everywhere and u > v
/// somewhere. Equal vectors never dominate each other.
template <typename DerivedU, typename DerivedV>
bool dominates(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v)
{
  const auto a = detail::as_objective(u);
  const auto b = detail::as_objective(v);
  detail::require_finite(a, "dominates");
  detail::require_finite(b, "dominates");
  return (a.array() >= b.array()).all() && (a.array() > b.array()).any();
}

/// A set of mutually non-dominated, pairwise distinct objective vectors,
/// together with the reference point used to measure its hypervolume.
///
/// Instances come from nd_filter(); `from_nondominated` is the unchecked
/// entry point for rows already known to satisfy the invariants.
template <typename Scalar>
class NDSet
{
public:
  using Rows = ObjectiveRows<Scalar>;
  using Vector = Objective<Scalar>;

  NDSet() : reference_(Vector::Zero()) {}

  static NDSet from_nondominated(Rows rows, const Vector& reference = Vector::Zero())
  {
    NDSet s;
    s.rows_ = std::move(rows);
    s.reference_ = reference;
    return s;
  }

  static NDSet singleton(const Vector& v, const Vector& reference = Vector::Zero())
  {
    Rows rows(1, 3);
    rows.row(0) = v.transpose();
    return from_nondominated(std::move(rows), reference);
  }

  const Rows& rows() const { return rows_; }
  Index size() const { return rows_.rows(); }
  bool empty() const { return rows_.rows() == 0; }
  Vector row(Index i) const { return rows_.row(i).transpose(); }
  const Vector& reference() const { return reference_; }

  friend bool operator==(const NDSet& a, const NDSet& b)
  {
    return a.rows_.rows() == b.rows_.rows() && a.rows_ == b.rows_ && a.reference_ == b.reference_;
  }

private:
  Rows rows_;
  Vector reference_;
};

using NDSetd = NDSet<double>;

/// Indices (ascending, i.e. input order) of the rows of `points` that are not
/// weakly dominated by any other row. Of several identical rows only the first
/// survives.
///
/// Rows are visited in lexicographically decreasing order, so every weak
/// dominator of a row is visited before it; a (y, z) staircase of the
/// survivors answers "is there an earlier row with y' >= y and z' >= z" by
/// binary search.
template <typename Derived>
std::vector<Index> nd_filter_indices(const Eigen::MatrixBase<Derived>& points)
{
  using Scalar = typename Derived::Scalar;
  if (points.cols() != 3)
    throw std::invalid_argument("nd_filter: points must have three columns");
  if (points.rows() == 0)
    throw std::invalid_argument("nd_filter: empty point set");
  detail::require_finite(points, "nd_filter");

  struct Entry
  {
    Scalar x, y, z;
    Index idx;
  };
  const Index n = points.rows();
  std::vector<Entry> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    order[static_cast<std::size_t>(i)] = {points(i, 0), points(i, 1), points(i, 2), i};
  std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    if (a.x != b.x)
      return a.x > b.x;
    if (a.y != b.y)
      return a.y > b.y;
    if (a.z != b.z)
      return a.z > b.z;
    return a.idx < b.idx;
  });

  // (y, z) staircase of survivors: y ascending, z strictly descending.
  std::vector<std::pair<Scalar, Scalar>> stair;
  std::vector<char> keep(static_cast<std::size_t>(n), 0);
  const auto by_y = [](const std::pair<Scalar, Scalar>& s, Scalar y) { return s.first < y; };
  for (const Entry& e : order) {
    auto hit = std::lower_bound(stair.begin(), stair.end(), e.y, by_y);
    if (hit != stair.end() && hit->second >= e.z)
      continue;
    keep[static_cast<std::size_t>(e.idx)] = 1;

    // Drop entries with y' <= y and z' <= z, then insert (y, z).
    auto last = (hit != stair.end() && hit->first == e.y) ? hit + 1 : hit;
    auto first = last;
    while (first != stair.begin() && std::prev(first)->second <= e.z)
      --first;
    if (first != last) {
      *first = {e.y, e.z};
      stair.erase(first + 1, last);
    } else {
      stair.insert(first, {e.y, e.z});
    }
  }

  std::vector<Index> survivors;
  for (Index i = 0; i < n; ++i)
    if (keep[static_cast<std::size_t>(i)])
      survivors.push_back(i);
  return survivors;
}

/// The ND(.) operator: non-dominated, deduplicated subset of `points`, in
/// input order.
template <typename Derived>
NDSet<typename Derived::Scalar> nd_filter(
    const Eigen::MatrixBase<Derived>& points,
    const Objective<typename Derived::Scalar>& reference = Objective<typename Derived::Scalar>::Zero())
{
  using Scalar = typename Derived::Scalar;
  const auto survivors = nd_filter_indices(points);
  ObjectiveRows<Scalar> rows(static_cast<Index>(survivors.size()), 3);
  for (std::size_t i = 0; i < survivors.size(); ++i)
    rows.row(static_cast<Index>(i)) = points.row(survivors[i]);
  return NDSet<Scalar>::from_nondominated(std::move(rows), reference);
}

/// v (+) U: v added to every row of U, row order preserved.
template <typename DerivedV, typename DerivedU>
ObjectiveRows<typename DerivedU::Scalar> vec_oplus_set(const Eigen::MatrixBase<DerivedV>& v,
                                                       const Eigen::MatrixBase<DerivedU>& set)
{
  if (set.rows() == 0)
    throw std::invalid_argument("vec_oplus_set: empty set");
  const auto offset = detail::as_objective(v);
  detail::require_finite(offset, "vec_oplus_set");
  return set.rowwise() + offset.transpose();
}

namespace detail {

template <typename DerivedU, typename DerivedV, typename Op>
ObjectiveRows<typename DerivedU::Scalar> pairwise(const Eigen::MatrixBase<DerivedU>& u,
                                                  const Eigen::MatrixBase<DerivedV>& v, Op op,
                                                  const char* where)
{
  if (u.rows() == 0 || v.rows() == 0)
    throw std::invalid_argument(std::string(where) + ": empty operand");
  ObjectiveRows<typename DerivedU::Scalar> out(u.rows() * v.rows(), 3);
  Index r = 0;
  for (Index i = 0; i < u.rows(); ++i)
    for (Index j = 0; j < v.rows(); ++j)
      out.row(r++) = op(u.row(i), v.row(j));
  return out;
}

} // namespace detail

/// All pairwise row sums, U-major. |out| = |U| * |V|, no deduplication.
template <typename DerivedU, typename DerivedV>
ObjectiveRows<typename DerivedU::Scalar> set_oplus(const Eigen::MatrixBase<DerivedU>& u,
                                                   const Eigen::MatrixBase<DerivedV>& v)
{
  return detail::pairwise(u, v, [](const auto& a, const auto& b) { return (a + b).eval(); }, "set_oplus");
}

/// All pairwise row differences, U-major.
template <typename DerivedU, typename DerivedV>
ObjectiveRows<typename DerivedU::Scalar> set_ominus(const Eigen::MatrixBase<DerivedU>& u,
                                                    const Eigen::MatrixBase<DerivedV>& v)
{
  return detail::pairwise(u, v, [](const auto& a, const auto& b) { return (a - b).eval(); }, "set_ominus");
}

// ---------------------------------------------------------------------------
// Hypervolume

namespace detail {

/// Box extents relative to the reference point, clipped at zero.
template <typename Scalar>
std::vector<Objective<Scalar>> clipped_extents(const ObjectiveRows<Scalar>& rows,
                                               const Objective<Scalar>& reference)
{
  std::vector<Objective<Scalar>> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Index i = 0; i < rows.rows(); ++i) {
    Objective<Scalar> e = (rows.row(i).transpose() - reference).cwiseMax(Scalar(0));
    if ((e.array() > Scalar(0)).all())
      out.push_back(e);
  }
  return out;
}

template <typename Scalar>
Scalar hv_inclusion_exclusion(const std::vector<Objective<Scalar>>& boxes)
{
  const std::size_t n = boxes.size();
  Scalar total = 0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    Objective<Scalar> corner = Objective<Scalar>::Constant(std::numeric_limits<Scalar>::infinity());
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        corner = corner.cwiseMin(boxes[i]);
        ++bits;
      }
    }
    const Scalar vol = corner(0) * corner(1) * corner(2);
    total += (bits % 2 == 1) ? vol : -vol;
  }
  return total;
}

/// Slab sweep along the third axis; each slab's cross-section is a 2-D
/// staircase area. O(n^2) for n boxes.
template <typename Scalar>
Scalar hv_sweep(std::vector<Objective<Scalar>> boxes)
{
  std::sort(boxes.begin(), boxes.end(),
            [](const Objective<Scalar>& a, const Objective<Scalar>& b) { return a(2) > b(2); });
  std::vector<std::pair<Scalar, Scalar>> section; // (x, y), x descending
  Scalar total = 0;
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    const std::pair<Scalar, Scalar> xy{boxes[k](0), boxes[k](1)};
    auto pos = std::lower_bound(section.begin(), section.end(), xy,
                                [](const auto& a, const auto& b) { return a.first > b.first; });
    section.insert(pos, xy);

    const Scalar next_z = (k + 1 < boxes.size()) ? boxes[k + 1](2) : Scalar(0);
    const Scalar height = boxes[k](2) - next_z;
    if (height <= 0)
      continue;
    Scalar area = 0;
    Scalar covered_y = 0;
    for (const auto& [x, y] : section) {
      if (y > covered_y) {
        area += x * (y - covered_y);
        covered_y = y;
      }
    }
    total += area * height;
  }
  return total;
}

inline constexpr std::size_t kInclusionExclusionMaxRows = 8;

} // namespace detail

/// Volume of the union of the boxes [R, row], with rows clipped to R.
/// Rows need not be mutually non-dominated.
template <typename Scalar>
Scalar hypervolume3(const ObjectiveRows<Scalar>& rows, const Objective<Scalar>& reference)
{
  if (rows.rows() == 0)
    throw std::invalid_argument("hypervolume3: empty set");
  detail::require_finite(rows, "hypervolume3");
  const auto boxes = detail::clipped_extents(rows, reference);
  if (boxes.empty())
    return Scalar(0);
  if (boxes.size() == 1)
    return boxes[0](0) * boxes[0](1) * boxes[0](2);
  if (boxes.size() <= detail::kInclusionExclusionMaxRows)
    return detail::hv_inclusion_exclusion(boxes);
  return detail::hv_sweep(boxes);
}

template <typename Scalar>
Scalar hypervolume3(const NDSet<Scalar>& s)
{
  return hypervolume3(s.rows(), s.reference());
}

// ---------------------------------------------------------------------------
// Hypervolume-driven softmax selection

template <typename Scalar>
struct HypervolumeSelection
{
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> normalized;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> probabilities;
  Index index = 0;
};

/// Normalizes hypervolumes to sum one and applies softmax(tau * h).
/// All-zero input falls back to the uniform distribution.
template <typename Derived>
HypervolumeSelection<typename Derived::Scalar> hypervolume_probabilities(
    const Eigen::MatrixBase<Derived>& hvs, typename Derived::Scalar tau)
{
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (hvs.size() == 0)
    throw std::invalid_argument("normalize_and_select: no actions");
  if (!(tau > 0))
    throw std::invalid_argument("normalize_and_select: temperature must be positive");
  if (!hvs.allFinite() || (hvs.array() < Scalar(0)).any())
    throw std::invalid_argument("normalize_and_select: hypervolumes must be finite and non-negative");

  HypervolumeSelection<Scalar> out;
  const Index m = hvs.size();
  const Scalar sum = hvs.sum();
  if (sum <= 0) {
    out.normalized = Vec::Zero(m);
    out.probabilities = Vec::Constant(m, Scalar(1) / Scalar(m));
    return out;
  }
  out.normalized = hvs / sum;
  const Vec logits = tau * out.normalized;
  const Vec w = (logits.array() - logits.maxCoeff()).exp();
  out.probabilities = w / w.sum();
  return out;
}

/// Inverse-CDF draw from a discrete distribution; one uniform variate.
template <typename Derived, typename URBG>
Index sample_index(const Eigen::MatrixBase<Derived>& probabilities, URBG& rng)
{
  using Scalar = typename Derived::Scalar;
  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));
  const Scalar u = unit(rng);
  Scalar acc = 0;
  for (Index i = 0; i < probabilities.size(); ++i) {
    acc += probabilities(i);
    if (u < acc)
      return i;
  }
  return probabilities.size() - 1;
}

template <typename Derived, typename URBG>
HypervolumeSelection<typename Derived::Scalar> normalize_and_select(
    const Eigen::MatrixBase<Derived>& hvs, typename Derived::Scalar tau, URBG& rng)
{
  auto out = hypervolume_probabilities(hvs, tau);
  out.index = sample_index(out.probabilities, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Preference rays

/// A preference direction in the positive octant, in spherical angles:
/// direction = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)).
template <typename Scalar = double>
struct Ray
{
  Scalar theta = 0;
  Scalar phi = 0;

  Objective<Scalar> direction() const
  {
    using std::cos;
    using std::sin;
    return Objective<Scalar>(sin(theta) * cos(phi), sin(theta) * sin(phi), cos(theta));
  }

  friend bool operator==(const Ray&, const Ray&) = default;
};

/// Either an explicit list of rays or a ray count for the lattice rule.
template <typename Scalar = double>
using RaySpec = std::variant<std::vector<Ray<Scalar>>, std::size_t>;

namespace detail {

template <typename Scalar>
void require_octant_angle(Scalar a)
{
  constexpr Scalar slack = Scalar(1e-12);
  if (!(a >= -slack && a <= std::numbers::pi_v<Scalar> / 2 + slack))
    throw std::invalid_argument("sample_rays: angles must lie in [0, pi/2]");
}

} // namespace detail

/// Explicit lists pass through unchanged. A count H becomes a sqrt(H) x sqrt(H)
/// grid of cell centres when H is a perfect square, otherwise a golden-ratio
/// lattice: theta_k = (pi/2)(k + 1/2)/H, phi_k = (pi/2) frac(k * golden).
template <typename Scalar>
std::vector<Ray<Scalar>> sample_rays(const RaySpec<Scalar>& spec)
{
  constexpr Scalar quarter = std::numbers::pi_v<Scalar> / 2;
  if (const auto* list = std::get_if<std::vector<Ray<Scalar>>>(&spec)) {
    if (list->empty())
      throw std::invalid_argument("sample_rays: empty ray list");
    for (const auto& r : *list) {
      detail::require_octant_angle(r.theta);
      detail::require_octant_angle(r.phi);
    }
    return *list;
  }

  const std::size_t count = std::get<std::size_t>(spec);
  if (count == 0)
    throw std::invalid_argument("sample_rays: ray count must be at least 1");
  std::vector<Ray<Scalar>> rays;
  rays.reserve(count);

  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
  if (side * side == count) {
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j)
        rays.push_back({quarter * (Scalar(i) + Scalar(0.5)) / Scalar(side),
                        quarter * (Scalar(j) + Scalar(0.5)) / Scalar(side)});
    return rays;
  }

  const Scalar golden = (Scalar(1) + std::sqrt(Scalar(5))) / Scalar(2);
  for (std::size_t k = 0; k < count; ++k) {
    const Scalar t = Scalar(k) * golden;
    rays.push_back({quarter * (Scalar(k) + Scalar(0.5)) / Scalar(count), quarter * (t - std::floor(t))});
  }
  return rays;
}

template <typename Scalar>
struct Spherical
{
  Scalar r = 0;
  Scalar theta = 0;
  Scalar phi = 0;
};

template <typename Derived>
Spherical<typename Derived::Scalar> to_spherical(const Eigen::MatrixBase<Derived>& v)
{
  using Scalar = typename Derived::Scalar;
  const auto q = detail::as_objective(v);
  Spherical<Scalar> s;
  s.r = q.norm();
  if (s.r > 0) {
    s.theta = std::acos(std::clamp(q(2) / s.r, Scalar(-1), Scalar(1)));
    s.phi = (q(0) == 0 && q(1) == 0) ? Scalar(0) : std::atan2(q(1), q(0));
  }
  return s;
}

/// Angle between two vectors given in spherical coordinates.
template <typename Scalar>
Scalar angle_to_ray(const Spherical<Scalar>& p, const Spherical<Scalar>& q)
{
  if (!(p.r > 0) || !(q.r > 0))
    throw std::invalid_argument("angle_to_ray: zero-length vector");
  using std::cos;
  using std::sin;
  const Scalar c = cos(p.theta) * cos(q.theta) + sin(p.theta) * sin(q.theta) * cos(q.phi - p.phi);
  return std::acos(std::clamp(c, Scalar(-1), Scalar(1)));
}

/// |r sin(eta)|: distance from q to the line carrying the ray.
template <typename Derived>
typename Derived::Scalar dist_point_to_ray(const Eigen::MatrixBase<Derived>& q,
                                           const Ray<typename Derived::Scalar>& ray)
{
  using Scalar = typename Derived::Scalar;
  const auto qs = to_spherical(q);
  if (qs.r == 0)
    return Scalar(0);
  const Scalar eta = angle_to_ray(Spherical<Scalar>{Scalar(1), ray.theta, ray.phi}, qs);
  return std::abs(qs.r * std::sin(eta));
}

/// For each unit direction (one per row of `directions`), the index of the
/// row closest to the line through it. Uses |q|^2 - (q.u)^2 = r^2 sin^2(eta);
/// ties go to the lowest index.
template <typename Scalar>
std::vector<Index> nearest_rows(const ObjectiveRows<Scalar>& rows, const ObjectiveRows<Scalar>& directions)
{
  if (rows.rows() == 0)
    throw std::invalid_argument("nearest_to_ray: empty set");
  const auto h = static_cast<std::size_t>(directions.rows());
  std::vector<Index> best(h, 0);
  std::vector<Scalar> best_d2(h, std::numeric_limits<Scalar>::infinity());
  for (Index i = 0; i < rows.rows(); ++i) {
    const Scalar x = rows(i, 0), y = rows(i, 1), z = rows(i, 2);
    const Scalar norm2 = x * x + y * y + z * z;
    for (std::size_t j = 0; j < h; ++j) {
      const auto jj = static_cast<Index>(j);
      const Scalar proj = x * directions(jj, 0) + y * directions(jj, 1) + z * directions(jj, 2);
      const Scalar d2 = std::max(Scalar(0), norm2 - proj * proj);
      if (d2 < best_d2[j]) {
        best_d2[j] = d2;
        best[j] = i;
      }
    }
  }
  return best;
}

/// nearest_rows() for a single direction.
template <typename Scalar>
Index nearest_row(const ObjectiveRows<Scalar>& rows, const Objective<Scalar>& direction)
{
  return nearest_rows(rows, ObjectiveRows<Scalar>(direction.transpose())).front();
}

template <typename Scalar>
Objective<Scalar> nearest_to_ray(const NDSet<Scalar>& s, const Ray<Scalar>& ray)
{
  return s.row(nearest_row(s.rows(), ray.direction()));
}

// ---------------------------------------------------------------------------
// Bellman backups

/// One outcome of an action: its reward vector and the successor's value set.
template <typename Scalar>
struct VectorTransition
{
  Objective<Scalar> reward;
  NDSet<Scalar> successor;
};

/// ND( union over transitions of reward (+) gamma * successor ).
template <typename Scalar>
NDSet<Scalar> nd_bellman_backup(const std::vector<VectorTransition<Scalar>>& transitions, Scalar gamma)
{
  if (transitions.empty())
    throw std::invalid_argument("nd_bellman_backup: no transitions");
  if (!(gamma >= 0 && gamma <= 1))
    throw std::invalid_argument("nd_bellman_backup: discount must lie in [0, 1]");
  Index total = 0;
  for (const auto& t : transitions) {
    if (t.successor.empty())
      throw std::invalid_argument("nd_bellman_backup: empty successor set");
    total += t.successor.size();
  }
  ObjectiveRows<Scalar> all(total, 3);
  Index at = 0;
  for (const auto& t : transitions) {
    const Index k = t.successor.size();
    all.middleRows(at, k) = vec_oplus_set(t.reward, (gamma * t.successor.rows()).eval());
    at += k;
  }
  return nd_filter(all, transitions.front().successor.reference());
}

} // namespace mofql
