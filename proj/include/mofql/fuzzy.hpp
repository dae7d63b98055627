// Triangular-membership fuzzy inference over a lattice of rules.

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mofql {

/// One fuzzified input: `mf_count` evenly spaced triangles over [lo, hi],
/// shoulders at the endpoints, summing to one everywhere on the range.
struct InputSpec
{
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int mf_count = 2;

  void validate() const;
  double spacing() const { return (hi - lo) / (mf_count - 1); }
  double center(int k) const { return lo + k * spacing(); }
  double clamp(double x) const;
};

/// Membership of x (clamped into range) in triangle `mf_index`.
double membership(double x, const InputSpec& input, int mf_index);

/// Non-zero firing strength of one rule.
struct RuleActivation
{
  Eigen::Index rule = 0;
  double strength = 0.0;
};

/// Active rules in ascending rule order; strengths sum to one.
using Firing = std::vector<RuleActivation>;

/// Full rule lattice: one rule per combination of membership indices, the
/// first input varying slowest.
class FuzzyRuleBase
{
public:
  explicit FuzzyRuleBase(std::vector<InputSpec> inputs);

  const std::vector<InputSpec>& inputs() const { return inputs_; }
  std::size_t input_count() const { return inputs_.size(); }
  Eigen::Index rule_count() const { return rule_count_; }

  /// Membership index of input `i` used by `rule`.
  int mf_index(Eigen::Index rule, std::size_t i) const;

  /// Normalized firing strengths of the rules with non-zero product. At most
  /// 2^n rules fire for n inputs.
  Firing firing_strengths(std::span<const double> observation) const;

  /// Same values laid out over all L rules.
  Eigen::VectorXd dense_firing_strengths(std::span<const double> observation) const;

private:
  std::vector<InputSpec> inputs_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index rule_count_ = 0;
};

Eigen::VectorXd to_dense(const Firing& firing, Eigen::Index rule_count);

/// Weighted-average defuzzification: sum_l phi_l * a_l.
double defuzzify(std::span<const double> phi, std::span<const double> per_rule_actions);

/// Sparse form; `actions[i]` is the consequent of `firing[i].rule`.
double defuzzify(const Firing& firing, std::span<const double> actions);

} // namespace mofql
