#include "mofql/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mofql {

void InputSpec::validate() const
{
  if (!(lo < hi))
    throw std::invalid_argument("input '" + name + "': range must satisfy lo < hi");
  if (mf_count < 2)
    throw std::invalid_argument("input '" + name + "': need at least two membership functions");
}

double InputSpec::clamp(double x) const
{
  return std::clamp(x, lo, hi);
}

double membership(double x, const InputSpec& input, int mf_index)
{
  if (mf_index < 0 || mf_index >= input.mf_count)
    throw std::out_of_range("membership: index out of range for input '" + input.name + "'");
  const double t = (input.clamp(x) - input.lo) / input.spacing();
  return std::max(0.0, 1.0 - std::abs(t - mf_index));
}

FuzzyRuleBase::FuzzyRuleBase(std::vector<InputSpec> inputs) : inputs_(std::move(inputs))
{
  if (inputs_.empty())
    throw std::invalid_argument("rule base needs at least one input");
  for (const auto& in : inputs_)
    in.validate();
  strides_.assign(inputs_.size(), 1);
  rule_count_ = 1;
  for (std::size_t i = inputs_.size(); i-- > 0;) {
    strides_[i] = rule_count_;
    rule_count_ *= inputs_[i].mf_count;
  }
}

int FuzzyRuleBase::mf_index(Eigen::Index rule, std::size_t i) const
{
  return static_cast<int>((rule / strides_[i]) % inputs_[i].mf_count);
}

Firing FuzzyRuleBase::firing_strengths(std::span<const double> observation) const
{
  if (observation.size() != inputs_.size())
    throw std::invalid_argument("firing_strengths: observation has wrong dimension");

  // Per input: up to two (index, degree) pairs with non-zero degree.
  struct Active
  {
    int k[2];
    double mu[2];
    int n;
  };
  std::vector<Active> active(inputs_.size());
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    const auto& in = inputs_[i];
    const double t = (in.clamp(observation[i]) - in.lo) / in.spacing();
    const int k0 = std::min(static_cast<int>(std::floor(t)), in.mf_count - 1);
    auto& a = active[i];
    a.n = 0;
    for (int k = k0; k <= std::min(k0 + 1, in.mf_count - 1); ++k) {
      const double mu = std::max(0.0, 1.0 - std::abs(t - k));
      if (mu > 0.0) {
        a.k[a.n] = k;
        a.mu[a.n] = mu;
        ++a.n;
      }
    }
  }

  // Enumerate the product in ascending rule order (last input fastest).
  Firing out;
  std::vector<int> pick(inputs_.size(), 0);
  double total = 0.0;
  while (true) {
    Eigen::Index rule = 0;
    double product = 1.0;
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      rule += active[i].k[pick[i]] * strides_[i];
      product *= active[i].mu[pick[i]];
    }
    if (product > 0.0) {
      out.push_back({rule, product});
      total += product;
    }
    std::size_t i = inputs_.size();
    while (i-- > 0) {
      if (++pick[i] < active[i].n)
        break;
      pick[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1))
      break;
  }

  if (!(total > 0.0))
    throw std::runtime_error("firing_strengths: no rule fires");
  for (auto& r : out)
    r.strength /= total;
  return out;
}

Eigen::VectorXd FuzzyRuleBase::dense_firing_strengths(std::span<const double> observation) const
{
  return to_dense(firing_strengths(observation), rule_count_);
}

Eigen::VectorXd to_dense(const Firing& firing, Eigen::Index rule_count)
{
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(rule_count);
  for (const auto& r : firing)
    phi(r.rule) = r.strength;
  return phi;
}

double defuzzify(std::span<const double> phi, std::span<const double> per_rule_actions)
{
  if (phi.size() != per_rule_actions.size())
    throw std::invalid_argument("defuzzify: firing strengths and actions differ in length");
  double out = 0.0;
  for (std::size_t l = 0; l < phi.size(); ++l)
    out += phi[l] * per_rule_actions[l];
  return out;
}

double defuzzify(const Firing& firing, std::span<const double> actions)
{
  if (firing.size() != actions.size())
    throw std::invalid_argument("defuzzify: one action per active rule required");
  double out = 0.0;
  for (std::size_t i = 0; i < firing.size(); ++i)
    out += firing[i].strength * actions[i];
  return out;
}

} // namespace mofql
