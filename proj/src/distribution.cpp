#include "qcm/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qcm {

namespace {

double clamp_prob(double p) { return p < 0.0 ? 0.0 : p; }

}  // namespace

Distribution::Distribution() : table_(1, 1.0) {}

Distribution::Distribution(std::vector<Variable> variables,
                           std::vector<double> table)
    : variables_(std::move(variables)), table_(std::move(table)) {
  std::size_t expect = 1;
  for (const auto& v : variables_) {
    if (v.outcomes.empty())
      throw std::invalid_argument("distribution: variable '" + v.id +
                                  "' has no outcomes");
    expect *= v.outcomes.size();
  }
  if (table_.size() != expect)
    throw std::invalid_argument("distribution: table size does not match "
                                "outcome space");
  double sum = 0.0;
  for (double p : table_) {
    if (p < -1e-12)
      throw std::invalid_argument("distribution: negative probability " +
                                  std::to_string(p));
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("distribution: probabilities sum to " +
                                std::to_string(sum));
}

std::optional<std::size_t> Distribution::variable_index(
    const std::string& id) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].id == id) return i;
  return std::nullopt;
}

std::size_t Distribution::flat_index(
    const std::vector<std::size_t>& assignment) const {
  if (assignment.size() != variables_.size())
    throw std::invalid_argument("distribution: assignment length mismatch");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (assignment[i] >= variables_[i].outcomes.size())
      throw std::invalid_argument("distribution: outcome index out of range");
    idx = idx * variables_[i].outcomes.size() + assignment[i];
  }
  return idx;
}

std::vector<std::size_t> Distribution::unflatten(std::size_t flat) const {
  std::vector<std::size_t> out(variables_.size(), 0);
  for (std::size_t i = variables_.size(); i-- > 0;) {
    out[i] = flat % variables_[i].outcomes.size();
    flat /= variables_[i].outcomes.size();
  }
  return out;
}

double Distribution::prob(const std::vector<std::size_t>& assignment) const {
  return clamp_prob(table_[flat_index(assignment)]);
}

double Distribution::prob_at(std::size_t flat) const {
  return clamp_prob(table_.at(flat));
}

Distribution Distribution::marginal(
    const std::vector<std::size_t>& keep) const {
  std::vector<Variable> vars;
  for (std::size_t i : keep) vars.push_back(variables_.at(i));
  std::size_t size = 1;
  for (const auto& v : vars) size *= v.outcomes.size();
  std::vector<double> table(size, 0.0);
  for (std::size_t f = 0; f < table_.size(); ++f) {
    const auto full = unflatten(f);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < keep.size(); ++j)
      idx = idx * variables_[keep[j]].outcomes.size() + full[keep[j]];
    table[idx] += clamp_prob(table_[f]);
  }
  return Distribution(std::move(vars), std::move(table));
}

Distribution Distribution::condition(
    const std::vector<std::pair<std::size_t, std::size_t>>& fixed) const {
  std::vector<std::optional<std::size_t>> want(variables_.size());
  for (const auto& [var, outcome] : fixed) {
    if (var >= variables_.size() ||
        outcome >= variables_[var].outcomes.size())
      throw std::invalid_argument("condition: bad variable or outcome index");
    want[var] = outcome;
  }

  std::vector<Variable> vars;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (!want[i]) {
      keep.push_back(i);
      vars.push_back(variables_[i]);
    }

  std::size_t size = 1;
  for (const auto& v : vars) size *= v.outcomes.size();
  std::vector<double> table(size, 0.0);
  double mass = 0.0;
  for (std::size_t f = 0; f < table_.size(); ++f) {
    const auto full = unflatten(f);
    bool match = true;
    for (std::size_t i = 0; i < variables_.size() && match; ++i)
      if (want[i] && full[i] != *want[i]) match = false;
    if (!match) continue;
    std::size_t idx = 0;
    for (std::size_t j = 0; j < keep.size(); ++j)
      idx = idx * variables_[keep[j]].outcomes.size() + full[keep[j]];
    const double p = clamp_prob(table_[f]);
    table[idx] += p;
    mass += p;
  }
  if (mass <= 1e-300)
    throw std::runtime_error("condition: conditioning event has zero mass");
  for (double& p : table) p /= mass;
  return Distribution(std::move(vars), std::move(table));
}

double Distribution::max_abs_diff(const Distribution& other) const {
  if (table_.size() != other.table_.size())
    throw std::invalid_argument("distribution diff: shape mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < table_.size(); ++i)
    v = std::max(v, std::abs(clamp_prob(table_[i]) -
                             clamp_prob(other.table_[i])));
  return v;
}

CiResult conditionally_independent(const Distribution& d,
                                   const std::vector<std::size_t>& x1,
                                   const std::vector<std::size_t>& x2,
                                   const std::vector<std::size_t>& x3,
                                   double tol) {
  if (x1.empty() || x2.empty())
    throw std::invalid_argument("conditional independence: x1 and x2 must be "
                                "non-empty");
  std::vector<int> role(d.variable_count(), 0);
  auto mark = [&](const std::vector<std::size_t>& set, int r) {
    for (std::size_t v : set) {
      if (v >= d.variable_count())
        throw std::invalid_argument("conditional independence: unknown "
                                    "variable index");
      if (role[v] != 0)
        throw std::invalid_argument("conditional independence: sets must be "
                                    "disjoint");
      role[v] = r;
    }
  };
  mark(x1, 1);
  mark(x2, 2);
  mark(x3, 3);

  // Marginal over x1 u x2 u x3 in that order.
  std::vector<std::size_t> keep;
  std::size_t n1 = x1.size(), n2 = x2.size();
  keep.insert(keep.end(), x1.begin(), x1.end());
  keep.insert(keep.end(), x2.begin(), x2.end());
  keep.insert(keep.end(), x3.begin(), x3.end());
  const Distribution m = d.marginal(keep);

  std::vector<std::size_t> i1(n1), i2(n2), i3(keep.size() - n1 - n2);
  for (std::size_t i = 0; i < n1; ++i) i1[i] = i;
  for (std::size_t i = 0; i < n2; ++i) i2[i] = n1 + i;
  for (std::size_t i = 0; i < i3.size(); ++i) i3[i] = n1 + n2 + i;

  const Distribution m13 = m.marginal([&] {
    auto v = i1;
    v.insert(v.end(), i3.begin(), i3.end());
    return v;
  }());
  const Distribution m23 = m.marginal([&] {
    auto v = i2;
    v.insert(v.end(), i3.begin(), i3.end());
    return v;
  }());
  const Distribution m3 = m.marginal(i3);

  CiResult res;
  for (std::size_t f = 0; f < m.table_size(); ++f) {
    const auto a = m.unflatten(f);
    std::vector<std::size_t> a3(i3.size());
    for (std::size_t i = 0; i < i3.size(); ++i) a3[i] = a[n1 + n2 + i];
    const double p3 = m3.prob(a3);
    if (p3 <= tol) continue;

    std::vector<std::size_t> a13(n1 + i3.size()), a23(n2 + i3.size());
    for (std::size_t i = 0; i < n1; ++i) a13[i] = a[i];
    for (std::size_t i = 0; i < i3.size(); ++i) a13[n1 + i] = a3[i];
    for (std::size_t i = 0; i < n2; ++i) a23[i] = a[n1 + i];
    for (std::size_t i = 0; i < i3.size(); ++i) a23[n2 + i] = a3[i];

    const double lhs = m.prob_at(f) / p3;
    const double rhs = (m13.prob(a13) / p3) * (m23.prob(a23) / p3);
    res.max_violation = std::max(res.max_violation, std::abs(lhs - rhs));
  }
  res.independent = res.max_violation <= tol;
  return res;
}

}  // namespace qcm
