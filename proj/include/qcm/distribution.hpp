#ifndef QCM_DISTRIBUTION_HPP
#define QCM_DISTRIBUTION_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qcm {

// Normalized map from joint outcome tuples to probabilities. The table is
// dense, row-major over the variables in declaration order. Entries may carry
// round-off down to -1e-12; they are clamped to zero on read.
class Distribution {
public:
  struct Variable {
    std::string id;
    std::vector<std::string> outcomes;
  };

  Distribution();  // zero variables, single tuple with probability 1
  Distribution(std::vector<Variable> variables, std::vector<double> table);

  std::size_t variable_count() const { return variables_.size(); }
  const Variable& variable(std::size_t i) const { return variables_.at(i); }
  const std::vector<Variable>& variables() const { return variables_; }
  std::optional<std::size_t> variable_index(const std::string& id) const;

  std::size_t table_size() const { return table_.size(); }
  const std::vector<double>& raw_table() const { return table_; }

  // Probability of a full assignment (one outcome index per variable).
  double prob(const std::vector<std::size_t>& assignment) const;
  double prob_at(std::size_t flat_index) const;

  std::size_t flat_index(const std::vector<std::size_t>& assignment) const;
  std::vector<std::size_t> unflatten(std::size_t flat_index) const;

  Distribution marginal(const std::vector<std::size_t>& keep) const;

  // Conditions on fixed (variable, outcome) pairs, renormalizes and drops the
  // fixed variables. Throws if the conditioning event has ~zero mass.
  Distribution condition(
      const std::vector<std::pair<std::size_t, std::size_t>>& fixed) const;

  double max_abs_diff(const Distribution& other) const;

private:
  std::vector<Variable> variables_;
  std::vector<double> table_;
};

struct CiResult {
  bool independent = true;
  double max_violation = 0.0;
};

// Tests P(x1,x2|x3) = P(x1|x3) P(x2|x3) for all tuples with P(x3) > tol; the
// sets are variable indices into d and must be disjoint, x1 and x2 non-empty.
CiResult conditionally_independent(const Distribution& d,
                                   const std::vector<std::size_t>& x1,
                                   const std::vector<std::size_t>& x2,
                                   const std::vector<std::size_t>& x3,
                                   double tol);

}  // namespace qcm

#endif
