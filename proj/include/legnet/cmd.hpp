#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "legnet/types.hpp"

namespace legnet {

// Component Marginal Distribution: a joint probability table over an ordered
// list of binary variables.
//
// Index convention: entry n holds the probability of the joint event where
// variable vars[i] has value bit i of n, i.e. vars[0] is the least
// significant bit. For a three-variable CMD over [I1, I2, O] the table is
// laid out as P0..P7 with I1 varying fastest.
//
// Cmd values are immutable; every operation returns a new value.
class Cmd {
 public:
  // Validates: k >= 2, no duplicate variables, output among vars, table of
  // size 2^k with non-negative entries summing to 1 within 1e-9.
  Cmd(std::vector<VariableId> vars, std::vector<double> table,
      std::size_t output_index);

  std::size_t arity() const { return vars_.size(); }
  const std::vector<VariableId>& vars() const { return vars_; }
  const std::vector<double>& table() const { return table_; }
  std::size_t output_index() const { return output_index_; }
  const VariableId& output_var() const { return vars_[output_index_]; }

  bool contains(const VariableId& v) const;
  // Position of v in vars(); throws UnknownVariableError if absent.
  std::size_t index_of(const VariableId& v) const;

  // All variables except the output, in table order.
  std::vector<VariableId> input_vars() const;

  double marginal(const VariableId& v) const;
  double marginal(std::size_t var_index) const;

  // Joint distribution over a subset of variables, indexed with subset[0]
  // as the least significant bit.
  std::vector<double> joint_margin(std::span<const VariableId> subset) const;

  // Minimum-information update driving the marginal of v to p_new: entries
  // with v=1 scale by p_new/p_old, entries with v=0 by (1-p_new)/(1-p_old).
  // Throws UnreachableMarginError if the margin is frozen at 0/1 and p_new
  // differs.
  Cmd update_to_marginal(const VariableId& v, double p_new) const;

  // Generalization of update_to_marginal to a joint target over a variable
  // subset: each entry scales by target(sub-event)/current(sub-event).
  Cmd impose_margin(std::span<const VariableId> subset,
                    std::span<const double> target) const;

  // Hard conditioning: entries inconsistent with v=value become exactly 0,
  // the rest are renormalized. Throws ImpossibleEvidenceError when the
  // conditioned value has probability zero.
  Cmd condition_binary(const VariableId& v, bool value) const;

  bool operator==(const Cmd&) const = default;

 private:
  std::vector<std::size_t> subset_indices(
      std::span<const VariableId> subset) const;

  std::vector<VariableId> vars_;
  std::vector<double> table_;
  std::size_t output_index_;
};

// KL(p || q) = sum over entries with p_n > 0 of p_n * log(p_n / q_n).
// Returns +infinity when p puts mass where q is zero. Requires the same
// variables in the same order.
double kl_divergence(const Cmd& p, const Cmd& q);

// Shannon entropy of the table, 0*log(0) = 0.
double entropy(std::span<const double> table);

}  // namespace legnet
