#pragma once

#include <span>
#include <utility>
#include <vector>

#include "legnet/errors.hpp"
#include "legnet/types.hpp"

namespace legnet::oracle {

// Brute-force full-joint reference. Deliberately self-contained: it shares
// no update code with Cmd/LegNet so it can serve as an independent check.
// Same bit-index convention as Cmd: vars[0] is the least significant bit.
struct FullJoint {
  std::vector<VariableId> vars;
  std::vector<double> table;

  FullJoint(std::vector<VariableId> vars, std::vector<double> table);

  std::size_t index_of(const VariableId& v) const;
  bool operator==(const FullJoint&) const = default;
};

// One hard-evidence assignment (variable fixed to 0 or 1).
using HardEvidence = std::vector<std::pair<VariableId, bool>>;

// Bayes conditioning: zero out inconsistent entries, renormalize.
FullJoint exact_condition(const FullJoint& joint, const HardEvidence& hard);

// Thrown when the cyclic fitting loop fails to meet tolerance; carries the
// last iterate so callers can inspect how far it got.
class IpfNonConvergenceError : public NonConvergenceError {
 public:
  IpfNonConvergenceError(double residual, FullJoint last);
  const FullJoint& last_iterate() const { return last_; }

 private:
  FullJoint last_;
};

// Iterative proportional fitting: cyclically applies the single-variable
// ratio update for each target until every target marginal is within tol.
// The limit is the I-projection of the joint onto the margin constraints.
FullJoint ipf_project(const FullJoint& joint, const Evidence& targets,
                      double tol = 1e-12, int max_iter = 1000);

double marginal(const FullJoint& joint, const VariableId& v);

// Joint distribution over a subset, indexed with subset[0] as the least
// significant bit.
std::vector<double> marginal_table(const FullJoint& joint,
                                   std::span<const VariableId> subset);

}  // namespace legnet::oracle
