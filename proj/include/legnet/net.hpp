#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "legnet/cmd.hpp"
#include "legnet/oracle.hpp"
#include "legnet/types.hpp"

namespace legnet {

// A LEG is a CMD with a designated output variable; the remaining variables
// are its inputs.
using Leg = Cmd;

// An edge joins two LEGs that share variables; the shared variables form
// the intersection set through which updates propagate.
struct NetEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<VariableId> shared;
};

// A collection of LEGs joined by intersection sets. Valid nets are trees:
// the LEG adjacency graph (one edge per pair of LEGs sharing variables)
// must be connected and acyclic, and for v1 nets every intersection set has
// exactly one variable. LegNet values are immutable.
class LegNet {
 public:
  explicit LegNet(std::vector<Leg> legs);

  const std::vector<Leg>& legs() const { return legs_; }
  const std::vector<NetEdge>& edges() const { return edges_; }
  // All variables in first-occurrence order across the LEGs.
  const std::vector<VariableId>& variables() const { return variables_; }

  bool contains(const VariableId& v) const;
  // Indices of the LEGs containing v.
  std::vector<std::size_t> legs_containing(const VariableId& v) const;

 private:
  std::vector<Leg> legs_;
  std::vector<NetEdge> edges_;
  std::vector<VariableId> variables_;
};

// Structural and consistency diagnostics; empty iff the net satisfies all
// LegNet invariants.
std::vector<std::string> validate(const LegNet& net);

// Maximum disagreement between the marginals of a shared variable across
// the LEGs containing it.
double consistency_error(const LegNet& net);

// The shared marginal of v (any containing LEG; a consistent net agrees
// across LEGs within tolerance).
double marginal_of(const LegNet& net, const VariableId& v);

// Applies the ratio update for v in a LEG containing it, then pushes the
// new marginals of shared variables breadth-first over the tree so every
// CMD stays consistent. Multi-variable intersections propagate the joint
// margin over the intersection set.
LegNet set_evidence(const LegNet& net, const VariableId& v, double p);

// One report row per single-variable update. The error is the maximum
// deviation from target over the evidence variables other than the one
// just updated.
struct ConvergenceRow {
  int sweep = 0;  // 1-based
  VariableId updated;
  std::vector<double> evidence_marginals;  // aligned with the Evidence order
  std::vector<double> tracked_marginals;   // aligned with the tracked list
  double error = 0.0;
};

struct ConvergenceReport {
  Evidence targets;
  std::vector<VariableId> tracked;
  std::vector<ConvergenceRow> rows;
  bool converged = false;
  int sweeps_used = 0;
};

// Thrown when a margin freezes mid-iteration; carries the rows produced so
// far.
class ConvergenceAbortedError : public Error {
 public:
  ConvergenceAbortedError(const std::string& what, ConvergenceReport partial)
      : Error(what), partial_(std::move(partial)) {}
  const ConvergenceReport& partial_report() const { return partial_; }

 private:
  ConvergenceReport partial_;
};

// Repeatedly sweeps the evidence variables in order, appending a report row
// after every single-variable update, until a row error drops below tol or
// max_sweeps elapse. `track` names additional variables whose marginals are
// recorded in each row.
std::pair<LegNet, ConvergenceReport> converge(
    const LegNet& net, const Evidence& ev, double tol, int max_sweeps,
    std::vector<VariableId> track = {});

struct OrderSensitivityOptions {
  // Run all permutations when the evidence has at most this many variables,
  // otherwise draw sample_count random orders.
  std::size_t exhaustive_limit = 5;
  std::size_t sample_count = 120;
  std::uint64_t seed = 12345;
};

// Runs one single pass per permutation of the evidence order and returns
// max - min of the goal marginal across permutations.
double order_sensitivity(const LegNet& net, const Evidence& ev,
                         const VariableId& goal,
                         const OrderSensitivityOptions& opts = {});

// The junction-tree extension: the product of all LEG CMDs divided by the
// joint margin of each edge's intersection set. Marginalizing the result
// over any LEG's variables recovers that LEG's CMD.
oracle::FullJoint joint_extension(const LegNet& net);

}  // namespace legnet
