#pragma once

#include <utility>
#include <vector>

#include "legnet/cmd.hpp"
#include "legnet/net.hpp"
#include "legnet/types.hpp"

namespace legnet {

// A constraint on the probability of one joint sub-event, e.g.
// P(I1=1, O=0) = 0.05.
struct EventConstraint {
  std::vector<std::pair<VariableId, bool>> event;
  double p = 0.0;

  bool operator==(const EventConstraint&) const = default;
};

// Partial specification of a prior: per-variable marginal targets plus
// optional joint-event constraints within a LEG.
struct PriorConstraints {
  std::vector<std::pair<VariableId, double>> marginals;
  std::vector<EventConstraint> events;
};

// Maximum-entropy table satisfying the constraints, computed by cyclic
// ratio updates seeded from the uniform distribution. Runs until the worst
// constraint residual drops below tol.
Cmd estimate_cmd(const std::vector<VariableId>& vars,
                 std::size_t output_index, const PriorConstraints& c,
                 double tol = 1e-10, int max_iter = 100000);

// One LEG of a net under construction: two inputs and one output.
struct LegStructure {
  std::vector<VariableId> inputs;
  VariableId output;
};

// Estimates every CMD of a tree-shaped structure. Shared-variable marginals
// are duplicated into every containing LEG (propagated breadth-first from
// the first LEG), so the result is consistent by construction.
LegNet estimate_net(const std::vector<LegStructure>& structure,
                    const PriorConstraints& c, double tol = 1e-10,
                    int max_iter = 100000);

}  // namespace legnet
