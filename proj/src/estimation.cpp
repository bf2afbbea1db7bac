#include "legnet/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "legnet/errors.hpp"

namespace legnet {

namespace {

std::string event_to_string(const EventConstraint& ec) {
  std::string out = "{";
  for (std::size_t i = 0; i < ec.event.size(); ++i) {
    if (i > 0) out += ", ";
    out += ec.event[i].first + "=" + (ec.event[i].second ? "1" : "0");
  }
  return out + "}";
}

// Normalized constraint form over table indices: scale entries matching
// (index & mask) == required toward probability p.
struct IndexedConstraint {
  std::size_t mask = 0;
  std::size_t required = 0;
  double p = 0.0;
  std::string label;
};

double event_probability(const std::vector<double>& table,
                         const IndexedConstraint& ic) {
  double sum = 0.0;
  for (std::size_t n = 0; n < table.size(); ++n) {
    if ((n & ic.mask) == ic.required) sum += table[n];
  }
  return std::clamp(sum, 0.0, 1.0);
}

std::vector<IndexedConstraint> index_constraints(
    const std::vector<VariableId>& vars, const PriorConstraints& c) {
  auto bit_of = [&](const VariableId& v) {
    auto it = std::find(vars.begin(), vars.end(), v);
    if (it == vars.end()) throw UnknownVariableError(v);
    return static_cast<std::size_t>(it - vars.begin());
  };

  std::vector<IndexedConstraint> out;
  std::map<VariableId, double> marginal_targets;
  for (const auto& [v, p] : c.marginals) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("marginal target for '" + v + "' out of [0,1]");
    }
    auto [it, inserted] = marginal_targets.emplace(v, p);
    if (!inserted) {
      if (it->second != p) {
        throw InfeasibleConstraintsError(
            "conflicting marginal targets for '" + v + "': " +
            std::to_string(it->second) + " vs " + std::to_string(p));
      }
      continue;  // duplicate with identical target
    }
    IndexedConstraint ic;
    ic.mask = ic.required = std::size_t{1} << bit_of(v);
    ic.p = p;
    ic.label = "P(" + v + ")";
    out.push_back(std::move(ic));
  }

  std::map<std::pair<std::size_t, std::size_t>, double> event_targets;
  for (const auto& ec : c.events) {
    if (!(ec.p >= 0.0 && ec.p <= 1.0)) {
      throw ValidationError("event constraint " + event_to_string(ec) +
                            " has probability out of [0,1]");
    }
    if (ec.event.empty()) {
      throw ValidationError("event constraint with empty assignment");
    }
    IndexedConstraint ic;
    std::set<VariableId> seen;
    for (const auto& [v, value] : ec.event) {
      if (!seen.insert(v).second) {
        throw ValidationError("event constraint " + event_to_string(ec) +
                              " assigns '" + v + "' twice");
      }
      const std::size_t bit = std::size_t{1} << bit_of(v);
      ic.mask |= bit;
      if (value) ic.required |= bit;
    }
    ic.p = ec.p;
    ic.label = "P" + event_to_string(ec);
    auto [it, inserted] =
        event_targets.emplace(std::make_pair(ic.mask, ic.required), ec.p);
    if (!inserted) {
      if (it->second != ec.p) {
        throw InfeasibleConstraintsError(
            "conflicting targets for event " + event_to_string(ec) + ": " +
            std::to_string(it->second) + " vs " + std::to_string(ec.p));
      }
      continue;
    }
    // Quick feasibility check: an event cannot be more probable than any
    // constrained marginal of a variable it fixes.
    for (const auto& [v, value] : ec.event) {
      auto mt = marginal_targets.find(v);
      if (mt == marginal_targets.end()) continue;
      const double cap = value ? mt->second : 1.0 - mt->second;
      if (ec.p > cap + 1e-12) {
        throw InfeasibleConstraintsError(
            "infeasible pair: P" + event_to_string(ec) + " = " +
            std::to_string(ec.p) + " exceeds the marginal target P(" + v +
            "=" + (value ? "1" : "0") + ") = " + std::to_string(cap));
      }
    }
    out.push_back(std::move(ic));
  }
  return out;
}

}  // namespace

Cmd estimate_cmd(const std::vector<VariableId>& vars,
                 std::size_t output_index, const PriorConstraints& c,
                 double tol, int max_iter) {
  if (tol <= 0.0) throw ValidationError("tolerance must be positive");
  const auto constraints = index_constraints(vars, c);

  const std::size_t size = std::size_t{1} << vars.size();
  std::vector<double> table(size, 1.0 / static_cast<double>(size));

  double residual = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    for (const auto& ic : constraints) {
      const double current = event_probability(table, ic);
      if (current == ic.p) continue;
      if (current == 0.0 && ic.p > 0.0) {
        throw InfeasibleConstraintsError(
            "infeasible constraints: " + ic.label +
            " has been driven to zero but its target is " +
            std::to_string(ic.p));
      }
      if (current == 1.0 && ic.p < 1.0) {
        throw InfeasibleConstraintsError(
            "infeasible constraints: " + ic.label +
            " has been driven to one but its target is " +
            std::to_string(ic.p));
      }
      const double r_in = current > 0.0 ? ic.p / current : 0.0;
      const double r_out =
          current < 1.0 ? (1.0 - ic.p) / (1.0 - current) : 0.0;
      for (std::size_t n = 0; n < size; ++n) {
        table[n] *= ((n & ic.mask) == ic.required) ? r_in : r_out;
      }
    }
    residual = 0.0;
    for (const auto& ic : constraints) {
      residual =
          std::max(residual, std::abs(event_probability(table, ic) - ic.p));
    }
    if (residual < tol) {
      return Cmd(vars, std::move(table), output_index);
    }
  }
  throw NonConvergenceError(
      "estimation did not converge, residual " + std::to_string(residual) +
          " (constraints may be jointly infeasible)",
      residual);
}

LegNet estimate_net(const std::vector<LegStructure>& structure,
                    const PriorConstraints& c, double tol, int max_iter) {
  if (structure.empty()) throw ValidationError("empty net structure");

  std::vector<std::vector<VariableId>> leg_vars;
  for (const auto& leg : structure) {
    if (leg.inputs.size() != 2) {
      throw ValidationError("LEG must have exactly 2 inputs, got " +
                            std::to_string(leg.inputs.size()));
    }
    std::vector<VariableId> vars = leg.inputs;
    vars.push_back(leg.output);
    leg_vars.push_back(std::move(vars));
  }

  // Structural check on variable sets: tree with singleton intersections.
  struct StructEdge {
    std::size_t a, b;
    std::vector<VariableId> shared;
  };
  std::vector<StructEdge> edges;
  for (std::size_t i = 0; i < leg_vars.size(); ++i) {
    for (std::size_t j = i + 1; j < leg_vars.size(); ++j) {
      std::vector<VariableId> shared;
      for (const auto& v : leg_vars[i]) {
        if (std::find(leg_vars[j].begin(), leg_vars[j].end(), v) !=
            leg_vars[j].end()) {
          shared.push_back(v);
        }
      }
      if (!shared.empty()) edges.push_back({i, j, std::move(shared)});
    }
  }
  for (const auto& e : edges) {
    if (e.shared.size() > 1) {
      throw ValidationError("LEGs " + std::to_string(e.a) + " and " +
                            std::to_string(e.b) + ": intersection set size " +
                            std::to_string(e.shared.size()) + " exceeds 1");
    }
  }
  // connectivity first: with all LEGs reachable, edge count == n-1 is
  // equivalent to acyclicity
  {
    std::vector<bool> reachable(structure.size(), false);
    std::deque<std::size_t> frontier{0};
    reachable[0] = true;
    while (!frontier.empty()) {
      const std::size_t i = frontier.front();
      frontier.pop_front();
      for (const auto& e : edges) {
        if (e.a != i && e.b != i) continue;
        const std::size_t other = e.a == i ? e.b : e.a;
        if (!reachable[other]) {
          reachable[other] = true;
          frontier.push_back(other);
        }
      }
    }
    if (std::find(reachable.begin(), reachable.end(), false) !=
        reachable.end()) {
      throw ValidationError("LEG graph is not connected");
    }
  }
  if (edges.size() + 1 != structure.size()) {
    throw ValidationError("LEG graph contains a cycle");
  }

  // Assign each event constraint to the first LEG covering its variables.
  std::vector<std::vector<EventConstraint>> leg_events(structure.size());
  for (const auto& ec : c.events) {
    bool placed = false;
    for (std::size_t i = 0; i < leg_vars.size() && !placed; ++i) {
      placed = std::all_of(ec.event.begin(), ec.event.end(),
                           [&](const auto& assignment) {
                             return std::find(leg_vars[i].begin(),
                                              leg_vars[i].end(),
                                              assignment.first) !=
                                    leg_vars[i].end();
                           });
      if (placed) leg_events[i].push_back(ec);
    }
    if (!placed) {
      throw ValidationError("event constraint " + event_to_string(ec) +
                            " fits no single LEG");
    }
  }

  // Estimate breadth-first from LEG 0, pinning each shared variable to the
  // marginal already fixed by the estimated neighbor.
  std::vector<std::optional<Cmd>> cmds(structure.size());
  std::deque<std::size_t> queue{0};
  std::vector<bool> visited(structure.size(), false);
  visited[0] = true;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();

    PriorConstraints local;
    std::set<VariableId> pinned;
    for (const auto& e : edges) {
      if (e.a != i && e.b != i) continue;
      const std::size_t other = e.a == i ? e.b : e.a;
      if (!cmds[other].has_value()) continue;
      const VariableId& s = e.shared.front();
      local.marginals.emplace_back(s, cmds[other]->marginal(s));
      pinned.insert(s);
    }
    for (const auto& [v, p] : c.marginals) {
      if (pinned.count(v)) continue;  // inherited value wins; it already
                                      // satisfies the global target
      if (std::find(leg_vars[i].begin(), leg_vars[i].end(), v) !=
          leg_vars[i].end()) {
        local.marginals.emplace_back(v, p);
      }
    }
    local.events = leg_events[i];
    cmds[i] = estimate_cmd(leg_vars[i], leg_vars[i].size() - 1, local, tol,
                           max_iter);

    for (const auto& e : edges) {
      if (e.a != i && e.b != i) continue;
      const std::size_t other = e.a == i ? e.b : e.a;
      if (!visited[other]) {
        visited[other] = true;
        queue.push_back(other);
      }
    }
  }

  std::vector<Leg> legs;
  for (auto& cmd : cmds) legs.push_back(std::move(*cmd));
  return LegNet(std::move(legs));
}

}  // namespace legnet
