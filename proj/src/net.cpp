#include "legnet/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <random>
#include <set>

#include "legnet/errors.hpp"

namespace legnet {

namespace {

std::string format_delta(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7g", x);
  return buf;
}

// Tree walk order: (leg, parent edge) pairs, breadth-first from root.
struct TreeStep {
  std::size_t leg;
  const NetEdge* via;  // null for the root
  std::size_t parent;
};

std::vector<TreeStep> bfs_order(const LegNet& net, std::size_t root) {
  std::vector<TreeStep> order;
  std::vector<bool> visited(net.legs().size(), false);
  std::deque<std::size_t> queue{root};
  visited[root] = true;
  order.push_back({root, nullptr, root});
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (const auto& e : net.edges()) {
      const std::size_t other = (e.a == cur) ? e.b : (e.b == cur ? e.a : cur);
      if (other == cur || visited[other]) continue;
      visited[other] = true;
      order.push_back({other, &e, cur});
      queue.push_back(other);
    }
  }
  if (order.size() != net.legs().size()) {
    throw ValidationError("LEG graph is not connected");
  }
  return order;
}

// Union-find over LEG indices; reports a cycle and the component count.
struct GraphShape {
  bool cycle = false;
  std::size_t components = 0;
};

GraphShape graph_shape(const LegNet& net) {
  std::vector<std::size_t> parent(net.legs().size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  GraphShape shape;
  for (const auto& e : net.edges()) {
    const std::size_t ra = find(e.a);
    const std::size_t rb = find(e.b);
    if (ra == rb) {
      shape.cycle = true;
    } else {
      parent[ra] = rb;
    }
  }
  for (std::size_t i = 0; i < net.legs().size(); ++i) {
    if (find(i) == i) ++shape.components;
  }
  return shape;
}

void require_tree(const LegNet& net) {
  const GraphShape shape = graph_shape(net);
  if (shape.cycle) throw ValidationError("LEG graph contains a cycle");
  if (shape.components > 1) {
    throw ValidationError("LEG graph is not connected");
  }
}

}  // namespace

LegNet::LegNet(std::vector<Leg> legs) : legs_(std::move(legs)) {
  if (legs_.empty()) throw ValidationError("net needs at least one LEG");
  std::set<VariableId> seen;
  for (const auto& leg : legs_) {
    for (const auto& v : leg.vars()) {
      if (seen.insert(v).second) variables_.push_back(v);
    }
  }
  for (std::size_t i = 0; i < legs_.size(); ++i) {
    for (std::size_t j = i + 1; j < legs_.size(); ++j) {
      NetEdge edge{i, j, {}};
      for (const auto& v : legs_[i].vars()) {
        if (legs_[j].contains(v)) edge.shared.push_back(v);
      }
      if (!edge.shared.empty()) edges_.push_back(std::move(edge));
    }
  }
}

bool LegNet::contains(const VariableId& v) const {
  return std::find(variables_.begin(), variables_.end(), v) !=
         variables_.end();
}

std::vector<std::size_t> LegNet::legs_containing(const VariableId& v) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < legs_.size(); ++i) {
    if (legs_[i].contains(v)) out.push_back(i);
  }
  return out;
}

std::vector<std::string> validate(const LegNet& net) {
  std::vector<std::string> diagnostics;

  for (std::size_t i = 0; i < net.legs().size(); ++i) {
    if (net.legs()[i].arity() != 3) {
      diagnostics.push_back("LEG " + std::to_string(i) + " has " +
                            std::to_string(net.legs()[i].arity()) +
                            " variables (expected 3: two inputs and one "
                            "output)");
    }
  }

  for (const auto& e : net.edges()) {
    if (e.shared.size() > 1) {
      diagnostics.push_back("LEGs " + std::to_string(e.a) + " and " +
                            std::to_string(e.b) + ": intersection set size " +
                            std::to_string(e.shared.size()) + " exceeds 1");
    }
  }

  const GraphShape shape = graph_shape(net);
  if (shape.cycle) diagnostics.push_back("LEG graph contains a cycle");
  if (shape.components > 1) {
    diagnostics.push_back("LEG graph is not connected");
  }

  for (const auto& e : net.edges()) {
    for (const auto& v : e.shared) {
      const double delta = std::abs(net.legs()[e.a].marginal(v) -
                                    net.legs()[e.b].marginal(v));
      if (delta > kConsistencyTol) {
        diagnostics.push_back("inconsistent marginal for " + v + " (delta=" +
                              format_delta(delta) + ")");
      }
    }
  }
  return diagnostics;
}

double consistency_error(const LegNet& net) {
  double worst = 0.0;
  for (const auto& e : net.edges()) {
    for (const auto& v : e.shared) {
      worst = std::max(worst, std::abs(net.legs()[e.a].marginal(v) -
                                       net.legs()[e.b].marginal(v)));
    }
  }
  return worst;
}

double marginal_of(const LegNet& net, const VariableId& v) {
  for (const auto& leg : net.legs()) {
    if (leg.contains(v)) return leg.marginal(v);
  }
  throw UnknownVariableError(v);
}

LegNet set_evidence(const LegNet& net, const VariableId& v, double p) {
  require_tree(net);
  const auto holders = net.legs_containing(v);
  if (holders.empty()) throw UnknownVariableError(v);
  const std::size_t root = holders.front();

  std::vector<Leg> legs = net.legs();
  for (const auto& step : bfs_order(net, root)) {
    if (step.via == nullptr) {
      legs[step.leg] = legs[step.leg].update_to_marginal(v, p);
      continue;
    }
    const auto& shared = step.via->shared;
    if (shared.size() == 1) {
      // Rounding in a renormalized parent can leave the marginal an ulp off
      // the boundary while the child sits exactly on it (or vice versa);
      // snap near-hard values so conditioning stays idempotent across LEGs.
      double pushed = std::clamp(legs[step.parent].marginal(shared.front()),
                                 0.0, 1.0);
      if (pushed < 1e-12) pushed = 0.0;
      if (pushed > 1.0 - 1e-12) pushed = 1.0;
      legs[step.leg] = legs[step.leg].update_to_marginal(shared.front(),
                                                         pushed);
    } else {
      const auto target = legs[step.parent].joint_margin(shared);
      legs[step.leg] = legs[step.leg].impose_margin(shared, target);
    }
  }
  return LegNet(std::move(legs));
}

std::pair<LegNet, ConvergenceReport> converge(const LegNet& net,
                                              const Evidence& ev, double tol,
                                              int max_sweeps,
                                              std::vector<VariableId> track) {
  if (ev.empty()) throw ValidationError("no evidence targets");
  if (tol <= 0.0) throw ValidationError("tolerance must be positive");
  if (max_sweeps < 1) throw ValidationError("max sweeps must be at least 1");
  std::set<VariableId> seen;
  for (const auto& t : ev) {
    if (!net.contains(t.var)) throw UnknownVariableError(t.var);
    if (!seen.insert(t.var).second) {
      throw ValidationError("duplicate evidence target for '" + t.var + "'");
    }
    if (!(t.p >= 0.0 && t.p <= 1.0)) {
      throw ValidationError("evidence probability for '" + t.var +
                            "' out of [0,1]");
    }
  }
  for (const auto& v : track) {
    if (!net.contains(v)) throw UnknownVariableError(v);
  }

  ConvergenceReport report;
  report.targets = ev;
  report.tracked = std::move(track);

  LegNet current = net;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    report.sweeps_used = sweep;
    for (const auto& target : ev) {
      try {
        current = set_evidence(current, target.var, target.p);
      } catch (const UnreachableMarginError& e) {
        throw ConvergenceAbortedError(e.what(), report);
      } catch (const ImpossibleEvidenceError& e) {
        throw ConvergenceAbortedError(e.what(), report);
      }
      ConvergenceRow row;
      row.sweep = sweep;
      row.updated = target.var;
      for (const auto& t : ev) {
        row.evidence_marginals.push_back(marginal_of(current, t.var));
      }
      for (const auto& v : report.tracked) {
        row.tracked_marginals.push_back(marginal_of(current, v));
      }
      double error = 0.0;
      for (std::size_t k = 0; k < ev.size(); ++k) {
        if (ev[k].var == target.var) continue;
        error = std::max(error,
                         std::abs(row.evidence_marginals[k] - ev[k].p));
      }
      row.error = error;
      report.rows.push_back(std::move(row));
      if (error < tol) {
        report.converged = true;
        return {std::move(current), std::move(report)};
      }
    }
  }
  return {std::move(current), std::move(report)};
}

double order_sensitivity(const LegNet& net, const Evidence& ev,
                         const VariableId& goal,
                         const OrderSensitivityOptions& opts) {
  if (ev.size() < 2) {
    throw ValidationError("order sensitivity needs at least 2 evidence "
                          "variables");
  }
  if (!net.contains(goal)) throw UnknownVariableError(goal);

  auto run_order = [&](const std::vector<std::size_t>& perm) {
    LegNet current = net;
    for (std::size_t k : perm) {
      current = set_evidence(current, ev[k].var, ev[k].p);
    }
    return marginal_of(current, goal);
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> perm(ev.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  if (ev.size() <= opts.exhaustive_limit) {
    do {
      const double g = run_order(perm);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::mt19937_64 rng(opts.seed);
    for (std::size_t s = 0; s < opts.sample_count; ++s) {
      std::shuffle(perm.begin(), perm.end(), rng);
      const double g = run_order(perm);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
  }
  return hi - lo;
}

oracle::FullJoint joint_extension(const LegNet& net) {
  require_tree(net);
  const auto& vars = net.variables();
  if (vars.size() > kMaxTableVariables) {
    throw ValidationError("joint extension over " +
                          std::to_string(vars.size()) +
                          " variables exceeds the " +
                          std::to_string(kMaxTableVariables) +
                          "-variable limit");
  }
  auto global_bit = [&](const VariableId& v) {
    return static_cast<std::size_t>(
        std::find(vars.begin(), vars.end(), v) - vars.begin());
  };

  // Per LEG: global bit of each of its variables, in the LEG's table order.
  std::vector<std::vector<std::size_t>> leg_bits;
  for (const auto& leg : net.legs()) {
    std::vector<std::size_t> bits;
    for (const auto& v : leg.vars()) bits.push_back(global_bit(v));
    leg_bits.push_back(std::move(bits));
  }
  // Per edge: the joint margin of the intersection set (taken from side a;
  // a consistent net agrees across sides) and the global bits indexing it.
  struct EdgeFactor {
    std::vector<std::size_t> bits;
    std::vector<double> margin;
  };
  std::vector<EdgeFactor> edge_factors;
  for (const auto& e : net.edges()) {
    EdgeFactor f;
    for (const auto& v : e.shared) f.bits.push_back(global_bit(v));
    f.margin = net.legs()[e.a].joint_margin(e.shared);
    edge_factors.push_back(std::move(f));
  }

  auto sub_index = [](std::size_t n, const std::vector<std::size_t>& bits) {
    std::size_t sub = 0;
    for (std::size_t j = 0; j < bits.size(); ++j) {
      sub |= ((n >> bits[j]) & 1u) << j;
    }
    return sub;
  };

  std::vector<double> table(std::size_t{1} << vars.size(), 0.0);
  for (std::size_t n = 0; n < table.size(); ++n) {
    double value = 1.0;
    for (std::size_t l = 0; l < net.legs().size(); ++l) {
      value *= net.legs()[l].table()[sub_index(n, leg_bits[l])];
      if (value == 0.0) break;
    }
    if (value == 0.0) continue;
    // A positive numerator forces each separator margin positive: the
    // margin in LEG a is at least LEG a's own table entry.
    for (const auto& f : edge_factors) {
      value /= f.margin[sub_index(n, f.bits)];
    }
    table[n] = value;
  }
  return oracle::FullJoint(vars, std::move(table));
}

}  // namespace legnet
