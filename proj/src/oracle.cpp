#include "legnet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace legnet::oracle {

FullJoint::FullJoint(std::vector<VariableId> vars_in,
                     std::vector<double> table_in)
    : vars(std::move(vars_in)), table(std::move(table_in)) {
  if (vars.empty()) throw ValidationError("joint needs at least 1 variable");
  if (vars.size() > kMaxTableVariables) {
    throw ValidationError("joint over " + std::to_string(vars.size()) +
                          " variables exceeds the " +
                          std::to_string(kMaxTableVariables) +
                          "-variable limit");
  }
  std::set<VariableId> seen;
  for (const auto& v : vars) {
    if (v.empty()) throw ValidationError("empty variable name");
    if (!seen.insert(v).second) {
      throw ValidationError("duplicate variable '" + v + "'");
    }
  }
  if (table.size() != (std::size_t{1} << vars.size())) {
    throw ValidationError("joint table has " + std::to_string(table.size()) +
                          " entries, expected " +
                          std::to_string(std::size_t{1} << vars.size()));
  }
  double sum = 0.0;
  for (double p : table) {
    if (!(p >= 0.0)) throw ValidationError("negative joint table entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTol) {
    throw ValidationError("joint table sums to " + std::to_string(sum) +
                          ", expected 1");
  }
}

std::size_t FullJoint::index_of(const VariableId& v) const {
  auto it = std::find(vars.begin(), vars.end(), v);
  if (it == vars.end()) throw UnknownVariableError(v);
  return static_cast<std::size_t>(it - vars.begin());
}

FullJoint exact_condition(const FullJoint& joint, const HardEvidence& hard) {
  std::size_t mask = 0;
  std::size_t required = 0;
  for (const auto& [var, value] : hard) {
    const std::size_t bit = std::size_t{1} << joint.index_of(var);
    mask |= bit;
    if (value) required |= bit;
  }
  double kept = 0.0;
  for (std::size_t n = 0; n < joint.table.size(); ++n) {
    if ((n & mask) == required) kept += joint.table[n];
  }
  if (kept == 0.0) {
    throw ImpossibleEvidenceError(
        "impossible evidence: conditioning event has probability zero");
  }
  std::vector<double> table(joint.table.size());
  for (std::size_t n = 0; n < joint.table.size(); ++n) {
    table[n] = ((n & mask) == required) ? joint.table[n] / kept : 0.0;
  }
  return FullJoint(joint.vars, std::move(table));
}

IpfNonConvergenceError::IpfNonConvergenceError(double residual, FullJoint last)
    : NonConvergenceError("iterative fitting did not converge, residual " +
                              std::to_string(residual),
                          residual),
      last_(std::move(last)) {}

FullJoint ipf_project(const FullJoint& joint, const Evidence& targets,
                      double tol, int max_iter) {
  if (tol <= 0.0) throw ValidationError("tolerance must be positive");
  std::vector<std::size_t> bits;
  std::set<VariableId> seen;
  for (const auto& t : targets) {
    if (!(t.p >= 0.0 && t.p <= 1.0)) {
      throw ValidationError("target probability for '" + t.var +
                            "' out of [0,1]");
    }
    if (!seen.insert(t.var).second) {
      throw ValidationError("duplicate target for '" + t.var + "'");
    }
    bits.push_back(joint.index_of(t.var));
  }

  std::vector<double> table = joint.table;
  auto margin = [&](std::size_t bit) {
    const std::size_t mask = std::size_t{1} << bit;
    double sum = 0.0;
    for (std::size_t n = 0; n < table.size(); ++n) {
      if (n & mask) sum += table[n];
    }
    return sum;
  };

  double residual = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const double p_new = targets[k].p;
      // summation rounding can put the margin an ulp outside [0,1]
      const double p_old = std::clamp(margin(bits[k]), 0.0, 1.0);
      if (p_old == 0.0 || p_old == 1.0) {
        if (p_new == p_old) continue;
        throw UnreachableMarginError("unreachable margin: '" +
                                     targets[k].var + "' is frozen at " +
                                     std::to_string(p_old));
      }
      const double r1 = p_new / p_old;
      const double r0 = (1.0 - p_new) / (1.0 - p_old);
      const std::size_t mask = std::size_t{1} << bits[k];
      for (std::size_t n = 0; n < table.size(); ++n) {
        table[n] *= (n & mask) ? r1 : r0;
      }
    }
    residual = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      residual = std::max(residual, std::abs(margin(bits[k]) - targets[k].p));
    }
    if (residual < tol) return FullJoint(joint.vars, std::move(table));
  }
  throw IpfNonConvergenceError(residual,
                               FullJoint(joint.vars, std::move(table)));
}

double marginal(const FullJoint& joint, const VariableId& v) {
  const std::size_t mask = std::size_t{1} << joint.index_of(v);
  double sum = 0.0;
  for (std::size_t n = 0; n < joint.table.size(); ++n) {
    if (n & mask) sum += joint.table[n];
  }
  return sum;
}

std::vector<double> marginal_table(const FullJoint& joint,
                                   std::span<const VariableId> subset) {
  std::vector<std::size_t> bits;
  std::set<VariableId> seen;
  for (const auto& v : subset) {
    if (!seen.insert(v).second) {
      throw ValidationError("duplicate variable '" + v + "' in subset");
    }
    bits.push_back(joint.index_of(v));
  }
  std::vector<double> out(std::size_t{1} << bits.size(), 0.0);
  for (std::size_t n = 0; n < joint.table.size(); ++n) {
    std::size_t sub = 0;
    for (std::size_t j = 0; j < bits.size(); ++j) {
      sub |= ((n >> bits[j]) & 1u) << j;
    }
    out[sub] += joint.table[n];
  }
  return out;
}

}  // namespace legnet::oracle
