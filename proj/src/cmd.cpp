#include "legnet/cmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "legnet/errors.hpp"

namespace legnet {

namespace {

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

Cmd::Cmd(std::vector<VariableId> vars, std::vector<double> table,
         std::size_t output_index)
    : vars_(std::move(vars)), table_(std::move(table)),
      output_index_(output_index) {
  if (vars_.size() < 2) {
    throw ValidationError("CMD needs at least 2 variables, got " +
                          std::to_string(vars_.size()));
  }
  if (vars_.size() > kMaxTableVariables) {
    throw ValidationError("CMD over " + std::to_string(vars_.size()) +
                          " variables exceeds the " +
                          std::to_string(kMaxTableVariables) +
                          "-variable limit");
  }
  std::set<VariableId> seen;
  for (const auto& v : vars_) {
    if (v.empty()) throw ValidationError("empty variable name");
    if (!seen.insert(v).second) {
      throw ValidationError("duplicate variable '" + v + "'");
    }
  }
  if (output_index_ >= vars_.size()) {
    throw ValidationError("output index " + std::to_string(output_index_) +
                          " out of range");
  }
  const std::size_t expected = std::size_t{1} << vars_.size();
  if (table_.size() != expected) {
    throw ValidationError("table has " + std::to_string(table_.size()) +
                          " entries, expected " + std::to_string(expected));
  }
  double sum = 0.0;
  for (double p : table_) {
    if (!(p >= 0.0)) {
      throw ValidationError("negative table entry " + format_double(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTol) {
    throw ValidationError("table entries sum to " + format_double(sum) +
                          ", expected 1");
  }
}

bool Cmd::contains(const VariableId& v) const {
  return std::find(vars_.begin(), vars_.end(), v) != vars_.end();
}

std::size_t Cmd::index_of(const VariableId& v) const {
  auto it = std::find(vars_.begin(), vars_.end(), v);
  if (it == vars_.end()) throw UnknownVariableError(v);
  return static_cast<std::size_t>(it - vars_.begin());
}

std::vector<VariableId> Cmd::input_vars() const {
  std::vector<VariableId> inputs;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (i != output_index_) inputs.push_back(vars_[i]);
  }
  return inputs;
}

double Cmd::marginal(const VariableId& v) const {
  return marginal(index_of(v));
}

double Cmd::marginal(std::size_t var_index) const {
  const std::size_t mask = std::size_t{1} << var_index;
  double sum = 0.0;
  for (std::size_t n = 0; n < table_.size(); ++n) {
    if (n & mask) sum += table_[n];
  }
  return sum;
}

std::vector<std::size_t> Cmd::subset_indices(
    std::span<const VariableId> subset) const {
  std::vector<std::size_t> indices;
  indices.reserve(subset.size());
  std::set<std::size_t> seen;
  for (const auto& v : subset) {
    std::size_t i = index_of(v);
    if (!seen.insert(i).second) {
      throw ValidationError("duplicate variable '" + v + "' in subset");
    }
    indices.push_back(i);
  }
  return indices;
}

std::vector<double> Cmd::joint_margin(
    std::span<const VariableId> subset) const {
  const auto indices = subset_indices(subset);
  std::vector<double> out(std::size_t{1} << indices.size(), 0.0);
  for (std::size_t n = 0; n < table_.size(); ++n) {
    std::size_t sub = 0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
      sub |= ((n >> indices[j]) & 1u) << j;
    }
    out[sub] += table_[n];
  }
  return out;
}

Cmd Cmd::update_to_marginal(const VariableId& v, double p_new) const {
  const std::size_t i = index_of(v);
  if (!(p_new >= 0.0 && p_new <= 1.0)) {
    throw ValidationError("target probability " + format_double(p_new) +
                          " for '" + v + "' out of [0,1]");
  }
  // summation rounding can put the marginal an ulp outside [0,1]
  const double p_old = std::clamp(marginal(i), 0.0, 1.0);
  if (p_old == 0.0 || p_old == 1.0) {
    if (p_new == p_old) return *this;
    throw UnreachableMarginError("unreachable margin: '" + v +
                                 "' is frozen at " + format_double(p_old));
  }
  const double ratio_set = p_new / p_old;
  const double ratio_clear = (1.0 - p_new) / (1.0 - p_old);
  const std::size_t mask = std::size_t{1} << i;
  std::vector<double> table(table_.size());
  for (std::size_t n = 0; n < table_.size(); ++n) {
    table[n] = table_[n] * ((n & mask) ? ratio_set : ratio_clear);
  }
  return Cmd(vars_, std::move(table), output_index_);
}

Cmd Cmd::impose_margin(std::span<const VariableId> subset,
                       std::span<const double> target) const {
  const auto indices = subset_indices(subset);
  const std::size_t sub_size = std::size_t{1} << indices.size();
  if (target.size() != sub_size) {
    throw ValidationError("margin target has " +
                          std::to_string(target.size()) +
                          " entries, expected " + std::to_string(sub_size));
  }
  double target_sum = 0.0;
  for (double p : target) {
    if (!(p >= 0.0)) {
      throw ValidationError("negative margin target entry " +
                            format_double(p));
    }
    target_sum += p;
  }
  if (std::abs(target_sum - 1.0) > kNormalizationTol) {
    throw ValidationError("margin target sums to " +
                          format_double(target_sum) + ", expected 1");
  }

  const auto current = joint_margin(subset);
  std::vector<double> ratio(sub_size, 0.0);
  for (std::size_t s = 0; s < sub_size; ++s) {
    if (current[s] > 0.0) {
      ratio[s] = target[s] / current[s];
    } else if (target[s] > 0.0) {
      throw UnreachableMarginError(
          "unreachable margin: sub-event " + std::to_string(s) +
          " has zero current probability but positive target");
    }
  }
  std::vector<double> table(table_.size());
  for (std::size_t n = 0; n < table_.size(); ++n) {
    std::size_t sub = 0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
      sub |= ((n >> indices[j]) & 1u) << j;
    }
    table[n] = table_[n] * ratio[sub];
  }
  return Cmd(vars_, std::move(table), output_index_);
}

Cmd Cmd::condition_binary(const VariableId& v, bool value) const {
  const std::size_t i = index_of(v);
  const std::size_t mask = std::size_t{1} << i;
  double kept = 0.0;
  for (std::size_t n = 0; n < table_.size(); ++n) {
    if (((n & mask) != 0) == value) kept += table_[n];
  }
  if (kept == 0.0) {
    throw ImpossibleEvidenceError("impossible evidence: '" + v + "' = " +
                                  (value ? "1" : "0") +
                                  " has probability zero");
  }
  if (kept == 1.0) return *this;  // already certain
  std::vector<double> table(table_.size());
  for (std::size_t n = 0; n < table_.size(); ++n) {
    table[n] = (((n & mask) != 0) == value) ? table_[n] / kept : 0.0;
  }
  return Cmd(vars_, std::move(table), output_index_);
}

double kl_divergence(const Cmd& p, const Cmd& q) {
  if (p.vars() != q.vars()) {
    throw ValidationError("KL divergence over mismatched variable lists");
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < p.table().size(); ++n) {
    const double pn = p.table()[n];
    if (pn == 0.0) continue;  // 0*log(0/q) = 0
    const double qn = q.table()[n];
    if (qn == 0.0) return std::numeric_limits<double>::infinity();
    sum += pn * std::log(pn / qn);
  }
  return sum;
}

double entropy(std::span<const double> table) {
  double h = 0.0;
  for (double p : table) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace legnet
