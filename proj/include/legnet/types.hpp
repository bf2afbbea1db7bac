#pragma once

#include <string>
#include <vector>

namespace legnet {

// Variables are identified by short unique names; comparison is exact
// string equality.
using VariableId = std::string;

// One soft-evidence target: drive the marginal of `var` to `p`.
struct EvidenceTarget {
  VariableId var;
  double p = 0.0;

  bool operator==(const EvidenceTarget&) const = default;
};

// Ordered evidence assignment. The order is significant: it is the order
// in which single-variable updates are applied.
using Evidence = std::vector<EvidenceTarget>;

// Tolerances used across the library.
inline constexpr double kNormalizationTol = 1e-9;   // table entries must sum to 1
inline constexpr double kConsistencyTol = 1e-9;     // shared marginals must agree
inline constexpr double kMarginExactTol = 1e-12;    // margin after a ratio update

// Largest variable count for any dense joint table (2^20 entries).
inline constexpr std::size_t kMaxTableVariables = 20;

}  // namespace legnet
