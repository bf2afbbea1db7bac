#pragma once

#include <cmath>
#include <span>

#include "legnet/errors.hpp"

namespace legnet::markov {

// Two-state belief over {No, Yes}; components sum to 1 within 1e-12.
struct BinaryBelief {
  double p_no = 0.5;
  double p_yes = 0.5;

  bool operator==(const BinaryBelief&) const = default;
};

inline BinaryBelief belief_of_yes(double p_yes) {
  if (!(p_yes >= 0.0 && p_yes <= 1.0)) {
    throw ValidationError("belief probability out of [0,1]");
  }
  return {1.0 - p_yes, p_yes};
}

// One test's output for one measurement: the false-alarm probability
// P(Y|N) and the miss probability P(N|Y). The derived entries
// P(N|N) = 1 - P(Y|N) and P(Y|Y) = 1 - P(N|Y) complete a column-stochastic
// 2x2 transition matrix.
struct TestOutput {
  double p_false_alarm = 0.0;
  double p_miss = 0.0;
};

// One application of the transition matrix:
//   p_no'  = (1 - p_false_alarm) * p_no + p_miss * p_yes
//   p_yes' = p_false_alarm * p_no + (1 - p_miss) * p_yes
inline BinaryBelief step(const BinaryBelief& b, const TestOutput& t) {
  return {(1.0 - t.p_false_alarm) * b.p_no + t.p_miss * b.p_yes,
          t.p_false_alarm * b.p_no + (1.0 - t.p_miss) * b.p_yes};
}

// Left-fold of step over the outputs in order. Order matters: each test
// modifies the total as if it were the only one.
inline BinaryBelief chain(BinaryBelief b, std::span<const TestOutput> outputs) {
  for (const auto& t : outputs) b = step(b, t);
  return b;
}

}  // namespace legnet::markov
