#include "legnet/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "legnet/errors.hpp"
#include "legnet/rng.hpp"

namespace legnet::sim {

double LogisticCurve::operator()(double m) const {
  return floor + (ceiling - floor) / (1.0 + std::exp(-slope * (m - midpoint)));
}

ObjectState integrate_test(ObjectState state, const TestModel& test,
                           std::size_t test_index, double measurement) {
  if (test_index >= state.test_beliefs.size()) {
    throw ValidationError("test index out of range");
  }
  if (!test.applicable(measurement)) {
    state.skipped[test_index] = true;
    return state;
  }
  state.skipped[test_index] = false;
  state.test_beliefs[test_index] =
      markov::step(state.test_beliefs[test_index], test.response(measurement));
  return state;
}

std::pair<LegNet, double> fuse_slot(const LegNet& net,
                                    std::span<const FusionInput> inputs,
                                    const VariableId& goal, double eps,
                                    FusionMode mode, double tol,
                                    int max_sweeps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    throw ValidationError("clamp epsilon must be in (0, 0.5)");
  }
  Evidence evidence;
  for (const auto& in : inputs) {
    if (!net.contains(in.var)) {
      throw ValidationError("test evidence variable '" + in.var +
                            "' is not in the net");
    }
    evidence.push_back({in.var, std::clamp(in.p_yes, eps, 1.0 - eps)});
  }
  std::set<VariableId> distinct;
  for (const auto& t : evidence) {
    if (!distinct.insert(t.var).second) {
      throw ValidationError("two tests bound to net variable '" + t.var +
                            "'");
    }
  }
  if (evidence.empty()) return {net, marginal_of(net, goal)};

  if (mode == FusionMode::FreshPrior) {
    auto [fused_net, report] = converge(net, evidence, tol, max_sweeps);
    if (!report.converged) {
      throw NonConvergenceError(
          "slot fusion did not converge within " +
              std::to_string(max_sweeps) + " sweeps",
          report.rows.empty() ? 1.0 : report.rows.back().error);
    }
    const double g = marginal_of(fused_net, goal);
    return {std::move(fused_net), g};
  }

  // CarryPosterior: one sweep, posteriors become the next slot's priors.
  LegNet current = net;
  for (const auto& t : evidence) {
    current = set_evidence(current, t.var, t.p);
  }
  const double g = marginal_of(current, goal);
  return {std::move(current), g};
}

Label classify(double p, double threshold_no, double threshold_yes) {
  if (!(threshold_no >= 0.0 && threshold_no < threshold_yes &&
        threshold_yes <= 1.0)) {
    throw ValidationError("thresholds must satisfy 0 <= no < yes <= 1");
  }
  if (p >= threshold_yes) return Label::Yes;
  if (p <= threshold_no) return Label::No;
  return Label::Unknown;
}

void validate_scenario(const Scenario& sc) {
  if (sc.slot_count < 1) throw ValidationError("slot_count must be >= 1");
  if (!(sc.thresholds.no >= 0.0 && sc.thresholds.no < sc.thresholds.yes &&
        sc.thresholds.yes <= 1.0)) {
    throw ValidationError("thresholds must satisfy 0 <= no < yes <= 1");
  }
  if (!(sc.clamp_eps > 0.0 && sc.clamp_eps < 0.5)) {
    throw ValidationError("clamp epsilon must be in (0, 0.5)");
  }
  if (!(sc.initial_p_yes >= 0.0 && sc.initial_p_yes <= 1.0)) {
    throw ValidationError("initial_p_yes out of [0,1]");
  }
  if (sc.inapplicable == InapplicablePolicy::Decay &&
      !(sc.decay_rate >= 0.0 && sc.decay_rate <= 1.0)) {
    throw ValidationError("decay_rate out of [0,1]");
  }
  if (sc.tests.empty()) throw ValidationError("scenario has no tests");
  if (sc.objects.empty()) throw ValidationError("scenario has no objects");
  std::set<std::string> test_ids;
  for (const auto& t : sc.tests) {
    if (t.id.empty()) throw ValidationError("test with empty id");
    if (!test_ids.insert(t.id).second) {
      throw ValidationError("duplicate test id '" + t.id + "'");
    }
    for (const auto* curve : {&t.false_alarm_curve, &t.miss_curve}) {
      if (!(curve->floor >= 0.0 && curve->floor <= curve->ceiling &&
            curve->ceiling <= 1.0)) {
        throw ValidationError("test '" + t.id +
                              "': curve needs 0 <= floor <= ceiling <= 1");
      }
    }
  }
  for (const auto& obj : sc.objects) {
    if (obj.measurements.size() != sc.tests.size()) {
      throw ValidationError("object has " +
                            std::to_string(obj.measurements.size()) +
                            " measurement specs, expected one per test (" +
                            std::to_string(sc.tests.size()) + ")");
    }
    for (const auto& m : obj.measurements) {
      if (!(m.stddev >= 0.0)) {
        throw ValidationError("negative measurement stddev");
      }
    }
  }

  const bool wants_legnet = sc.pipeline != PipelineChoice::Markov;
  if (wants_legnet) {
    if (!sc.net.has_value()) {
      throw ValidationError("LegNet pipeline requires a net");
    }
    const auto diagnostics = validate(*sc.net);
    if (!diagnostics.empty()) {
      throw ValidationError("scenario net is invalid: " + diagnostics.front());
    }
    if (!sc.net->contains(sc.goal)) {
      throw ValidationError("goal variable '" + sc.goal +
                            "' is not in the net");
    }
    std::set<VariableId> bound;
    for (const auto& t : sc.tests) {
      if (!sc.net->contains(t.variable)) {
        throw ValidationError("test '" + t.id + "' bound to variable '" +
                              t.variable + "' which is not in the net");
      }
      if (!bound.insert(t.variable).second) {
        throw ValidationError("two tests bound to net variable '" +
                              t.variable + "'");
      }
    }
  }
}

PerformanceReport simulate(const Scenario& sc) {
  validate_scenario(sc);
  const auto t_start = std::chrono::steady_clock::now();

  const bool run_markov = sc.pipeline != PipelineChoice::LegNet;
  const bool run_legnet = sc.pipeline != PipelineChoice::Markov;
  const std::size_t n_objects = sc.objects.size();
  const std::size_t n_tests = sc.tests.size();

  PerformanceReport report;
  report.slot_count = sc.slot_count;
  report.object_count = n_objects;
  if (run_markov) report.markov.emplace();
  if (run_legnet) report.legnet.emplace();

  std::vector<ObjectState> states;
  std::vector<markov::BinaryBelief> markov_totals;
  std::vector<LegNet> carried;
  std::vector<GaussianStream> streams;
  states.reserve(n_objects);
  streams.reserve(n_objects);
  for (std::size_t i = 0; i < n_objects; ++i) {
    ObjectState st;
    st.object_index = i;
    st.truth_yes = sc.objects[i].truth_yes;
    st.test_beliefs.assign(n_tests, markov::belief_of_yes(sc.initial_p_yes));
    st.skipped.assign(n_tests, false);
    states.push_back(std::move(st));
    streams.emplace_back(sc.seed, i);
    if (run_markov) {
      markov_totals.push_back(markov::belief_of_yes(sc.initial_p_yes));
    }
    if (run_legnet && sc.fusion == FusionMode::CarryPosterior) {
      carried.push_back(*sc.net);
    }
  }

  auto tally = [&](PipelineResult& result, bool truth_yes, Label label) {
    switch (label) {
      case Label::Yes:
        truth_yes ? ++result.counts.correct_yes : ++result.counts.wrong_yes;
        result.counts.score += truth_yes ? sc.reward : -sc.penalty;
        break;
      case Label::No:
        truth_yes ? ++result.counts.wrong_no : ++result.counts.correct_no;
        result.counts.score += truth_yes ? -sc.penalty : sc.reward;
        break;
      case Label::Unknown:
        ++result.counts.unknown;
        break;
    }
  };

  for (int slot = 0; slot < sc.slot_count; ++slot) {
    if (run_markov) {
      report.markov->labels.emplace_back(n_objects, Label::Unknown);
      report.markov->probabilities.emplace_back(n_objects, 0.0);
    }
    if (run_legnet) {
      report.legnet->labels.emplace_back(n_objects, Label::Unknown);
      report.legnet->probabilities.emplace_back(n_objects, 0.0);
    }
    for (std::size_t i = 0; i < n_objects; ++i) {
      ObjectState& st = states[i];

      // Draw one measurement per test; a zero stddev degenerates to the
      // mean but still consumes one draw, keeping streams aligned across
      // scenario variants.
      std::vector<double> measurements(n_tests);
      for (std::size_t k = 0; k < n_tests; ++k) {
        const auto& spec = sc.objects[i].measurements[k];
        measurements[k] = spec.mean + spec.stddev * streams[i].next();
      }

      std::vector<markov::TestOutput> slot_outputs;
      for (std::size_t k = 0; k < n_tests; ++k) {
        const bool applicable = sc.tests[k].applicable(measurements[k]);
        st = integrate_test(st, sc.tests[k], k, measurements[k]);
        if (applicable) {
          slot_outputs.push_back(sc.tests[k].response(measurements[k]));
        } else if (sc.inapplicable == InapplicablePolicy::Decay) {
          auto& b = st.test_beliefs[k];
          b.p_no += sc.decay_rate * (0.5 - b.p_no);
          b.p_yes += sc.decay_rate * (0.5 - b.p_yes);
        }
      }

      if (run_markov) {
        markov_totals[i] = markov::chain(markov_totals[i], slot_outputs);
        const Label label = classify(markov_totals[i].p_yes,
                                     sc.thresholds.no, sc.thresholds.yes);
        report.markov->labels[slot][i] = label;
        report.markov->probabilities[slot][i] = markov_totals[i].p_yes;
        tally(*report.markov, st.truth_yes, label);
      }

      if (run_legnet) {
        std::vector<FusionInput> inputs;
        inputs.reserve(n_tests);
        for (std::size_t k = 0; k < n_tests; ++k) {
          inputs.push_back(
              {sc.tests[k].variable, st.test_beliefs[k].p_yes});
        }
        const LegNet& start = sc.fusion == FusionMode::CarryPosterior
                                  ? carried[i]
                                  : *sc.net;
        auto [fused_net, fused] =
            fuse_slot(start, inputs, sc.goal, sc.clamp_eps, sc.fusion,
                      sc.fuse_tol, sc.fuse_max_sweeps);
        if (sc.fusion == FusionMode::CarryPosterior) {
          carried[i] = std::move(fused_net);
        }
        st.fused = fused;
        st.label = classify(fused, sc.thresholds.no, sc.thresholds.yes);
        report.legnet->labels[slot][i] = st.label;
        report.legnet->probabilities[slot][i] = fused;
        tally(*report.legnet, st.truth_yes, st.label);
      }
    }
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    t_start)
          .count();
  return report;
}

const char* label_name(Label label) {
  switch (label) {
    case Label::Yes: return "Y";
    case Label::No: return "N";
    case Label::Unknown: return "U";
  }
  return "?";
}

}  // namespace legnet::sim
