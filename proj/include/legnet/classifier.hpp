#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "legnet/markov.hpp"
#include "legnet/net.hpp"
#include "legnet/types.hpp"

namespace legnet::sim {

enum class Label { Yes, No, Unknown };

enum class FusionMode { FreshPrior, CarryPosterior };

enum class PipelineChoice { Markov, LegNet, Both };

// What to do with a test's belief in a slot where the test is inapplicable.
enum class InapplicablePolicy { Hold, Decay };

// Bounded logistic curve mapping a scalar measurement to a probability:
// floor + (ceiling - floor) / (1 + exp(-slope * (m - midpoint))).
struct LogisticCurve {
  double midpoint = 0.0;
  double slope = 1.0;
  double floor = 0.0;
  double ceiling = 1.0;

  double operator()(double m) const;
};

// One test: when it applies, how a measurement maps to a false-alarm/miss
// pair, and which net variable its integrated P(Y) drives.
struct TestModel {
  std::string id;
  VariableId variable;
  double applicable_min = -std::numeric_limits<double>::infinity();
  double applicable_max = std::numeric_limits<double>::infinity();
  LogisticCurve false_alarm_curve;
  LogisticCurve miss_curve;

  bool applicable(double measurement) const {
    return measurement >= applicable_min && measurement <= applicable_max;
  }
  markov::TestOutput response(double measurement) const {
    return {false_alarm_curve(measurement), miss_curve(measurement)};
  }
};

// Per-test measurement model of one object: mean and standard deviation of
// the Gaussian perturbation.
struct MeasurementSpec {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ObjectSpec {
  bool truth_yes = false;  // hidden from the classifier
  std::vector<MeasurementSpec> measurements;  // aligned with Scenario::tests
};

struct Thresholds {
  double no = 0.2;
  double yes = 0.8;
};

struct Scenario {
  std::vector<TestModel> tests;
  std::vector<ObjectSpec> objects;
  int slot_count = 1;
  std::uint64_t seed = 0;
  Thresholds thresholds;
  double clamp_eps = 1e-6;
  FusionMode fusion = FusionMode::FreshPrior;
  PipelineChoice pipeline = PipelineChoice::Both;
  double fuse_tol = 1e-7;
  int fuse_max_sweeps = 200;
  double initial_p_yes = 0.5;
  InapplicablePolicy inapplicable = InapplicablePolicy::Hold;
  double decay_rate = 0.0;  // pull toward 0.5 per skipped slot, when Decay
  double reward = 1.0;
  double penalty = 1.0;
  std::optional<LegNet> net;  // required for the LegNet pipeline
  VariableId goal;
};

// Per-object working state: one Markov belief per test plus the latest
// fused probability and label.
struct ObjectState {
  std::size_t object_index = 0;
  bool truth_yes = false;
  std::vector<markov::BinaryBelief> test_beliefs;
  std::vector<bool> skipped;  // last slot's inapplicability, per test
  double fused = 0.5;
  Label label = Label::Unknown;
};

// Advances one test's belief per the measurement; inapplicable measurements
// leave the belief untouched and set the skipped marker.
ObjectState integrate_test(ObjectState state, const TestModel& test,
                           std::size_t test_index, double measurement);

struct FusionInput {
  VariableId var;
  double p_yes = 0.5;
};

// Clamps each per-test P(Y) into [eps, 1-eps] and applies it as soft
// evidence. FreshPrior runs the convergence loop to tolerance from the
// given net; CarryPosterior applies one single pass (the caller passes the
// carried net and relies on oversampling for settling). Returns the updated
// net and the goal marginal.
std::pair<LegNet, double> fuse_slot(const LegNet& net,
                                    std::span<const FusionInput> inputs,
                                    const VariableId& goal, double eps,
                                    FusionMode mode, double tol,
                                    int max_sweeps);

// Y if p >= yes threshold, N if p <= no threshold, else U.
Label classify(double p, double threshold_no, double threshold_yes);

struct PipelineCounts {
  std::int64_t correct_yes = 0;
  std::int64_t correct_no = 0;
  std::int64_t wrong_yes = 0;  // labeled Y, truth N
  std::int64_t wrong_no = 0;   // labeled N, truth Y
  std::int64_t unknown = 0;
  double score = 0.0;

  bool operator==(const PipelineCounts&) const = default;
};

struct PipelineResult {
  PipelineCounts counts;
  // Traces indexed [slot][object].
  std::vector<std::vector<Label>> labels;
  std::vector<std::vector<double>> probabilities;

  bool operator==(const PipelineResult&) const = default;
};

struct PerformanceReport {
  int slot_count = 0;
  std::size_t object_count = 0;
  std::optional<PipelineResult> markov;
  std::optional<PipelineResult> legnet;
  double runtime_seconds = 0.0;  // informational; not part of comparisons
};

// Throws ValidationError on bad configuration.
void validate_scenario(const Scenario& sc);

// Runs the full slot loop. Deterministic for a fixed seed: each object owns
// a private random substream, so results do not depend on evaluation order.
PerformanceReport simulate(const Scenario& sc);

const char* label_name(Label label);

}  // namespace legnet::sim
