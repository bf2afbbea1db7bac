#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "legnet/classifier.hpp"
#include "legnet/estimation.hpp"
#include "legnet/net.hpp"
#include "legnet/types.hpp"

namespace legnet::io {

// On-disk net description. Each LEG block carries either an explicit
// probability table (2^k entries, vars[0] = first input varying fastest) or
// a constraint block to be solved by estimation.
struct LegConstraintsDoc {
  std::vector<std::pair<std::string, double>> marginals;
  std::vector<EventConstraint> events;

  bool operator==(const LegConstraintsDoc&) const = default;
};

struct LegDoc {
  std::vector<std::string> inputs;
  std::string output;
  std::optional<std::vector<double>> table;
  std::optional<LegConstraintsDoc> constraints;

  bool operator==(const LegDoc&) const = default;
};

struct NetDocument {
  int version = 1;
  std::vector<std::string> variables;
  std::vector<LegDoc> legs;
  Evidence evidence;  // optional in the file; empty when absent

  bool operator==(const NetDocument&) const = default;
};

// Parse errors carry file:line:column; semantic errors carry the JSON path.
NetDocument parse_net_document(const std::string& text,
                               const std::string& filename = "<input>");
std::string serialize_net_document(const NetDocument& doc);

// Builds the runtime net. Requires every LEG to carry an explicit table;
// documents with constraint blocks go through estimate_from_document first.
LegNet to_net(const NetDocument& doc);

// Solves every constraint block and returns a document with explicit
// tables. Requires all LEGs to be constraint blocks.
NetDocument estimate_from_document(const NetDocument& doc);

// Scenario description for the slot simulator.
struct CurveDoc {
  double midpoint = 0.0;
  double slope = 1.0;
  double floor = 0.0;
  double ceiling = 1.0;

  bool operator==(const CurveDoc&) const = default;
};

struct TestDoc {
  std::string id;
  std::string variable;
  std::optional<std::pair<double, double>> applicable_range;
  CurveDoc false_alarm_curve;
  CurveDoc miss_curve;

  bool operator==(const TestDoc&) const = default;
};

struct ObjectGroupDoc {
  bool truth_yes = false;
  int count = 1;
  std::vector<std::pair<std::string, sim::MeasurementSpec>> measurements;
};

struct ScenarioDocument {
  int version = 1;
  std::string net_path;
  std::string goal;
  int slot_count = 1;
  std::uint64_t seed = 0;
  double threshold_no = 0.2;
  double threshold_yes = 0.8;
  double clamp_eps = 1e-6;
  std::string fusion_mode = "fresh-prior";
  std::string pipeline = "both";
  double fuse_tol = 1e-7;
  int fuse_max_sweeps = 200;
  double initial_p_yes = 0.5;
  std::string inapplicable_policy = "hold";
  double decay_rate = 0.0;
  double reward = 1.0;
  double penalty = 1.0;
  std::vector<TestDoc> tests;
  std::vector<ObjectGroupDoc> objects;
};

ScenarioDocument parse_scenario_document(
    const std::string& text, const std::string& filename = "<input>");

// Assembles the runtime scenario; "count" object groups are expanded into
// that many identical specs.
sim::Scenario build_scenario(const ScenarioDocument& doc,
                             const NetDocument& net_doc);

// "I1=0.9,I2=0.1" -> ordered evidence list.
Evidence parse_evidence_string(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace legnet::io
