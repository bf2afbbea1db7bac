#include "legnet/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "legnet/errors.hpp"

namespace legnet::io {

namespace {

using Json = nlohmann::ordered_json;

// nlohmann reports byte offsets on parse errors; convert to line:column.
std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

Json parse_json(const std::string& text, const std::string& filename) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(filename + ":" + locate(text, e.byte) +
                          ": parse error: " + e.what());
  }
}

[[noreturn]] void fail(const std::string& filename, const std::string& path,
                       const std::string& message) {
  throw ValidationError(filename + ": " + path + ": " + message);
}

const Json& require(const Json& obj, const char* key,
                    const std::string& filename, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(filename, path, std::string("missing required field '") + key + "'");
  }
  return obj.at(key);
}

double as_number(const Json& j, const std::string& filename,
                 const std::string& path) {
  if (!j.is_number()) fail(filename, path, "expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& filename,
                      const std::string& path) {
  if (!j.is_string()) fail(filename, path, "expected a string");
  return j.get<std::string>();
}

int check_version(const Json& root, const std::string& filename) {
  const Json& v = require(root, "version", filename, "/");
  if (!v.is_number_integer() || v.get<int>() != 1) {
    fail(filename, "/version", "unsupported format version (expected 1)");
  }
  return 1;
}

}  // namespace

NetDocument parse_net_document(const std::string& text,
                               const std::string& filename) {
  const Json root = parse_json(text, filename);
  if (!root.is_object()) fail(filename, "/", "expected a JSON object");

  NetDocument doc;
  doc.version = check_version(root, filename);

  const Json& vars = require(root, "variables", filename, "/");
  if (!vars.is_array() || vars.empty()) {
    fail(filename, "/variables", "expected a non-empty array of names");
  }
  for (std::size_t i = 0; i < vars.size(); ++i) {
    doc.variables.push_back(
        as_string(vars[i], filename, "/variables/" + std::to_string(i)));
  }
  auto known = [&](const std::string& v) {
    return std::find(doc.variables.begin(), doc.variables.end(), v) !=
           doc.variables.end();
  };

  const Json& legs = require(root, "legs", filename, "/");
  if (!legs.is_array() || legs.empty()) {
    fail(filename, "/legs", "expected a non-empty array of LEG blocks");
  }
  for (std::size_t i = 0; i < legs.size(); ++i) {
    const std::string path = "/legs/" + std::to_string(i);
    const Json& leg = legs[i];
    LegDoc leg_doc;

    const Json& inputs = require(leg, "inputs", filename, path);
    if (!inputs.is_array()) fail(filename, path + "/inputs", "expected an array");
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const std::string name = as_string(
          inputs[k], filename, path + "/inputs/" + std::to_string(k));
      if (!known(name)) {
        fail(filename, path + "/inputs/" + std::to_string(k),
             "undeclared variable '" + name + "'");
      }
      leg_doc.inputs.push_back(name);
    }
    leg_doc.output =
        as_string(require(leg, "output", filename, path), filename,
                  path + "/output");
    if (!known(leg_doc.output)) {
      fail(filename, path + "/output",
           "undeclared variable '" + leg_doc.output + "'");
    }

    if (leg.contains("table")) {
      const Json& table = leg.at("table");
      if (!table.is_array()) {
        fail(filename, path + "/table", "expected an array of probabilities");
      }
      std::vector<double> values;
      for (std::size_t k = 0; k < table.size(); ++k) {
        values.push_back(as_number(table[k], filename,
                                   path + "/table/" + std::to_string(k)));
      }
      leg_doc.table = std::move(values);
    }
    if (leg.contains("constraints")) {
      const Json& block = leg.at("constraints");
      if (!block.is_object()) {
        fail(filename, path + "/constraints", "expected an object");
      }
      LegConstraintsDoc constraints;
      if (block.contains("marginals")) {
        const Json& marginals = block.at("marginals");
        if (!marginals.is_object()) {
          fail(filename, path + "/constraints/marginals",
               "expected an object mapping variables to probabilities");
        }
        for (const auto& [name, value] : marginals.items()) {
          if (!known(name)) {
            fail(filename, path + "/constraints/marginals",
                 "undeclared variable '" + name + "'");
          }
          constraints.marginals.emplace_back(
              name, as_number(value, filename,
                              path + "/constraints/marginals/" + name));
        }
      }
      if (block.contains("events")) {
        const Json& events = block.at("events");
        if (!events.is_array()) {
          fail(filename, path + "/constraints/events", "expected an array");
        }
        for (std::size_t k = 0; k < events.size(); ++k) {
          const std::string event_path =
              path + "/constraints/events/" + std::to_string(k);
          const Json& event = events[k];
          EventConstraint ec;
          const Json& when = require(event, "when", filename, event_path);
          if (!when.is_object() || when.empty()) {
            fail(filename, event_path + "/when",
                 "expected a non-empty object of 0/1 values");
          }
          for (const auto& [name, value] : when.items()) {
            if (!known(name)) {
              fail(filename, event_path + "/when",
                   "undeclared variable '" + name + "'");
            }
            if (!value.is_number_integer() ||
                (value.get<int>() != 0 && value.get<int>() != 1)) {
              fail(filename, event_path + "/when/" + name,
                   "expected 0 or 1");
            }
            ec.event.emplace_back(name, value.get<int>() == 1);
          }
          ec.p = as_number(require(event, "p", filename, event_path),
                           filename, event_path + "/p");
          constraints.events.push_back(std::move(ec));
        }
      }
      leg_doc.constraints = std::move(constraints);
    }
    if (!leg_doc.table.has_value() && !leg_doc.constraints.has_value()) {
      fail(filename, path, "LEG needs either a 'table' or a 'constraints' "
                           "block");
    }
    if (leg_doc.table.has_value() && leg_doc.constraints.has_value()) {
      fail(filename, path, "LEG has both a 'table' and a 'constraints' "
                           "block; pick one");
    }
    doc.legs.push_back(std::move(leg_doc));
  }

  if (root.contains("evidence")) {
    const Json& evidence = root.at("evidence");
    if (!evidence.is_array()) fail(filename, "/evidence", "expected an array");
    for (std::size_t i = 0; i < evidence.size(); ++i) {
      const std::string path = "/evidence/" + std::to_string(i);
      const Json& entry = evidence[i];
      const std::string var = as_string(
          require(entry, "var", filename, path), filename, path + "/var");
      if (!known(var)) {
        fail(filename, path + "/var", "undeclared variable '" + var + "'");
      }
      const double p = as_number(require(entry, "p", filename, path),
                                 filename, path + "/p");
      doc.evidence.push_back({var, p});
    }
  }
  return doc;
}

std::string serialize_net_document(const NetDocument& doc) {
  Json root;
  root["version"] = doc.version;
  root["variables"] = doc.variables;
  root["legs"] = Json::array();
  for (const auto& leg : doc.legs) {
    Json block;
    block["inputs"] = leg.inputs;
    block["output"] = leg.output;
    if (leg.table.has_value()) block["table"] = *leg.table;
    if (leg.constraints.has_value()) {
      Json constraints = Json::object();
      if (!leg.constraints->marginals.empty()) {
        Json marginals = Json::object();
        for (const auto& [v, p] : leg.constraints->marginals) marginals[v] = p;
        constraints["marginals"] = std::move(marginals);
      }
      if (!leg.constraints->events.empty()) {
        Json events = Json::array();
        for (const auto& ec : leg.constraints->events) {
          Json event;
          Json when = Json::object();
          for (const auto& [v, value] : ec.event) when[v] = value ? 1 : 0;
          event["when"] = std::move(when);
          event["p"] = ec.p;
          events.push_back(std::move(event));
        }
        constraints["events"] = std::move(events);
      }
      block["constraints"] = std::move(constraints);
    }
    root["legs"].push_back(std::move(block));
  }
  if (!doc.evidence.empty()) {
    Json evidence = Json::array();
    for (const auto& t : doc.evidence) {
      evidence.push_back(Json{{"var", t.var}, {"p", t.p}});
    }
    root["evidence"] = std::move(evidence);
  }
  return root.dump(2) + "\n";
}

LegNet to_net(const NetDocument& doc) {
  std::vector<Leg> legs;
  for (std::size_t i = 0; i < doc.legs.size(); ++i) {
    const auto& leg = doc.legs[i];
    if (!leg.table.has_value()) {
      throw ValidationError("LEG " + std::to_string(i) +
                            " has no explicit table; run estimate first");
    }
    std::vector<VariableId> vars = leg.inputs;
    vars.push_back(leg.output);
    legs.emplace_back(vars, *leg.table, vars.size() - 1);
  }
  return LegNet(std::move(legs));
}

NetDocument estimate_from_document(const NetDocument& doc) {
  std::vector<LegStructure> structure;
  PriorConstraints constraints;
  for (std::size_t i = 0; i < doc.legs.size(); ++i) {
    const auto& leg = doc.legs[i];
    if (!leg.constraints.has_value()) {
      throw ValidationError(
          "LEG " + std::to_string(i) +
          " has an explicit table; estimation expects constraint blocks "
          "for every LEG");
    }
    structure.push_back({leg.inputs, leg.output});
    for (const auto& [v, p] : leg.constraints->marginals) {
      constraints.marginals.emplace_back(v, p);
    }
    for (const auto& ec : leg.constraints->events) {
      constraints.events.push_back(ec);
    }
  }
  const LegNet net = estimate_net(structure, constraints);

  NetDocument out;
  out.version = doc.version;
  out.variables = doc.variables;
  for (std::size_t i = 0; i < net.legs().size(); ++i) {
    LegDoc leg;
    leg.inputs = doc.legs[i].inputs;
    leg.output = doc.legs[i].output;
    leg.table = net.legs()[i].table();
    out.legs.push_back(std::move(leg));
  }
  out.evidence = doc.evidence;
  return out;
}

ScenarioDocument parse_scenario_document(const std::string& text,
                                         const std::string& filename) {
  const Json root = parse_json(text, filename);
  if (!root.is_object()) fail(filename, "/", "expected a JSON object");

  ScenarioDocument doc;
  doc.version = check_version(root, filename);
  doc.net_path = as_string(require(root, "net", filename, "/"), filename,
                           "/net");
  doc.goal =
      as_string(require(root, "goal", filename, "/"), filename, "/goal");

  const Json& slots = require(root, "slot_count", filename, "/");
  if (!slots.is_number_integer()) {
    fail(filename, "/slot_count", "expected an integer");
  }
  doc.slot_count = slots.get<int>();
  if (root.contains("seed")) {
    const Json& seed = root.at("seed");
    if (!seed.is_number_unsigned()) {
      fail(filename, "/seed", "expected a non-negative integer");
    }
    doc.seed = seed.get<std::uint64_t>();
  }
  if (root.contains("thresholds")) {
    const Json& thresholds = root.at("thresholds");
    doc.threshold_no =
        as_number(require(thresholds, "no", filename, "/thresholds"),
                  filename, "/thresholds/no");
    doc.threshold_yes =
        as_number(require(thresholds, "yes", filename, "/thresholds"),
                  filename, "/thresholds/yes");
  }
  auto optional_number = [&](const char* key, double fallback) {
    return root.contains(key) ? as_number(root.at(key), filename,
                                          std::string("/") + key)
                              : fallback;
  };
  doc.clamp_eps = optional_number("clamp_eps", doc.clamp_eps);
  doc.fuse_tol = optional_number("fuse_tol", doc.fuse_tol);
  doc.initial_p_yes = optional_number("initial_p_yes", doc.initial_p_yes);
  doc.decay_rate = optional_number("decay_rate", doc.decay_rate);
  doc.reward = optional_number("reward", doc.reward);
  doc.penalty = optional_number("penalty", doc.penalty);
  if (root.contains("fuse_max_sweeps")) {
    if (!root.at("fuse_max_sweeps").is_number_integer()) {
      fail(filename, "/fuse_max_sweeps", "expected an integer");
    }
    doc.fuse_max_sweeps = root.at("fuse_max_sweeps").get<int>();
  }
  if (root.contains("fusion_mode")) {
    doc.fusion_mode = as_string(root.at("fusion_mode"), filename,
                                "/fusion_mode");
  }
  if (root.contains("pipeline")) {
    doc.pipeline = as_string(root.at("pipeline"), filename, "/pipeline");
  }
  if (root.contains("inapplicable_policy")) {
    doc.inapplicable_policy = as_string(root.at("inapplicable_policy"),
                                        filename, "/inapplicable_policy");
  }

  const Json& tests = require(root, "tests", filename, "/");
  if (!tests.is_array() || tests.empty()) {
    fail(filename, "/tests", "expected a non-empty array");
  }
  auto parse_curve = [&](const Json& node, const std::string& path) {
    CurveDoc curve;
    curve.midpoint = as_number(require(node, "midpoint", filename, path),
                               filename, path + "/midpoint");
    curve.slope = as_number(require(node, "slope", filename, path), filename,
                            path + "/slope");
    curve.floor = as_number(require(node, "floor", filename, path), filename,
                            path + "/floor");
    curve.ceiling = as_number(require(node, "ceiling", filename, path),
                              filename, path + "/ceiling");
    return curve;
  };
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const std::string path = "/tests/" + std::to_string(i);
    const Json& node = tests[i];
    TestDoc test;
    test.id = as_string(require(node, "id", filename, path), filename,
                        path + "/id");
    test.variable = as_string(require(node, "variable", filename, path),
                              filename, path + "/variable");
    if (node.contains("applicable_range")) {
      const Json& range = node.at("applicable_range");
      if (!range.is_array() || range.size() != 2) {
        fail(filename, path + "/applicable_range",
             "expected [min, max]");
      }
      test.applicable_range = {
          as_number(range[0], filename, path + "/applicable_range/0"),
          as_number(range[1], filename, path + "/applicable_range/1")};
    }
    test.false_alarm_curve =
        parse_curve(require(node, "false_alarm_curve", filename, path),
                    path + "/false_alarm_curve");
    test.miss_curve = parse_curve(require(node, "miss_curve", filename, path),
                                  path + "/miss_curve");
    doc.tests.push_back(std::move(test));
  }

  const Json& objects = require(root, "objects", filename, "/");
  if (!objects.is_array() || objects.empty()) {
    fail(filename, "/objects", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "/objects/" + std::to_string(i);
    const Json& node = objects[i];
    ObjectGroupDoc group;
    const std::string truth = as_string(
        require(node, "truth", filename, path), filename, path + "/truth");
    if (truth == "Y") {
      group.truth_yes = true;
    } else if (truth == "N") {
      group.truth_yes = false;
    } else {
      fail(filename, path + "/truth", "expected \"Y\" or \"N\"");
    }
    if (node.contains("count")) {
      if (!node.at("count").is_number_integer() ||
          node.at("count").get<int>() < 1) {
        fail(filename, path + "/count", "expected a positive integer");
      }
      group.count = node.at("count").get<int>();
    }
    const Json& measurements =
        require(node, "measurements", filename, path);
    if (!measurements.is_object()) {
      fail(filename, path + "/measurements",
           "expected an object mapping test ids to {mean, stddev}");
    }
    for (const auto& [test_id, spec] : measurements.items()) {
      const std::string spec_path = path + "/measurements/" + test_id;
      sim::MeasurementSpec m;
      m.mean = as_number(require(spec, "mean", filename, spec_path),
                         filename, spec_path + "/mean");
      m.stddev = as_number(require(spec, "stddev", filename, spec_path),
                           filename, spec_path + "/stddev");
      group.measurements.emplace_back(test_id, m);
    }
    doc.objects.push_back(std::move(group));
  }
  return doc;
}

sim::Scenario build_scenario(const ScenarioDocument& doc,
                             const NetDocument& net_doc) {
  sim::Scenario sc;
  sc.slot_count = doc.slot_count;
  sc.seed = doc.seed;
  sc.thresholds = {doc.threshold_no, doc.threshold_yes};
  sc.clamp_eps = doc.clamp_eps;
  sc.fuse_tol = doc.fuse_tol;
  sc.fuse_max_sweeps = doc.fuse_max_sweeps;
  sc.initial_p_yes = doc.initial_p_yes;
  sc.decay_rate = doc.decay_rate;
  sc.reward = doc.reward;
  sc.penalty = doc.penalty;
  sc.goal = doc.goal;

  if (doc.fusion_mode == "fresh-prior") {
    sc.fusion = sim::FusionMode::FreshPrior;
  } else if (doc.fusion_mode == "carry-posterior") {
    sc.fusion = sim::FusionMode::CarryPosterior;
  } else {
    throw ValidationError("fusion_mode must be 'fresh-prior' or "
                          "'carry-posterior', got '" +
                          doc.fusion_mode + "'");
  }
  if (doc.pipeline == "markov") {
    sc.pipeline = sim::PipelineChoice::Markov;
  } else if (doc.pipeline == "legnet") {
    sc.pipeline = sim::PipelineChoice::LegNet;
  } else if (doc.pipeline == "both") {
    sc.pipeline = sim::PipelineChoice::Both;
  } else {
    throw ValidationError("pipeline must be 'markov', 'legnet' or 'both', "
                          "got '" +
                          doc.pipeline + "'");
  }
  if (doc.inapplicable_policy == "hold") {
    sc.inapplicable = sim::InapplicablePolicy::Hold;
  } else if (doc.inapplicable_policy == "decay") {
    sc.inapplicable = sim::InapplicablePolicy::Decay;
  } else {
    throw ValidationError("inapplicable_policy must be 'hold' or 'decay', "
                          "got '" +
                          doc.inapplicable_policy + "'");
  }

  if (sc.pipeline != sim::PipelineChoice::Markov) {
    sc.net = to_net(net_doc);
  }

  for (const auto& t : doc.tests) {
    sim::TestModel test;
    test.id = t.id;
    test.variable = t.variable;
    if (t.applicable_range.has_value()) {
      test.applicable_min = t.applicable_range->first;
      test.applicable_max = t.applicable_range->second;
    }
    test.false_alarm_curve = {t.false_alarm_curve.midpoint,
                              t.false_alarm_curve.slope,
                              t.false_alarm_curve.floor,
                              t.false_alarm_curve.ceiling};
    test.miss_curve = {t.miss_curve.midpoint, t.miss_curve.slope,
                       t.miss_curve.floor, t.miss_curve.ceiling};
    sc.tests.push_back(std::move(test));
  }

  for (const auto& group : doc.objects) {
    sim::ObjectSpec spec;
    spec.truth_yes = group.truth_yes;
    for (const auto& test : doc.tests) {
      auto it = std::find_if(group.measurements.begin(),
                             group.measurements.end(), [&](const auto& m) {
                               return m.first == test.id;
                             });
      if (it == group.measurements.end()) {
        throw ValidationError("object group is missing a measurement spec "
                              "for test '" +
                              test.id + "'");
      }
      spec.measurements.push_back(it->second);
    }
    for (const auto& measurement : group.measurements) {
      const std::string& test_id = measurement.first;
      if (std::none_of(doc.tests.begin(), doc.tests.end(), [&](const auto& t) {
            return t.id == test_id;
          })) {
        throw ValidationError("object group references unknown test '" +
                              test_id + "'");
      }
    }
    for (int k = 0; k < group.count; ++k) sc.objects.push_back(spec);
  }
  return sc;
}

Evidence parse_evidence_string(const std::string& text) {
  Evidence evidence;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw ValidationError("evidence entry '" + item +
                            "' is not of the form VAR=P");
    }
    const std::string var = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    std::size_t consumed = 0;
    double p = 0.0;
    try {
      p = std::stod(value, &consumed);
    } catch (const std::exception&) {
      throw ValidationError("evidence entry '" + item +
                            "' has a malformed probability");
    }
    if (consumed != value.size()) {
      throw ValidationError("evidence entry '" + item +
                            "' has a malformed probability");
    }
    evidence.push_back({var, p});
  }
  if (evidence.empty()) throw ValidationError("empty evidence list");
  return evidence;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content;
}

}  // namespace legnet::io
