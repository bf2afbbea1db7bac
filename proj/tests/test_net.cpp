#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "legnet/errors.hpp"
#include "legnet/net.hpp"
#include "legnet/oracle.hpp"
#include "test_support.hpp"

using namespace legnet;
using legnet::testing::figure2_cmd;
using legnet::testing::figure2_net;
using legnet::testing::random_distribution;
using legnet::testing::random_tree_net;

namespace {

bool has_diagnostic(const std::vector<std::string>& diagnostics,
                    const std::string& needle) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const std::string& d) {
                       return d.find(needle) != std::string::npos;
                     });
}

}  // namespace

TEST_SUITE_BEGIN("net");

TEST_CASE("single-LEG net is valid") {
  const LegNet net = figure2_net();
  CHECK(validate(net).empty());
  CHECK(consistency_error(net) == 0.0);
  CHECK(net.variables() == std::vector<VariableId>{"I1", "I2", "O"});
}

TEST_CASE("oversized intersection is diagnosed") {
  const Cmd leg1({"A", "B", "C"}, std::vector<double>(8, 0.125), 2);
  const Cmd leg2({"B", "C", "D"}, std::vector<double>(8, 0.125), 2);
  const LegNet net({leg1, leg2});
  const auto diagnostics = validate(net);
  CHECK(has_diagnostic(diagnostics, "intersection set size 2 exceeds 1"));
}

TEST_CASE("cycle is diagnosed") {
  // three LEGs pairwise sharing one variable form a triangle
  const Cmd leg1({"A", "B", "C"}, std::vector<double>(8, 0.125), 2);
  const Cmd leg2({"C", "D", "E"}, std::vector<double>(8, 0.125), 2);
  const Cmd leg3({"E", "F", "A"}, std::vector<double>(8, 0.125), 2);
  const LegNet net({leg1, leg2, leg3});
  CHECK(has_diagnostic(validate(net), "LEG graph contains a cycle"));
}

TEST_CASE("disconnected graph is diagnosed") {
  const Cmd leg1({"A", "B", "C"}, std::vector<double>(8, 0.125), 2);
  const Cmd leg2({"D", "E", "F"}, std::vector<double>(8, 0.125), 2);
  const LegNet net({leg1, leg2});
  CHECK(has_diagnostic(validate(net), "LEG graph is not connected"));
}

TEST_CASE("inconsistent shared marginal is diagnosed") {
  const Cmd leg1 = figure2_cmd();  // P(O) = 0.50
  // P(O) = 0.45 here: O is an input of the second LEG
  std::mt19937_64 rng(5);
  const auto cond0 = random_distribution(rng, 4);
  const auto cond1 = random_distribution(rng, 4);
  std::vector<double> table(8);
  for (std::size_t n = 0; n < 8; ++n) {
    const bool o = n & 1;
    table[n] = (o ? 0.45 : 0.55) * (o ? cond1 : cond0)[n >> 1];
  }
  const Cmd leg2({"O", "I3", "Q"}, table, 2);
  const LegNet net({leg1, leg2});
  CHECK(has_diagnostic(validate(net), "inconsistent marginal for O"));
  CHECK(consistency_error(net) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("non-3-variable LEG is diagnosed") {
  const Cmd small({"A", "B"}, std::vector<double>(4, 0.25), 1);
  const LegNet net({small});
  CHECK(has_diagnostic(validate(net), "expected 3"));
}

TEST_CASE("consistency error reacts to a hand-perturbed entry") {
  std::mt19937_64 rng(17);
  LegNet net = random_tree_net(rng, 2);
  CHECK(consistency_error(net) <= 1e-12);

  // move mass between entries of the first LEG so a shared marginal shifts
  const auto& shared = net.edges().front().shared.front();
  auto legs = net.legs();
  const std::size_t bit = legs[0].index_of(shared);
  std::vector<double> table = legs[0].table();
  std::size_t hi = 0, lo = 0;
  for (std::size_t n = 0; n < table.size(); ++n) {
    if (n & (std::size_t{1} << bit)) hi = n;
    else lo = n;
  }
  table[hi] += 0.01;
  table[lo] -= 0.01;
  legs[0] = Cmd(legs[0].vars(), table, legs[0].output_index());
  const LegNet perturbed(legs);
  CHECK(consistency_error(perturbed) > 0.005);
}

TEST_CASE("set_evidence reproduces the single-pass marginals") {
  const LegNet net = figure2_net();

  const LegNet after_i1 = set_evidence(net, "I1", 0.9);
  CHECK(marginal_of(after_i1, "I1") == doctest::Approx(0.9000000).epsilon(1e-9));
  CHECK(marginal_of(after_i1, "I2") == doctest::Approx(0.6272727).epsilon(1e-6));
  CHECK(marginal_of(after_i1, "O") == doctest::Approx(0.8181819).epsilon(1e-6));

  const LegNet after_i2 = set_evidence(net, "I2", 0.1);
  CHECK(marginal_of(after_i2, "I1") == doctest::Approx(0.3121212).epsilon(1e-6));
  CHECK(marginal_of(after_i2, "I2") == doctest::Approx(0.1000000).epsilon(1e-9));
  CHECK(marginal_of(after_i2, "O") == doctest::Approx(0.2525252).epsilon(1e-6));

  CHECK_THROWS_AS(set_evidence(net, "nope", 0.5), UnknownVariableError);
}

TEST_CASE("post-propagation consistency on random tree nets") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> target(0.05, 0.95);
  for (int round = 0; round < 25; ++round) {
    std::uniform_int_distribution<std::size_t> legs(1, 5);
    const LegNet net = random_tree_net(rng, legs(rng));
    const auto& vars = net.variables();
    std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
    const LegNet updated = set_evidence(net, vars[pick(rng)], target(rng));
    CHECK(consistency_error(updated) <= 1e-9);
  }
}

TEST_CASE("single soft evidence matches the full-joint projection") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> target(0.05, 0.95);
  for (int round = 0; round < 10; ++round) {
    std::uniform_int_distribution<std::size_t> legs(2, 5);
    const LegNet net = random_tree_net(rng, legs(rng));
    const auto& vars = net.variables();
    std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
    const VariableId v = vars[pick(rng)];
    const double p = target(rng);

    const LegNet updated = set_evidence(net, v, p);
    const oracle::FullJoint reference =
        oracle::ipf_project(joint_extension(net), {{v, p}}, 1e-13, 10);
    for (const auto& u : vars) {
      CHECK(marginal_of(updated, u) ==
            doctest::Approx(oracle::marginal(reference, u)).epsilon(1e-9));
    }
  }
}

TEST_CASE("binary evidence matches exact conditioning and commutes") {
  std::mt19937_64 rng(37);
  for (int round = 0; round < 10; ++round) {
    const LegNet net = random_tree_net(rng, 3);
    const auto& vars = net.variables();
    // two distinct variables with hard values
    const VariableId u = vars[1];
    const VariableId v = vars[vars.size() - 1];
    const bool value_u = rng() & 1;
    const bool value_v = rng() & 1;

    const LegNet uv = set_evidence(set_evidence(net, u, value_u ? 1.0 : 0.0),
                                   v, value_v ? 1.0 : 0.0);
    const LegNet vu = set_evidence(set_evidence(net, v, value_v ? 1.0 : 0.0),
                                   u, value_u ? 1.0 : 0.0);
    const oracle::FullJoint reference = oracle::exact_condition(
        joint_extension(net), {{u, value_u}, {v, value_v}});
    for (const auto& w : vars) {
      const double m_uv = marginal_of(uv, w);
      CHECK(m_uv == doctest::Approx(marginal_of(vu, w)).epsilon(1e-12));
      CHECK(m_uv ==
            doctest::Approx(oracle::marginal(reference, w)).epsilon(1e-9));
    }
  }
}

TEST_CASE("converge reproduces the three-sweep trace") {
  const LegNet net = figure2_net();
  const Evidence ev{{"I1", 0.9}, {"I2", 0.1}};
  const auto [result, report] = converge(net, ev, 1e-15, 3, {"O"});
  (void)result;
  REQUIRE(report.rows.size() == 6);

  // iteration 3 rows: evidence marginals and P(O)
  const auto& row5 = report.rows[4];
  CHECK(row5.sweep == 3);
  CHECK(row5.updated == "I1");
  CHECK(row5.evidence_marginals[0] == doctest::Approx(0.9000000).epsilon(1e-9));
  CHECK(row5.evidence_marginals[1] == doctest::Approx(0.1000554).epsilon(1e-5));
  CHECK(row5.tracked_marginals[0] == doctest::Approx(0.6340969).epsilon(1e-5));
  CHECK(row5.error == doctest::Approx(0.0000554).epsilon(1e-5));

  const auto& row6 = report.rows[5];
  CHECK(row6.evidence_marginals[0] == doctest::Approx(0.8999953).epsilon(1e-5));
  CHECK(row6.tracked_marginals[0] == doctest::Approx(0.6340749).epsilon(1e-5));

  // per-row error strictly decreases on this example
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].error < report.rows[i - 1].error);
  }
}

TEST_CASE("converge with identity targets stops after one sweep") {
  const LegNet net = figure2_net();
  const Evidence ev{{"I1", 0.45}, {"I2", 0.45}};
  const auto [result, report] = converge(net, ev, 1e-9, 50);
  CHECK(report.converged);
  CHECK(report.sweeps_used == 1);
  CHECK(report.rows.back().error <= 1e-12);
  for (std::size_t n = 0; n < 8; ++n) {
    CHECK(result.legs()[0].table()[n] ==
          doctest::Approx(net.legs()[0].table()[n]).epsilon(1e-12));
  }
}

TEST_CASE("both sweep orders converge to the projection limit") {
  const LegNet net = figure2_net();
  const auto [limit_a, report_a] =
      converge(net, {{"I1", 0.9}, {"I2", 0.1}}, 1e-12, 50);
  const auto [limit_b, report_b] =
      converge(net, {{"I2", 0.1}, {"I1", 0.9}}, 1e-12, 50);
  CHECK(report_a.converged);
  CHECK(report_b.converged);

  const oracle::FullJoint reference = oracle::ipf_project(
      joint_extension(net), {{"I1", 0.9}, {"I2", 0.1}}, 1e-13, 1000);
  for (std::size_t n = 0; n < 8; ++n) {
    CHECK(limit_a.legs()[0].table()[n] ==
          doctest::Approx(limit_b.legs()[0].table()[n]).epsilon(1e-9));
    CHECK(limit_a.legs()[0].table()[n] ==
          doctest::Approx(reference.table[n]).epsilon(1e-9));
  }
  CHECK(marginal_of(limit_a, "O") ==
        doctest::Approx(0.634077988115).epsilon(1e-9));
}

TEST_CASE("converge aborts on a frozen margin and keeps the partial trace") {
  // P(I1) = 0 in this prior, so the I1 target is unreachable
  const Cmd frozen({"I1", "I2", "O"},
                   {0.3, 0.0, 0.2, 0.0, 0.2, 0.0, 0.3, 0.0}, 2);
  const LegNet net({frozen});
  const Evidence ev{{"I2", 0.4}, {"I1", 0.5}};
  try {
    converge(net, ev, 1e-9, 10);
    FAIL("expected ConvergenceAbortedError");
  } catch (const ConvergenceAbortedError& e) {
    CHECK(e.partial_report().rows.size() == 1);
    CHECK(e.partial_report().rows[0].updated == "I2");
  }
}

TEST_CASE("order sensitivity on the worked example") {
  const LegNet net = figure2_net();
  const Evidence ev{{"I1", 0.9}, {"I2", 0.1}};
  CHECK(order_sensitivity(net, ev, "O") ==
        doctest::Approx(0.0858306).epsilon(1e-6));
}

TEST_CASE("order sensitivity vanishes for independent inputs") {
  // product prior: I1, I2, O independent
  std::vector<double> table(8);
  for (std::size_t n = 0; n < 8; ++n) {
    table[n] = ((n & 1) ? 0.3 : 0.7) * ((n & 2) ? 0.6 : 0.4) *
               ((n & 4) ? 0.5 : 0.5);
  }
  const LegNet net({Cmd({"I1", "I2", "O"}, table, 2)});
  const Evidence ev{{"I1", 0.9}, {"I2", 0.1}};
  CHECK(order_sensitivity(net, ev, "O") <= 1e-12);
}

TEST_CASE("order sensitivity vanishes for binary evidence") {
  const LegNet net = figure2_net();
  // both jointly possible: P(I1=1, I2=0) covers entries {1, 5} = 0.15
  const Evidence ev{{"I1", 1.0}, {"I2", 0.0}};
  CHECK(order_sensitivity(net, ev, "O") <= 1e-12);
}

TEST_CASE("order sensitivity requires two evidence variables") {
  const LegNet net = figure2_net();
  CHECK_THROWS_AS(order_sensitivity(net, {{"I1", 0.9}}, "O"),
                  ValidationError);
}

TEST_CASE("order sensitivity samples permutations beyond the limit") {
  std::mt19937_64 rng(67);
  const LegNet net = random_tree_net(rng, 3);  // 7 variables
  Evidence ev;
  for (std::size_t i = 0; i < 6; ++i) {
    ev.push_back({net.variables()[i], 0.1 + 0.1 * static_cast<double>(i)});
  }
  OrderSensitivityOptions opts;
  opts.sample_count = 24;  // 6 variables > exhaustive_limit of 5
  const double spread = order_sensitivity(net, ev, net.variables().back(),
                                          opts);
  CHECK(spread >= 0.0);
  CHECK(spread <= 1.0);
  // deterministic for a fixed seed
  CHECK(order_sensitivity(net, ev, net.variables().back(), opts) == spread);
}

TEST_CASE("joint extension of a single LEG is its table") {
  const LegNet net = figure2_net();
  const auto joint = joint_extension(net);
  CHECK(joint.vars == net.variables());
  CHECK(joint.table == net.legs()[0].table());
}

TEST_CASE("joint extension of independent LEGs is the product") {
  // shared variable s independent of everything in both LEGs
  auto product_table = [](double pa, double pb, double ps) {
    std::vector<double> table(8);
    for (std::size_t n = 0; n < 8; ++n) {
      table[n] = ((n & 1) ? pa : 1 - pa) * ((n & 2) ? pb : 1 - pb) *
                 ((n & 4) ? ps : 1 - ps);
    }
    return table;
  };
  const Cmd leg1({"a", "b", "s"}, product_table(0.3, 0.6, 0.5), 2);
  const Cmd leg2({"c", "d", "s"}, product_table(0.2, 0.7, 0.5), 2);
  const LegNet net({leg1, leg2});
  const auto joint = joint_extension(net);

  const std::vector<std::pair<VariableId, double>> singles{
      {"a", 0.3}, {"b", 0.6}, {"s", 0.5}, {"c", 0.2}, {"d", 0.7}};
  for (std::size_t n = 0; n < joint.table.size(); ++n) {
    double expected = 1.0;
    for (std::size_t j = 0; j < singles.size(); ++j) {
      const std::size_t bit = joint.index_of(singles[j].first);
      expected *= ((n >> bit) & 1u) ? singles[j].second
                                    : 1.0 - singles[j].second;
    }
    CHECK(joint.table[n] == doctest::Approx(expected).epsilon(1e-12));
  }
}

// Two LEGs sharing two variables are outside v1 validation, but propagation
// supports them by pushing the joint margin of the intersection set.
TEST_CASE("multi-variable intersections propagate the joint margin") {
  std::mt19937_64 rng(59);
  const Cmd leg1({"A", "B", "S"}, random_distribution(rng, 8), 2);

  // leg2 over (B, S, C), consistent by construction with leg1's (B, S) joint
  const std::vector<VariableId> shared{"B", "S"};
  const auto bs = leg1.joint_margin(shared);
  std::vector<double> table(8);
  for (std::size_t n = 0; n < 8; ++n) {
    const std::size_t sub = n & 3;  // bits 0..1 = B, S
    const double c_weight = (n & 4) ? 0.3 : 0.7;
    table[n] = bs[sub] * c_weight;
  }
  const Cmd leg2({"B", "S", "C"}, std::move(table), 2);
  const LegNet net({leg1, leg2});
  REQUIRE(net.edges().front().shared.size() == 2);
  CHECK(consistency_error(net) <= 1e-12);

  const LegNet updated = set_evidence(net, "A", 0.85);
  // the child's joint margin over the intersection must match the parent's
  const auto parent_bs = updated.legs()[0].joint_margin(shared);
  const auto child_bs = updated.legs()[1].joint_margin(shared);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(child_bs[s] == doctest::Approx(parent_bs[s]).epsilon(1e-12));
  }

  // and the whole update must agree with the full-joint projection
  const oracle::FullJoint reference =
      oracle::ipf_project(joint_extension(net), {{"A", 0.85}}, 1e-13, 10);
  for (const auto& v : net.variables()) {
    CHECK(marginal_of(updated, v) ==
          doctest::Approx(oracle::marginal(reference, v)).epsilon(1e-9));
  }
}

TEST_CASE("joint extension re-marginalizes to each CMD") {
  std::mt19937_64 rng(53);
  for (int round = 0; round < 10; ++round) {
    std::uniform_int_distribution<std::size_t> legs(2, 4);
    const LegNet net = random_tree_net(rng, legs(rng));
    const auto joint = joint_extension(net);
    for (const auto& leg : net.legs()) {
      const auto recovered = oracle::marginal_table(joint, leg.vars());
      for (std::size_t n = 0; n < recovered.size(); ++n) {
        CHECK(recovered[n] == doctest::Approx(leg.table()[n]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("joint extension refuses oversized nets") {
  std::mt19937_64 rng(79);
  const LegNet net = random_tree_net(rng, 10);  // 3 + 2*9 = 21 variables
  CHECK(net.variables().size() == 21);
  CHECK_THROWS_AS(joint_extension(net), ValidationError);
}

TEST_SUITE_END();
