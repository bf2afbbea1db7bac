#include <cmath>
#include <random>

#include <doctest.h>

#include "legnet/errors.hpp"
#include "legnet/oracle.hpp"
#include "test_support.hpp"

using namespace legnet;
using namespace legnet::oracle;
using legnet::testing::random_distribution;

namespace {

FullJoint figure2_joint() {
  return FullJoint({"I1", "I2", "O"},
                   {0.40, 0.05, 0.05, 0.00, 0.00, 0.10, 0.10, 0.30});
}

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("construction validates") {
  CHECK_THROWS_AS(FullJoint({}, {}), ValidationError);
  CHECK_THROWS_AS(FullJoint({"a"}, {0.6, 0.6}), ValidationError);
  CHECK_THROWS_AS(FullJoint({"a", "a"}, {0.25, 0.25, 0.25, 0.25}),
                  ValidationError);
  const FullJoint single({"a"}, {0.3, 0.7});
  CHECK(marginal(single, "a") == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("exact conditioning") {
  const FullJoint joint = figure2_joint();

  const FullJoint on_i1 = exact_condition(joint, {{"I1", true}});
  CHECK(marginal(on_i1, "O") == doctest::Approx(0.8888889).epsilon(1e-6));

  const FullJoint untouched = exact_condition(joint, {});
  CHECK(untouched.table == joint.table);

  const FullJoint both = exact_condition(joint, {{"I2", true}, {"I1", true}});
  CHECK(marginal(both, "O") == doctest::Approx(1.0).epsilon(1e-12));

  // O = 1 is certain given I1 = I2 = 1, so O = 0 is impossible
  CHECK_THROWS_AS(exact_condition(both, {{"O", false}}),
                  ImpossibleEvidenceError);

  CHECK_THROWS_AS(exact_condition(joint, {{"nope", true}}),
                  UnknownVariableError);
}

TEST_CASE("marginal_table") {
  const FullJoint joint = figure2_joint();

  const std::vector<VariableId> single{"O"};
  const auto po = marginal_table(joint, single);
  CHECK(po[0] == doctest::Approx(0.50).epsilon(1e-12));
  CHECK(po[1] == doctest::Approx(0.50).epsilon(1e-12));

  const std::vector<VariableId> all{"I1", "I2", "O"};
  CHECK(marginal_table(joint, all) == joint.table);

  const std::vector<VariableId> pair{"I1", "I2"};
  const auto pi = marginal_table(joint, pair);
  CHECK(pi[0] == doctest::Approx(0.40).epsilon(1e-12));
  CHECK(pi[1] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(pi[2] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(pi[3] == doctest::Approx(0.30).epsilon(1e-12));
}

TEST_CASE("ipf_project reaches the iterated limit") {
  const FullJoint joint = figure2_joint();
  const FullJoint limit =
      ipf_project(joint, {{"I1", 0.9}, {"I2", 0.1}}, 1e-12, 1000);
  CHECK(marginal(limit, "I1") == doctest::Approx(0.9).epsilon(1e-11));
  CHECK(marginal(limit, "I2") == doctest::Approx(0.1).epsilon(1e-11));
  CHECK(marginal(limit, "O") ==
        doctest::Approx(0.634077988115).epsilon(1e-9));
  // zeros of the input survive projection
  CHECK(limit.table[3] == 0.0);
  CHECK(limit.table[4] == 0.0);
}

TEST_CASE("ipf_project with current marginals is the identity") {
  const FullJoint joint = figure2_joint();
  const FullJoint same =
      ipf_project(joint, {{"I1", 0.45}, {"I2", 0.45}}, 1e-9, 5);
  for (std::size_t n = 0; n < 8; ++n) {
    CHECK(same.table[n] == doctest::Approx(joint.table[n]).epsilon(1e-12));
  }
}

TEST_CASE("single-target ipf equals the closed-form ratio update") {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 20; ++round) {
    const FullJoint joint({"a", "b", "c", "d"},
                          random_distribution(rng, 16));
    std::uniform_real_distribution<double> target(0.05, 0.95);
    const double p = target(rng);
    const FullJoint projected = ipf_project(joint, {{"c", p}}, 1e-12, 10);

    const double p_old = marginal(joint, "c");
    const std::size_t mask = 1u << joint.index_of("c");
    for (std::size_t n = 0; n < joint.table.size(); ++n) {
      const double expected =
          joint.table[n] *
          ((n & mask) ? p / p_old : (1.0 - p) / (1.0 - p_old));
      CHECK(projected.table[n] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("ipf with hard targets equals exact conditioning") {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 10; ++round) {
    const FullJoint joint({"a", "b", "c"}, random_distribution(rng, 8));
    const FullJoint conditioned =
        exact_condition(joint, {{"a", true}, {"c", false}});
    const FullJoint projected =
        ipf_project(joint, {{"a", 1.0}, {"c", 0.0}}, 1e-12, 100);
    for (std::size_t n = 0; n < 8; ++n) {
      CHECK(projected.table[n] ==
            doctest::Approx(conditioned.table[n]).epsilon(1e-12));
    }
  }
}

TEST_CASE("non-convergence carries the last iterate") {
  const FullJoint joint = figure2_joint();
  try {
    ipf_project(joint, {{"I1", 0.9}, {"I2", 0.1}}, 1e-12, 1);
    FAIL("expected IpfNonConvergenceError");
  } catch (const IpfNonConvergenceError& e) {
    CHECK(e.residual() > 0.0);
    CHECK(e.last_iterate().table.size() == 8);
    // after one sweep the last-updated margin holds exactly
    CHECK(marginal(e.last_iterate(), "I2") ==
          doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("frozen margins are rejected") {
  const FullJoint joint = figure2_joint();
  const FullJoint conditioned = exact_condition(joint, {{"I1", true}});
  CHECK_THROWS_AS(ipf_project(conditioned, {{"I1", 0.5}}, 1e-9, 10),
                  UnreachableMarginError);
}

TEST_SUITE_END();
