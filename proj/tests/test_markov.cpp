#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "legnet/markov.hpp"

using namespace legnet::markov;

TEST_SUITE_BEGIN("markov");

TEST_CASE("step applies the transition matrix") {
  const BinaryBelief b{0.5, 0.5};
  const BinaryBelief next = step(b, {0.2, 0.1});
  CHECK(next.p_no == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(next.p_yes == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("a perfect test is the identity") {
  const BinaryBelief b{0.3, 0.7};
  const BinaryBelief next = step(b, {0.0, 0.0});
  CHECK(next.p_no == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(next.p_yes == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("a certain belief picks out the matrix column") {
  const BinaryBelief next = step({0.0, 1.0}, {0.2, 0.1});
  CHECK(next.p_no == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(next.p_yes == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("chain folds steps in order") {
  const BinaryBelief b{0.5, 0.5};
  CHECK(chain(b, {}) == b);

  const std::vector<TestOutput> one{{0.2, 0.1}};
  CHECK(chain(b, one) == step(b, one[0]));

  const std::vector<TestOutput> two{{0.2, 0.1}, {0.3, 0.05}};
  const BinaryBelief result = chain(b, two);
  CHECK(result.p_no == doctest::Approx(0.3425).epsilon(1e-12));
  CHECK(result.p_yes == doctest::Approx(0.6575).epsilon(1e-12));
}

TEST_CASE("chains are order dependent") {
  const BinaryBelief b{0.5, 0.5};
  const std::vector<TestOutput> ab{{0.6, 0.1}, {0.1, 0.4}};
  const std::vector<TestOutput> ba{{0.1, 0.4}, {0.6, 0.1}};
  const BinaryBelief first = chain(b, ab);
  const BinaryBelief second = chain(b, ba);
  CHECK(std::abs(first.p_yes - second.p_yes) > 1e-3);
}

TEST_CASE("step preserves the simplex") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int round = 0; round < 10000; ++round) {
    const BinaryBelief b = belief_of_yes(uniform(rng));
    const TestOutput t{uniform(rng), uniform(rng)};
    const BinaryBelief next = step(b, t);
    CHECK(next.p_no >= 0.0);
    CHECK(next.p_yes >= 0.0);
    CHECK(std::abs(next.p_no + next.p_yes - 1.0) <= 1e-12);
  }
}

TEST_CASE("repeated application contracts to the stationary point") {
  const TestOutput t{0.2, 0.1};  // stationary p_yes = 0.2 / (0.2 + 0.1)
  BinaryBelief b{0.99, 0.01};
  for (int i = 0; i < 200; ++i) b = step(b, t);
  CHECK(b.p_yes == doctest::Approx(0.2 / 0.3).epsilon(1e-9));

  BinaryBelief other{0.01, 0.99};
  for (int i = 0; i < 200; ++i) other = step(other, t);
  CHECK(other.p_yes == doctest::Approx(b.p_yes).epsilon(1e-9));
}

TEST_CASE("belief_of_yes validates") {
  CHECK_THROWS_AS(belief_of_yes(1.5), legnet::ValidationError);
  CHECK_THROWS_AS(belief_of_yes(-0.5), legnet::ValidationError);
  const BinaryBelief b = belief_of_yes(0.25);
  CHECK(b.p_no == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_SUITE_END();
