// Tests for the layered tabular model: reference instances, validation
// rejections, reward-law strings, and policy tables.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "simlab/errors.hpp"
#include "simlab/mdp.hpp"
#include "simlab/rng.hpp"

using namespace simlab;

TEST_CASE("twochain reference instance has the frozen structure") {
  const TabularMDP m = make_twochain();
  CHECK(m.horizon == 2);
  REQUIRE(m.states_per_layer == std::vector<int>{1, 2});
  CHECK(m.num_actions == 2);
  REQUIRE(m.init_dist.size() == 1);
  CHECK(m.init_dist[0] == 1.0);
  // Action a moves deterministically to layer-1 state a.
  REQUIRE(m.transitions.size() == 1);
  CHECK(m.transitions[0][0][0] == std::vector<double>{1.0, 0.0});
  CHECK(m.transitions[0][0][1] == std::vector<double>{0.0, 1.0});
  // Layer-0 rewards are zero; layer-1 rewards equal the state id.
  CHECK(m.reward_means[0][0] == std::vector<double>{0.0, 0.0});
  CHECK(m.reward_means[1][0] == std::vector<double>{0.0, 0.0});
  CHECK(m.reward_means[1][1] == std::vector<double>{1.0, 1.0});
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("validate rejects malformed models") {
  SUBCASE("row sum off by more than 1e-9") {
    TabularMDP m = make_twochain();
    m.transitions[0][0][0] = {0.6, 0.5};
    CHECK_THROWS_AS(m.validate(), validation_error);
  }
  SUBCASE("negative transition probability") {
    TabularMDP m = make_twochain();
    m.transitions[0][0][0] = {1.2, -0.2};
    CHECK_THROWS_AS(m.validate(), validation_error);
  }
  SUBCASE("init dist not a distribution") {
    TabularMDP m = make_twochain();
    m.init_dist = {0.5};
    CHECK_THROWS_AS(m.validate(), validation_error);
  }
  SUBCASE("reward mean outside [0,1]") {
    TabularMDP m = make_twochain();
    m.reward_means[1][1][0] = 1.5;
    CHECK_THROWS_AS(m.validate(), validation_error);
    m.reward_means[1][1][0] = -0.1;
    CHECK_THROWS_AS(m.validate(), validation_error);
  }
  SUBCASE("missing transition layer") {
    TabularMDP m = make_twochain();
    m.transitions.clear();
    CHECK_THROWS_AS(m.validate(), validation_error);
  }
  SUBCASE("wrong reward row width") {
    TabularMDP m = make_twochain();
    m.reward_means[0][0] = {0.0};
    CHECK_THROWS_AS(m.validate(), validation_error);
  }
  SUBCASE("nonpositive horizon") {
    TabularMDP m;
    m.horizon = 0;
    CHECK_THROWS_AS(m.validate(), validation_error);
  }
}

TEST_CASE("reward law strings round-trip and reject junk") {
  CHECK(to_string(RewardLaw::deterministic_mean) == "deterministic-mean");
  CHECK(to_string(RewardLaw::bernoulli_mean) == "bernoulli-mean");
  CHECK(reward_law_from_string("deterministic-mean") ==
        RewardLaw::deterministic_mean);
  CHECK(reward_law_from_string("bernoulli-mean") == RewardLaw::bernoulli_mean);
  CHECK_THROWS_AS(reward_law_from_string("gaussian"), validation_error);
}

TEST_CASE("random instances validate and have full transition support") {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularMDP m =
        random_tabular_mdp({2, 3, 2}, 3, RewardLaw::bernoulli_mean, rng);
    CHECK_NOTHROW(m.validate());
    CHECK(m.horizon == 3);
    CHECK(m.num_actions == 3);
    for (const auto& layer : m.transitions)
      for (const auto& state : layer)
        for (const auto& row : state)
          for (double p : row) CHECK(p > 0.0);  // floor-plus-uniform profile
    for (double p : m.init_dist) CHECK(p > 0.0);
    for (const auto& layer : m.reward_means)
      for (const auto& state : layer)
        for (double r : state) {
          CHECK(r >= 0.0);
          CHECK(r <= 1.0);
        }
  }
}

TEST_CASE("random instances are deterministic given the generator state") {
  Rng a(77), b(77);
  const TabularMDP ma =
      random_tabular_mdp({2, 2}, 2, RewardLaw::deterministic_mean, a);
  const TabularMDP mb =
      random_tabular_mdp({2, 2}, 2, RewardLaw::deterministic_mean, b);
  CHECK(ma.init_dist == mb.init_dist);
  CHECK(ma.transitions == mb.transitions);
  CHECK(ma.reward_means == mb.reward_means);
}

TEST_CASE("deterministic policy tables report and sample their action") {
  const TabularMDP m = make_twochain();
  const PolicyTable pi = deterministic_policy(m, {{1}, {0, 1}});
  CHECK(pi.deterministic);
  CHECK(pi.num_layers() == 2);
  CHECK(pi.action_at(0, 0) == 1);
  CHECK(pi.action_at(1, 0) == 0);
  CHECK(pi.action_at(1, 1) == 1);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) CHECK(pi.sample(0, 0, rng) == 1);
  CHECK_NOTHROW(pi.validate(m));
}

TEST_CASE("constant and uniform policies have the advertised rows") {
  const TabularMDP m = make_twochain();
  const PolicyTable c1 = constant_policy(m, 1);
  CHECK(c1.action_at(0, 0) == 1);
  CHECK(c1.action_at(1, 1) == 1);
  const PolicyTable u = uniform_policy(m);
  CHECK_FALSE(u.deterministic);
  CHECK(u.rows[0][0] == std::vector<double>{0.5, 0.5});
  CHECK_NOTHROW(u.validate(m));
  // Uniform sampling hits both actions.
  Rng rng(9);
  bool saw0 = false, saw1 = false;
  for (int i = 0; i < 200; ++i) {
    const int a = u.sample(1, 0, rng);
    saw0 |= (a == 0);
    saw1 |= (a == 1);
  }
  CHECK(saw0);
  CHECK(saw1);
}

TEST_CASE("policy validation rejects shape and row errors") {
  const TabularMDP m = make_twochain();
  SUBCASE("wrong layer count") {
    PolicyTable pi = uniform_policy(m);
    pi.rows.pop_back();
    CHECK_THROWS_AS(pi.validate(m), validation_error);
  }
  SUBCASE("row does not sum to one") {
    PolicyTable pi = uniform_policy(m);
    pi.rows[1][0] = {0.7, 0.7};
    CHECK_THROWS_AS(pi.validate(m), validation_error);
  }
  SUBCASE("action_at rejects rows without a unit entry") {
    const PolicyTable pi = uniform_policy(m);
    CHECK_THROWS_AS((void)pi.action_at(0, 0), validation_error);
  }
  SUBCASE("deterministic flag without one-hot rows") {
    PolicyTable pi = uniform_policy(m);
    pi.deterministic = true;
    CHECK_THROWS_AS(pi.validate(m), validation_error);
  }
}
