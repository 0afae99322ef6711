// Tests for the stateful simulator session: reset-to-observed enforcement,
// exact sample accounting, reward laws, rollout semantics, and a fuzz run
// against a shadow model of the protocol.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "simlab/errors.hpp"
#include "simlab/mdp.hpp"
#include "simlab/rng.hpp"
#include "simlab/session.hpp"

using namespace simlab;

namespace {

// Two-layer single-state chain with configurable reward means and law.
TabularMDP tiny_chain(double r0, double r1, RewardLaw law) {
  TabularMDP m;
  m.horizon = 2;
  m.states_per_layer = {1, 1};
  m.num_actions = 1;
  m.init_dist = {1.0};
  m.transitions = {{{{1.0}}}};
  m.reward_means = {{{r0}}, {{r1}}};
  m.reward_law = law;
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("fresh sessions refuse resets and steps before any observation") {
  const TabularMDP m = make_twochain();
  LocalSimSession s(m, 1);
  CHECK_FALSE(s.mid_episode());
  CHECK_THROWS_AS(s.reset_to(0, 0), protocol_error);
  CHECK_THROWS_AS(s.step(0), protocol_error);
  CHECK(s.ledger().episodes_started == 0);
  CHECK(s.ledger().transitions_sampled == 0);
  CHECK(s.ledger().resets == 0);
}

TEST_CASE("twochain episode walks the deterministic chain") {
  const TabularMDP m = make_twochain();
  LocalSimSession s(m, 1);
  const int x0 = s.start_episode();
  CHECK(x0 == 0);
  CHECK(s.mid_episode());
  CHECK(s.cursor_layer() == 0);
  CHECK(s.cursor_state() == 0);
  // The initial draw is an episode start, not a transition.
  CHECK(s.ledger().episodes_started == 1);
  CHECK(s.ledger().transitions_sampled == 0);

  // Action 1 moves to layer-1 state 1; the layer-0 reward mean is 0, so the
  // Bernoulli draw is exactly 0.
  const auto [r0, x1] = s.step(1);
  CHECK(r0 == 0.0);
  CHECK(x1 == 1);
  CHECK(s.observed(1, 1));
  CHECK_FALSE(s.observed(1, 0));

  // The terminal step returns next state -1 and ends the episode; state 1 has
  // reward mean 1, so the Bernoulli draw is exactly 1.
  const auto [r1, xT] = s.step(0);
  CHECK(r1 == 1.0);
  CHECK(xT == -1);
  CHECK_FALSE(s.mid_episode());
  CHECK(s.cursor_layer() == -1);
  CHECK(s.ledger().transitions_sampled == 2);

  // Acting again without a live episode is a protocol violation.
  CHECK_THROWS_AS(s.step(0), protocol_error);
}

TEST_CASE("reset_to allows exactly the observed states") {
  const TabularMDP m = make_twochain();
  LocalSimSession s(m, 1);
  s.start_episode();
  s.step(1);  // observes (1, 1)
  CHECK_NOTHROW(s.reset_to(0, 0));
  CHECK_NOTHROW(s.reset_to(1, 1));
  CHECK(s.cursor_layer() == 1);
  CHECK(s.cursor_state() == 1);
  // (1, 0) exists in the model but has never been produced by this session.
  CHECK_THROWS_AS(s.reset_to(1, 0), protocol_error);
  // Out-of-range coordinates are rejected outright.
  CHECK_THROWS_AS(s.reset_to(2, 0), protocol_error);
  CHECK_THROWS_AS(s.reset_to(-1, 0), protocol_error);
  CHECK_THROWS_AS(s.reset_to(0, 5), protocol_error);
  CHECK(s.ledger().resets == 2);  // only the successful resets are charged
}

TEST_CASE("invalid actions are rejected without consuming samples") {
  const TabularMDP m = make_twochain();
  LocalSimSession s(m, 1);
  s.start_episode();
  CHECK_THROWS_AS(s.step(-1), protocol_error);
  CHECK_THROWS_AS(s.step(2), protocol_error);
  CHECK(s.ledger().transitions_sampled == 0);
}

TEST_CASE("deterministic-mean law returns the mean exactly") {
  const TabularMDP m = tiny_chain(0.3, 0.7, RewardLaw::deterministic_mean);
  LocalSimSession s(m, 5);
  s.start_episode();
  CHECK(s.step(0).first == 0.3);
  CHECK(s.step(0).first == 0.7);
}

TEST_CASE("bernoulli-mean law matches its mean in frequency") {
  const TabularMDP m = tiny_chain(0.3, 0.0, RewardLaw::bernoulli_mean);
  LocalSimSession s(m, 5);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    s.start_episode();
    const double r = s.step(0).first;
    CHECK((r == 0.0 || r == 1.0));
    sum += r;
  }
  CHECK(std::abs(sum / n - 0.3) < 3.3 * std::sqrt(0.3 * 0.7 / n));
}

TEST_CASE("identical seeds reproduce identical trajectories and ledgers") {
  Rng mk(31);
  const TabularMDP m =
      random_tabular_mdp({2, 3, 2}, 2, RewardLaw::bernoulli_mean, mk);
  LocalSimSession a(m, 77), b(m, 77);
  const PolicyTable pi = uniform_policy(m);
  for (int ep = 0; ep < 20; ++ep) {
    CHECK(a.start_episode() == b.start_episode());
    const Trajectory ta = a.rollout(pi);
    const Trajectory tb = b.rollout(pi);
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      CHECK(ta[i].state == tb[i].state);
      CHECK(ta[i].action == tb[i].action);
      CHECK(ta[i].reward == tb[i].reward);
    }
  }
  CHECK(a.ledger().transitions_sampled == b.ledger().transitions_sampled);
}

TEST_CASE("policy rollout charges one transition per layer and no resets") {
  const TabularMDP m = make_twochain();
  LocalSimSession s(m, 3);
  s.start_episode();
  const Trajectory traj = s.rollout(uniform_policy(m));
  REQUIRE(traj.size() == 2);
  CHECK(traj[0].layer == 0);
  CHECK(traj[1].layer == 1);
  CHECK(s.ledger().episodes_started == 1);
  CHECK(s.ledger().transitions_sampled == 2);
  CHECK(s.ledger().resets == 0);
  CHECK_FALSE(s.mid_episode());
  // A rollout cannot start from a terminal cursor.
  CHECK_THROWS_AS(s.rollout(uniform_policy(m)), protocol_error);
}

TEST_CASE("callback rollouts restore the cursor with a charged reset") {
  const TabularMDP m = make_twochain();
  LocalSimSession s(m, 3);
  s.start_episode();
  // The callback probes one simulator step of its own before answering, so
  // each committed step costs: 1 probe reset + 1 probe transition + 1 restore
  // reset + 1 committed transition.
  const auto probing = [](LocalSimSession& sess, int h, int x) {
    sess.reset_to(h, x);
    sess.step(0);
    return 1;
  };
  const Trajectory traj = s.rollout(probing);
  REQUIRE(traj.size() == 2);
  CHECK(traj[0].action == 1);
  CHECK(s.ledger().transitions_sampled == 4);
  CHECK(s.ledger().resets == 4);
}

TEST_CASE("callbacks that leave the cursor in place cost no restore reset") {
  const TabularMDP m = make_twochain();
  LocalSimSession s(m, 3);
  s.start_episode();
  const Trajectory traj =
      s.rollout([](LocalSimSession&, int, int) { return 0; });
  REQUIRE(traj.size() == 2);
  CHECK(s.ledger().transitions_sampled == 2);
  CHECK(s.ledger().resets == 0);
}

TEST_CASE("fuzzed call sequences never reach an unobserved state") {
  Rng mk(401);
  const TabularMDP m =
      random_tabular_mdp({2, 3, 2, 2}, 2, RewardLaw::bernoulli_mean, mk);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    LocalSimSession s(m, seed);
    Rng fuzz(9000 + seed);
    // Shadow protocol state: observed set and cursor layer/state.
    std::set<std::pair<int, int>> shadow_observed;
    int sh = -1, sx = -1;
    std::uint64_t eps = 0, steps = 0, resets = 0;
    for (int op = 0; op < 4000; ++op) {
      const int kind = fuzz.uniform_int(3);
      if (kind == 0) {
        const int x = s.start_episode();
        shadow_observed.insert({0, x});
        sh = 0;
        sx = x;
        ++eps;
      } else if (kind == 1) {
        const int a = fuzz.uniform_int(4) - 1;  // includes invalid actions
        const bool valid = sh >= 0 && a >= 0 && a < m.num_actions;
        if (!valid) {
          CHECK_THROWS_AS(s.step(a), protocol_error);
        } else {
          const auto [r, nx] = s.step(a);
          (void)r;
          ++steps;
          if (nx < 0) {
            sh = -1;
            sx = -1;
          } else {
            ++sh;
            sx = nx;
            shadow_observed.insert({sh, sx});
          }
        }
      } else {
        const int h = fuzz.uniform_int(m.horizon + 1) - 1;
        const int x = fuzz.uniform_int(4) - 1;
        const bool in_range =
            h >= 0 && h < m.horizon && x >= 0 && x < m.states(h);
        const bool valid = in_range && shadow_observed.count({h, x}) > 0;
        if (!valid) {
          CHECK_THROWS_AS(s.reset_to(h, x), protocol_error);
        } else {
          s.reset_to(h, x);
          sh = h;
          sx = x;
          ++resets;
          // The cursor can only ever sit on a previously observed state.
          CHECK(shadow_observed.count({s.cursor_layer(), s.cursor_state()}) >
                0);
        }
      }
      CHECK(s.cursor_layer() == sh);
      CHECK(s.cursor_state() == sx);
    }
    CHECK(s.ledger().episodes_started == eps);
    CHECK(s.ledger().transitions_sampled == steps);
    CHECK(s.ledger().resets == resets);
  }
}
