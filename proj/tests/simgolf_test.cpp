// Tests for the optimistic elimination learner: frozen parameter resolution,
// selection and confidence bookkeeping, a fully deterministic two-member run
// with a hand-computed elimination time, and exact sample accounting.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "simlab/classes.hpp"
#include "simlab/errors.hpp"
#include "simlab/mdp.hpp"
#include "simlab/oracle.hpp"
#include "simlab/session.hpp"
#include "simlab/simgolf.hpp"

using namespace simlab;

namespace {

// The optimal table of the twochain and an over-optimistic impostor whose
// layer-0 residual is exactly 4 per episode.
FiniteQClass two_member_class() {
  const TabularMDP m = make_twochain();
  FiniteQClass cls;
  cls.origin = "hand-built";
  cls.members.push_back(value_iteration(m).qstar);
  QTable bad = cls.members[0];
  bad.q[0][0] = {0.0, 2.0};
  bad.q[1][0] = {0.0, 0.0};
  bad.q[1][1] = {0.0, 0.0};
  cls.members.push_back(bad);
  return cls;
}

}  // namespace

TEST_CASE("parameter resolution is frozen at the reference setting") {
  const SimGolfParams p =
      SimGolfParams::make(0.1, 0.05, 2, 4.0, 2, 4e-4, 4.85);
  CHECK(std::abs(p.beta_one - 32.0 * std::log(160.0)) <= 1e-9);
  CHECK(p.n_guess == 104);
  CHECK(std::abs(p.beta_stat - 16.0 * std::log(16640.0)) <= 1e-9);
  CHECK(p.beta == 2.0 * p.beta_stat);
  CHECK(p.n_iters == 200);
  CHECK(p.k_draws == 50);
}

TEST_CASE("parameter validation rejects out-of-range settings") {
  CHECK_THROWS_AS(SimGolfParams::make(0.0, 0.05, 2, 4.0, 2, 1.0, 1.0),
                  config_error);
  CHECK_THROWS_AS(SimGolfParams::make(0.1, 1.0, 2, 4.0, 2, 1.0, 1.0),
                  config_error);
  CHECK_THROWS_AS(SimGolfParams::make(0.1, 0.05, 0, 4.0, 2, 1.0, 1.0),
                  config_error);
  CHECK_THROWS_AS(SimGolfParams::make(0.1, 0.05, 2, 0.0, 2, 1.0, 1.0),
                  config_error);
  CHECK_THROWS_AS(SimGolfParams::make(0.1, 0.05, 2, 4.0, 0, 1.0, 1.0),
                  config_error);
  CHECK_THROWS_AS(SimGolfParams::make(0.1, 0.05, 2, 4.0, 2, 1.5, 1.0),
                  config_error);
  CHECK_THROWS_AS(SimGolfParams::make(0.1, 0.05, 2, 4.0, 2, 1.0, 0.0),
                  config_error);
}

TEST_CASE("optimistic selection maximizes the initial-state score") {
  const FiniteQClass cls = two_member_class();
  ConfidenceState conf;
  conf.beta = 10.0;
  conf.cum.assign(2, std::vector<double>(2, 0.0));

  // No past initial states: every score is zero, smallest index wins.
  CHECK(optimistic_select(cls, conf, {}) == 0);
  // The impostor promises 2 at the initial state, the truth only 1.
  CHECK(optimistic_select(cls, conf, {0}) == 1);
  CHECK(optimistic_select(cls, conf, {0, 0, 0}) == 1);

  // Eliminating the impostor reverts the choice.
  conf.cum[1][0] = 11.0;
  CHECK_FALSE(conf.active(1));
  CHECK(conf.active_count() == 1);
  CHECK(optimistic_select(cls, conf, {0}) == 0);

  // The threshold comparison is strict: exactly beta stays active.
  conf.cum[1][0] = 10.0;
  CHECK(conf.active(1));

  // An empty active set is an unrecoverable algorithm state.
  conf.cum[0][1] = 12.0;
  conf.cum[1][0] = 11.0;
  CHECK_THROWS_AS(optimistic_select(cls, conf, {0}), algorithm_error);
}

TEST_CASE("confidence updates accumulate layer sums") {
  ConfidenceState conf;
  conf.beta = 100.0;
  conf.cum.assign(2, std::vector<double>(2, 0.0));
  confidence_update(conf, {{1.0, 2.0}, {3.0, 4.0}});
  confidence_update(conf, {{0.5, 0.0}, {0.0, 1.0}});
  CHECK(conf.cum[0] == std::vector<double>{1.5, 2.0});
  CHECK(conf.cum[1] == std::vector<double>{3.0, 5.0});
  CHECK_THROWS_AS(confidence_update(conf, {{1.0, 2.0}}), validation_error);
}

TEST_CASE("greedy policies of tables break ties to the smallest action") {
  const TabularMDP m = make_twochain();
  const QTable qstar = value_iteration(m).qstar;
  const PolicyTable pi = greedy_policy_of(m, qstar);
  CHECK(pi.action_at(0, 0) == 1);
  CHECK(pi.action_at(1, 0) == 0);
  CHECK(pi.action_at(1, 1) == 0);
}

TEST_CASE("a singleton class containing the optimum never loses it") {
  const TabularMDP m = make_twochain();
  FiniteQClass cls;
  cls.members.push_back(value_iteration(m).qstar);
  const SimGolfParams p = SimGolfParams::make(0.5, 0.1, 1, 4.0, 2, 1e-3, 1.0);
  LocalSimSession session(m, 99);
  const SimGolfResult res = run_simgolf(session, cls, p);
  CHECK(res.jstar == 1.0);
  CHECK(res.mixture_j == 1.0);
  REQUIRE(res.final_active.size() == 1);
  CHECK(res.final_active[0] == 1);
  for (const SimGolfTraceRow& row : res.trace) {
    CHECK(row.selected_index == 0);
    CHECK(row.active_size == 1);
    CHECK(row.j_exact == 1.0);
    CHECK(row.residual_max == 0.0);  // zero-variance targets, exact member
  }
}

TEST_CASE("the impostor is eliminated at the hand-computed iteration") {
  const TabularMDP m = make_twochain();
  const FiniteQClass cls = two_member_class();
  const SimGolfParams p =
      SimGolfParams::make(0.1, 0.05, 2, 4.0, 2, 4e-4, 4.85);
  LocalSimSession session(m, 7);
  const SimGolfResult res = run_simgolf(session, cls, p);

  REQUIRE(static_cast<long long>(res.trace.size()) == 200);
  // Iteration 1 has no optimism evidence yet, so index 0 is chosen; the
  // impostor then wins the optimism race until its layer-0 residual sum 4*t
  // crosses beta = 311.03 after iteration 78.
  CHECK(res.trace[0].selected_index == 0);
  for (int t = 2; t <= 78; ++t) {
    CHECK(res.trace[t - 1].selected_index == 1);
    CHECK(res.trace[t - 1].active_size == 2);
  }
  for (int t = 79; t <= 200; ++t) {
    CHECK(res.trace[t - 1].selected_index == 0);
    CHECK(res.trace[t - 1].active_size == 1);
  }
  REQUIRE(res.final_active.size() == 2);
  CHECK(res.final_active[0] == 1);
  CHECK(res.final_active[1] == 0);

  // Both greedy policies are optimal here, so the mixture loses nothing.
  CHECK(res.mixture_j == 1.0);
  for (const SimGolfTraceRow& row : res.trace) {
    CHECK(row.j_exact == 1.0);
    // The impostor's squared residuals are exactly 4 (layer 0) + 1 (layer 1)
    // every iteration; residuals are scored even after elimination.
    CHECK(row.residual_max == 5.0);
  }

  // Exact sample accounting: one episode of H steps plus H * k scoring draws
  // (each a reset + step) per iteration.
  const std::uint64_t n = 200, h = 2, k = 50;
  CHECK(res.ledger.episodes_started == n);
  CHECK(res.ledger.transitions_sampled == n * h * (1 + k));
  CHECK(res.ledger.resets == n * h * k);
}

TEST_CASE("horizon mismatches between params and session are rejected") {
  const TabularMDP m = make_twochain();
  FiniteQClass cls;
  cls.members.push_back(value_iteration(m).qstar);
  const SimGolfParams p = SimGolfParams::make(0.5, 0.1, 1, 4.0, 3, 1e-3, 1.0);
  LocalSimSession session(m, 1);
  CHECK_THROWS_AS(run_simgolf(session, cls, p), config_error);
}

TEST_CASE("random-instance runs keep the ledger identity and shrink actives") {
  Rng mk(314);
  const TabularMDP m =
      random_tabular_mdp({2, 3, 2}, 2, RewardLaw::bernoulli_mean, mk);
  FiniteQClass cls;
  cls.members.push_back(value_iteration(m).qstar);
  QTable noisy = cls.members[0];
  for (auto& layer : noisy.q)
    for (auto& state : layer)
      for (double& v : state) v = std::min(3.0, v + 1.5);
  cls.members.push_back(noisy);
  const SimGolfParams p = SimGolfParams::make(0.4, 0.1, 2, 6.0, 3, 2e-3, 1.0);
  LocalSimSession session(m, 5);
  const SimGolfResult res = run_simgolf(session, cls, p);
  const std::uint64_t n = static_cast<std::uint64_t>(p.n_iters);
  const std::uint64_t k = static_cast<std::uint64_t>(p.k_draws);
  CHECK(res.ledger.episodes_started == n);
  CHECK(res.ledger.transitions_sampled == n * 3 * (1 + k));
  CHECK(res.ledger.resets == n * 3 * k);
  long long last_active = 2;
  for (const SimGolfTraceRow& row : res.trace) {
    CHECK(row.active_size <= last_active);  // active sets only shrink
    last_active = row.active_size;
    CHECK(row.selected_index >= 0);
    CHECK(row.selected_index < 2);
    CHECK(row.j_exact <= res.jstar + 1e-12);
  }
}
