#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "simlab/mdp.hpp"

namespace simlab {

// Exact accounting of everything an algorithm draws from a session.
//   episodes_started    - start_episode calls (the initial-state draw is not
//                         counted as a transition)
//   transitions_sampled - every (reward, next-state) draw from some (x, a)
//   resets              - reset_to calls
struct SampleLedger {
  std::uint64_t episodes_started = 0;
  std::uint64_t transitions_sampled = 0;
  std::uint64_t resets = 0;
};

// Stateful simulator session. The caller may reset only to states this
// session has already produced; attempting anything else raises
// protocol_error. This is the enforcement point for algorithms under test.
//
// Sessions own a single RNG stream split per draw site (initial state,
// rewards, next states, policy-action sampling), so identical seeds and call
// sequences reproduce identical trajectories and ledgers.
class LocalSimSession {
 public:
  LocalSimSession(const TabularMDP& model, std::uint64_t seed);

  // Draws a layer-0 state, marks it observed, moves the cursor there.
  // Abandons any in-progress episode.
  int start_episode();

  // Samples (reward, next state) at the cursor; next state is -1 when acting
  // at the last layer. Marks the next state observed and advances the cursor.
  std::pair<double, int> step(int action);

  // Moves the cursor to (h, x); x must have been observed at layer h.
  void reset_to(int h, int x);

  bool mid_episode() const { return cursor_layer_ >= 0; }
  int cursor_layer() const { return cursor_layer_; }
  int cursor_state() const { return cursor_state_; }
  bool observed(int h, int x) const;
  const SampleLedger& ledger() const { return ledger_; }
  const TabularMDP& model() const { return model_; }

  // Runs the policy from the current cursor to the end of the episode and
  // returns the executed suffix.
  Trajectory rollout(const PolicyTable& policy);

  // Same, but the action for each step comes from a callback that may itself
  // consume simulator samples (e.g. Monte-Carlo backups). If the callback
  // moves the cursor, the session resets back to the pending state before
  // committing the step.
  Trajectory rollout(const std::function<int(LocalSimSession&, int, int)>& pick_action);

 private:
  const TabularMDP& model_;
  std::vector<std::vector<char>> observed_;
  int cursor_layer_ = -1;  // -1 = no live episode
  int cursor_state_ = -1;
  SampleLedger ledger_;
  Rng rng_init_;
  Rng rng_reward_;
  Rng rng_next_;
  Rng rng_action_;
};

}  // namespace simlab
