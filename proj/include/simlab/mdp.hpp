#pragma once

#include <string>
#include <vector>

#include "simlab/errors.hpp"
#include "simlab/rng.hpp"

namespace simlab {

enum class RewardLaw {
  deterministic_mean,  // reward equals the mean exactly
  bernoulli_mean,      // reward ~ Bernoulli(mean)
};

std::string to_string(RewardLaw law);
RewardLaw reward_law_from_string(const std::string& s);

// Layered episodic MDP. Layers are 0-indexed 0..horizon-1; each layer has its
// own dense state ids 0..states_per_layer[h]-1. An episode starts from
// init_dist over layer-0 states and ends after acting at the last layer.
struct TabularMDP {
  int horizon = 0;
  std::vector<int> states_per_layer;
  int num_actions = 0;
  std::vector<double> init_dist;
  // transitions[h][x][a] is a probability row over layer h+1 states,
  // for h = 0..horizon-2.
  std::vector<std::vector<std::vector<std::vector<double>>>> transitions;
  // reward_means[h][x][a] in [0, 1] for h = 0..horizon-1.
  std::vector<std::vector<std::vector<double>>> reward_means;
  RewardLaw reward_law = RewardLaw::bernoulli_mean;

  int states(int h) const { return states_per_layer[h]; }

  // Throws validation_error if any dimension or probability row is invalid.
  // Probability rows must sum to 1 within 1e-9 with nonnegative entries.
  void validate() const;
};

// Two-layer reference chain: one layer-0 state, two actions, action a moves
// deterministically to layer-1 state a; layer-0 rewards are 0 and layer-1
// rewards equal the state id for both actions.
TabularMDP make_twochain();

// Dense random instance: initial distribution and every transition row drawn
// from a floor-plus-uniform profile and normalized; reward means uniform on
// [0, 1]. Validates before returning.
TabularMDP random_tabular_mdp(const std::vector<int>& states_per_layer,
                              int num_actions, RewardLaw law, Rng& rng);

struct StepRecord {
  int layer = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;
};
using Trajectory = std::vector<StepRecord>;

// Per-layer map from state to a distribution over actions.
struct PolicyTable {
  std::vector<std::vector<std::vector<double>>> rows;  // rows[h][x][a]
  bool deterministic = false;

  int num_layers() const { return static_cast<int>(rows.size()); }
  // Smallest action carrying probability 1 (deterministic tables).
  int action_at(int h, int x) const;
  int sample(int h, int x, Rng& rng) const;
  void validate(const TabularMDP& m) const;
};

PolicyTable deterministic_policy(const TabularMDP& m,
                                 const std::vector<std::vector<int>>& actions);
PolicyTable uniform_policy(const TabularMDP& m);
PolicyTable constant_policy(const TabularMDP& m, int action);

}  // namespace simlab
