#include "simlab/mdp.hpp"

#include <cmath>
#include <sstream>

namespace simlab {

namespace {

void check_prob_row(const std::vector<double>& row, const std::string& where,
                    int expected_size) {
  if (static_cast<int>(row.size()) != expected_size) {
    std::ostringstream os;
    os << where << ": row has " << row.size() << " entries, expected "
       << expected_size;
    throw validation_error(os.str());
  }
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0) throw validation_error(where + ": negative probability");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << where << ": row sums to " << sum << ", expected 1 within 1e-9";
    throw validation_error(os.str());
  }
}

}  // namespace

std::string to_string(RewardLaw law) {
  return law == RewardLaw::deterministic_mean ? "deterministic-mean"
                                              : "bernoulli-mean";
}

RewardLaw reward_law_from_string(const std::string& s) {
  if (s == "deterministic-mean") return RewardLaw::deterministic_mean;
  if (s == "bernoulli-mean") return RewardLaw::bernoulli_mean;
  throw validation_error("unknown reward law: " + s);
}

void TabularMDP::validate() const {
  if (horizon < 1) throw validation_error("horizon must be >= 1");
  if (num_actions < 1) throw validation_error("num_actions must be >= 1");
  if (static_cast<int>(states_per_layer.size()) != horizon)
    throw validation_error("states_per_layer must have one entry per layer");
  for (int h = 0; h < horizon; ++h)
    if (states_per_layer[h] < 1)
      throw validation_error("every layer needs at least one state");

  check_prob_row(init_dist, "init_dist", states_per_layer[0]);

  if (static_cast<int>(transitions.size()) != horizon - 1)
    throw validation_error("transitions must cover layers 0..horizon-2");
  for (int h = 0; h + 1 < horizon; ++h) {
    if (static_cast<int>(transitions[h].size()) != states_per_layer[h])
      throw validation_error("transition table layer-size mismatch");
    for (int x = 0; x < states_per_layer[h]; ++x) {
      if (static_cast<int>(transitions[h][x].size()) != num_actions)
        throw validation_error("transition table action-size mismatch");
      for (int a = 0; a < num_actions; ++a) {
        std::ostringstream os;
        os << "transitions[" << h << "][" << x << "][" << a << "]";
        check_prob_row(transitions[h][x][a], os.str(), states_per_layer[h + 1]);
      }
    }
  }

  if (static_cast<int>(reward_means.size()) != horizon)
    throw validation_error("reward_means must cover every layer");
  for (int h = 0; h < horizon; ++h) {
    if (static_cast<int>(reward_means[h].size()) != states_per_layer[h])
      throw validation_error("reward table layer-size mismatch");
    for (int x = 0; x < states_per_layer[h]; ++x) {
      if (static_cast<int>(reward_means[h][x].size()) != num_actions)
        throw validation_error("reward table action-size mismatch");
      for (int a = 0; a < num_actions; ++a) {
        double r = reward_means[h][x][a];
        if (r < 0.0 || r > 1.0)
          throw validation_error("reward means must lie in [0, 1]");
      }
    }
  }
}

TabularMDP make_twochain() {
  TabularMDP m;
  m.horizon = 2;
  m.states_per_layer = {1, 2};
  m.num_actions = 2;
  m.init_dist = {1.0};
  m.transitions = {{{{0.0, 0.0}, {0.0, 0.0}}}};
  m.transitions[0][0][0] = {1.0, 0.0};
  m.transitions[0][0][1] = {0.0, 1.0};
  m.reward_means = {
      {{0.0, 0.0}},              // layer 0: zero reward
      {{0.0, 0.0}, {1.0, 1.0}},  // layer 1: reward equals the state id
  };
  m.reward_law = RewardLaw::bernoulli_mean;
  m.validate();
  return m;
}

TabularMDP random_tabular_mdp(const std::vector<int>& states_per_layer,
                              int num_actions, RewardLaw law, Rng& rng) {
  if (states_per_layer.empty())
    throw validation_error("random_tabular_mdp needs at least one layer");
  if (num_actions <= 0)
    throw validation_error("random_tabular_mdp needs at least one action");
  TabularMDP m;
  m.horizon = static_cast<int>(states_per_layer.size());
  m.states_per_layer = states_per_layer;
  m.num_actions = num_actions;
  m.reward_law = law;
  // A 0.05 floor before normalizing keeps every row fully supported, which
  // the coverage checks and occupancy identities exercise more thoroughly
  // than sparse rows would.
  auto prob_row = [&rng](int n) {
    std::vector<double> row(n);
    double sum = 0.0;
    for (double& v : row) {
      v = 0.05 + rng.next_double();
      sum += v;
    }
    for (double& v : row) v /= sum;
    return row;
  };
  m.init_dist = prob_row(states_per_layer[0]);
  m.transitions.resize(m.horizon - 1);
  for (int h = 0; h + 1 < m.horizon; ++h) {
    m.transitions[h].resize(states_per_layer[h]);
    for (int x = 0; x < states_per_layer[h]; ++x) {
      m.transitions[h][x].resize(num_actions);
      for (int a = 0; a < num_actions; ++a)
        m.transitions[h][x][a] = prob_row(states_per_layer[h + 1]);
    }
  }
  m.reward_means.resize(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    m.reward_means[h].resize(states_per_layer[h]);
    for (int x = 0; x < states_per_layer[h]; ++x) {
      m.reward_means[h][x].resize(num_actions);
      for (int a = 0; a < num_actions; ++a)
        m.reward_means[h][x][a] = rng.next_double();
    }
  }
  m.validate();
  return m;
}

int PolicyTable::action_at(int h, int x) const {
  const auto& row = rows[h][x];
  for (std::size_t a = 0; a < row.size(); ++a)
    if (row[a] >= 1.0 - 1e-12) return static_cast<int>(a);
  throw validation_error("action_at called on a non-deterministic row");
}

int PolicyTable::sample(int h, int x, Rng& rng) const {
  if (deterministic) return action_at(h, x);
  return rng.categorical(rows[h][x]);
}

void PolicyTable::validate(const TabularMDP& m) const {
  if (num_layers() != m.horizon)
    throw validation_error("policy must cover every layer");
  for (int h = 0; h < m.horizon; ++h) {
    if (static_cast<int>(rows[h].size()) != m.states(h))
      throw validation_error("policy layer-size mismatch");
    for (int x = 0; x < m.states(h); ++x) {
      const auto& row = rows[h][x];
      if (static_cast<int>(row.size()) != m.num_actions)
        throw validation_error("policy action-size mismatch");
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0) throw validation_error("negative policy probability");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > 1e-9)
        throw validation_error("policy row does not sum to 1");
      if (deterministic) {
        int ones = 0;
        for (double p : row)
          if (p >= 1.0 - 1e-12) ++ones;
        if (ones != 1)
          throw validation_error("deterministic policy row is not one-hot");
      }
    }
  }
}

PolicyTable deterministic_policy(const TabularMDP& m,
                                 const std::vector<std::vector<int>>& actions) {
  PolicyTable p;
  p.deterministic = true;
  p.rows.resize(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    p.rows[h].assign(m.states(h), std::vector<double>(m.num_actions, 0.0));
    for (int x = 0; x < m.states(h); ++x) {
      int a = actions[h][x];
      if (a < 0 || a >= m.num_actions)
        throw validation_error("deterministic_policy: action out of range");
      p.rows[h][x][a] = 1.0;
    }
  }
  return p;
}

PolicyTable uniform_policy(const TabularMDP& m) {
  PolicyTable p;
  p.deterministic = (m.num_actions == 1);
  p.rows.resize(m.horizon);
  const double w = 1.0 / m.num_actions;
  for (int h = 0; h < m.horizon; ++h)
    p.rows[h].assign(m.states(h), std::vector<double>(m.num_actions, w));
  return p;
}

PolicyTable constant_policy(const TabularMDP& m, int action) {
  std::vector<std::vector<int>> actions(m.horizon);
  for (int h = 0; h < m.horizon; ++h) actions[h].assign(m.states(h), action);
  return deterministic_policy(m, actions);
}

}  // namespace simlab
