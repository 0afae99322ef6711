#include "simlab/session.hpp"

#include <sstream>

namespace simlab {

LocalSimSession::LocalSimSession(const TabularMDP& model, std::uint64_t seed)
    : model_(model),
      rng_init_(Rng(seed).substream("init")),
      rng_reward_(Rng(seed).substream("reward")),
      rng_next_(Rng(seed).substream("next")),
      rng_action_(Rng(seed).substream("action")) {
  model_.validate();
  observed_.resize(model_.horizon);
  for (int h = 0; h < model_.horizon; ++h)
    observed_[h].assign(model_.states(h), 0);
}

int LocalSimSession::start_episode() {
  int x = rng_init_.categorical(model_.init_dist);
  observed_[0][x] = 1;
  cursor_layer_ = 0;
  cursor_state_ = x;
  ledger_.episodes_started += 1;
  return x;
}

std::pair<double, int> LocalSimSession::step(int action) {
  if (cursor_layer_ < 0)
    throw protocol_error("step called with a terminal cursor");
  if (action < 0 || action >= model_.num_actions) {
    std::ostringstream os;
    os << "step: action " << action << " out of range";
    throw protocol_error(os.str());
  }
  const int h = cursor_layer_;
  const int x = cursor_state_;
  const double mean = model_.reward_means[h][x][action];
  const double reward = model_.reward_law == RewardLaw::deterministic_mean
                            ? mean
                            : (rng_reward_.bernoulli(mean) ? 1.0 : 0.0);
  ledger_.transitions_sampled += 1;
  if (h + 1 >= model_.horizon) {
    cursor_layer_ = -1;
    cursor_state_ = -1;
    return {reward, -1};
  }
  int nx = rng_next_.categorical(model_.transitions[h][x][action]);
  observed_[h + 1][nx] = 1;
  cursor_layer_ = h + 1;
  cursor_state_ = nx;
  return {reward, nx};
}

void LocalSimSession::reset_to(int h, int x) {
  if (h < 0 || h >= model_.horizon || x < 0 || x >= model_.states(h)) {
    std::ostringstream os;
    os << "reset_to: (" << h << ", " << x << ") out of range";
    throw protocol_error(os.str());
  }
  if (!observed_[h][x]) {
    std::ostringstream os;
    os << "reset_to: state " << x << " at layer " << h
       << " has not been observed in this session";
    throw protocol_error(os.str());
  }
  cursor_layer_ = h;
  cursor_state_ = x;
  ledger_.resets += 1;
}

bool LocalSimSession::observed(int h, int x) const {
  if (h < 0 || h >= model_.horizon || x < 0 || x >= model_.states(h))
    return false;
  return observed_[h][x] != 0;
}

Trajectory LocalSimSession::rollout(const PolicyTable& policy) {
  return rollout([&policy, this](LocalSimSession&, int h, int x) {
    return policy.sample(h, x, rng_action_);
  });
}

Trajectory LocalSimSession::rollout(
    const std::function<int(LocalSimSession&, int, int)>& pick_action) {
  if (cursor_layer_ < 0)
    throw protocol_error("rollout called with a terminal cursor");
  Trajectory out;
  while (cursor_layer_ >= 0) {
    const int h = cursor_layer_;
    const int x = cursor_state_;
    const int a = pick_action(*this, h, x);
    if (cursor_layer_ != h || cursor_state_ != x) reset_to(h, x);
    auto [reward, next] = step(a);
    (void)next;
    out.push_back({h, x, a, reward});
  }
  return out;
}

}  // namespace simlab
