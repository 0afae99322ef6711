#pragma once

#include <vector>

#include "simlab/classes.hpp"
#include "simlab/session.hpp"

namespace simlab {

// Deterministic smallest-index greedy policy of an action-value table.
PolicyTable greedy_policy_of(const TabularMDP& m, const QTable& q);

struct SimGolfParams {
  double eps = 0.0;
  double delta = 0.0;
  double scale_n = 1.0;  // in (0, 1]; shrinks the iteration count
  double scale_k = 1.0;  // positive; rescales the per-site draw count
  double c_cov = 0.0;    // coverability constant fed to the bounds
  int horizon = 0;

  // Resolved by the one-round fixed point below.
  double beta_one = 0.0;   // confidence radius with a 1-iteration union bound
  long long n_guess = 0;   // iteration count implied by beta_one
  double beta_stat = 0.0;  // per-estimate radius with the n_guess union bound
  double beta = 0.0;       // elimination threshold (2 * beta_stat)
  long long n_iters = 0;   // episodes / iterations
  long long k_draws = 0;   // fresh draws per visited (layer, state, action)

  // beta_one = 32 ln(2 H |Q| / delta), n_guess from beta_one, then
  // beta_stat = 16 ln(2 H n_guess |Q| / delta), beta = 2 beta_stat,
  // n_iters = ceil(scale_n H^2 c_cov beta / eps^2),
  // k_draws = ceil(scale_k 8 n_iters / beta_stat).
  static SimGolfParams make(double eps, double delta, std::size_t qclass_size,
                            double c_cov, int horizon, double scale_n,
                            double scale_k);
};

// Per-member, per-layer cumulative squared Bellman residuals. A member stays
// active while every layer's sum is at most beta.
struct ConfidenceState {
  std::vector<std::vector<double>> cum;  // [member][layer]
  double beta = 0.0;

  bool active(std::size_t member) const;
  long long active_count() const;
};

// Among active members, the smallest index maximizing the optimism score
// sum over past initial states of max_a q_1(x_1, a). Throws algorithm_error
// when no member is active.
int optimistic_select(const FiniteQClass& qclass, const ConfidenceState& state,
                      const std::vector<int>& initial_states);

// Adds one iteration's residuals (indexed [member][layer]) into the sums.
void confidence_update(ConfidenceState& state,
                       const std::vector<std::vector<double>>& residuals);

struct SimGolfTraceRow {
  long long t = 0;
  int selected_index = -1;
  long long active_size = 0;  // size of the set the selection was made from
  double j_exact = 0.0;       // exact value of the played greedy policy
  double residual_max = 0.0;  // largest per-member residual this iteration
};

struct SimGolfResult {
  std::vector<int> selected;  // member chosen at each iteration
  std::vector<SimGolfTraceRow> trace;
  double mixture_j = 0.0;  // mean exact value of the played policies
  double jstar = 0.0;      // exact optimal value
  std::vector<char> final_active;
  SampleLedger ledger;
};

// One episode per iteration: select optimistically, play the greedy policy of
// the selected member, then draw k fresh transitions at every visited
// (layer, state, action) and charge every member's squared residual
// (q(x, a) - mean_k [r + max_a' q(x', a')])^2 at that layer (reward-only
// targets at the last layer). The same k draws score the whole class.
SimGolfResult run_simgolf(LocalSimSession& session, const FiniteQClass& qclass,
                          const SimGolfParams& params);

}  // namespace simlab
