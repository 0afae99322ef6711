#pragma once

#include <functional>
#include <vector>

#include "simlab/session.hpp"

namespace simlab {

// Sample sizes for Monte-Carlo one-step backups. With n_sim draws a single
// estimate is eps-accurate with probability at least 1 - delta (Hoeffding on
// [0, 2]-bounded terms when values lie in [0, H] rescaled by callers).
struct BackupParams {
  double eps = 0.0;
  double log_inv_delta = 0.0;  // ln(1/delta), kept in log space
  long long n_sim = 0;

  // n_sim = ceil(2 ln(1/delta) / eps^2).
  static BackupParams make(double eps, double delta);
  // Same, for confidence levels too small to represent as a double.
  static BackupParams make_from_log(double eps, double log_inv_delta);
};

// Value of a next-layer state; called only with valid state ids. An empty
// function is treated as identically zero.
using StateValueFn = std::function<double(int)>;

// Monte-Carlo estimate of E[r + f(x')] at (layer, state, action): n_sim
// fresh (reset_to + step) draws. Acting at the last layer contributes the
// reward only. Estimates are never cached; every call draws fresh samples.
double phat(LocalSimSession& session, int layer, int state, int action,
            const StateValueFn& f_next, const BackupParams& params);

// Monte-Carlo estimate of E[f(x_1)] over n_sim start_episode draws. Charges
// episodes, not transitions.
double phat_initial(LocalSimSession& session, const StateValueFn& f,
                    const BackupParams& params);

// Smallest action index maximizing a fresh phat estimate per action.
int greedy_action(LocalSimSession& session, int layer, int state,
                  const StateValueFn& f_next, const BackupParams& params);

// Like greedy_action, but actions are compared through exact rounding bins
// ceil(estimate / eps_round + zeta); ties break to the smallest index. The
// estimates should be computed at accuracy eps_round^2 (callers pick params).
int rounded_action(LocalSimSession& session, int layer, int state,
                   const StateValueFn& f_next, const BackupParams& params,
                   double eps_round, double zeta);

}  // namespace simlab
