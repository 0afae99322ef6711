#pragma once

#include <functional>
#include <vector>

#include "simlab/classes.hpp"
#include "simlab/session.hpp"

namespace simlab {

// Expert action for (session, layer, state). The expert may itself consume
// simulator samples (e.g. Monte-Carlo backups); the trajectory collector
// restores the session cursor before committing each step.
using ExpertFn = std::function<int(LocalSimSession&, int, int)>;

struct CloneParams {
  double eps = 0.0;
  double delta = 0.0;
  long long n_bc = 0;  // expert trajectories to collect

  // n_bc = ceil(16 H^2 ln(2 |policy class| / delta) / eps). A positive
  // n_bc_override replaces the formula count (desk-scale runs).
  static CloneParams make(double eps, double delta, int horizon,
                          std::size_t policy_class_size,
                          long long n_bc_override = 0);
};

struct CloneResult {
  int selected_index = -1;     // empirical 0-1 loss minimizer, smallest id
  PolicyTable policy;          // copy of the selected member
  std::vector<Trajectory> corpus;      // the expert trajectories
  std::vector<long long> mistakes;     // per-member disagreement counts
};

// Collects n_bc expert episodes and returns the policy-class member with the
// fewest action disagreements against the corpus (ties to the smallest id).
// Members must be deterministic.
CloneResult behavior_cloning(LocalSimSession& session,
                             const FinitePolicyClass& policy_class,
                             const ExpertFn& expert, const CloneParams& params);

}  // namespace simlab
