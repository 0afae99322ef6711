#pragma once

#include <utility>
#include <vector>

#include "simlab/exact_bins.hpp"
#include "simlab/exbmdp.hpp"
#include "simlab/mdp.hpp"
#include "simlab/value_tables.hpp"

namespace simlab {

// ---------------------------------------------------------------------------
// Exact dynamic-programming quantities for a layered tabular MDP.
// ---------------------------------------------------------------------------

struct ValueIterationResult {
  QTable qstar;
  VTable vstar;
  PolicyTable pistar;  // deterministic, smallest-index argmax
  double jstar = 0.0;  // optimal expected total reward
};

ValueIterationResult value_iteration(const TabularMDP& m);

struct PolicyEvalResult {
  QTable qpi;
  VTable vpi;
  double j = 0.0;
};

PolicyEvalResult policy_eval(const TabularMDP& m, const PolicyTable& pi);

// occupancy[h][x] = P^pi[x_h = x]; rows sum to 1 per layer.
std::vector<std::vector<double>> occupancy(const TabularMDP& m,
                                           const PolicyTable& pi);

struct PerformanceDifference {
  double lhs = 0.0;  // sum_h E^pi [ Q^pihat(x_h, pi) - Q^pihat(x_h, pihat) ]
  double rhs = 0.0;  // J(pi) - J(pihat)
};

PerformanceDifference performance_difference(const TabularMDP& m,
                                             const PolicyTable& pi,
                                             const PolicyTable& pihat);

// ---------------------------------------------------------------------------
// Structural coefficients.
// ---------------------------------------------------------------------------

// coverability(h) = A * sum_x m_h(x), where m_h(x) = sup_pi P^pi[x_h = x] is
// computed by a backward expectation-form DP. `layer` is 0-based.
double coverability(const TabularMDP& m, int layer);
double coverability(const TabularMDP& m);  // max over layers

// Brute-force certificate for coverability on small instances: enumerates all
// deterministic policies, takes the per-state max occupancy over them, and
// returns A times its sum. Throws config_error beyond ~2e6 policies.
double coverability_bruteforce(const TabularMDP& m, int layer);

// pushforward_coverability(h) = sum_{x'} max_{(x,a)} T_{h-1}(x' | x, a) for
// h >= 1, and sum of the initial distribution (= 1) for h = 0.
double pushforward_coverability(const TabularMDP& m, int layer);
double pushforward_coverability(const TabularMDP& m);  // max over layers

// Brute-force certificate on layers with at most `max_states` states: grids
// the distribution simplex at `grid_step` resolution and evaluates
// min_mu max_{x'} P_mu(x') / mu(x') where P_mu is the pushforward.
double pushforward_coverability_bruteforce(const TabularMDP& m, int layer,
                                           double grid_step = 1e-3,
                                           int max_states = 3);

struct GapResult {
  double gap = 0.0;  // min over (h, x, suboptimal a) of V*(x) - Q*(x, a)
  bool unique = true;  // true iff the optimal action is unique everywhere
};

GapResult min_gap(const TabularMDP& m);

// A two-layer instance with a strictly positive gap of exactly 1 at every
// reachable state and a unique optimal action everywhere.
TabularMDP make_gapped_twochain();

// ---------------------------------------------------------------------------
// Weak-correlation coefficient of an exogenous chain.
// ---------------------------------------------------------------------------

// max over layers h and state pairs (xi, xi') with positive product marginal
// of P[xi_h = xi, xi'_h = xi'] / (P[xi_h = xi] * P[xi'_h = xi']) where the
// joint runs two coupled copies of the chain started from the same draw.
double weak_correlation_coeff(const std::vector<double>& init,
                              const std::vector<std::vector<std::vector<double>>>& t_exo,
                              int horizon);
double weak_correlation_coeff(const ExBMDPSpec& spec);

// ---------------------------------------------------------------------------
// Snapped benchmark policy for an exogenous-block MDP.
// ---------------------------------------------------------------------------

struct BarPolicyResult {
  PolicyTable policy;           // observation-level, deterministic
  std::vector<std::vector<int>> latent_actions;  // [h][s]
  // Exact backup values g_h(s, a) of the recursion, as rationals.
  std::vector<std::vector<std::vector<rational>>> latent_backup;
};

// Rounded benchmark recursion: at each layer (from the last upward) the
// action maximizes ceil(g_h(s, a) / eps + zeta_h) with smallest-index
// tie-breaking, where g backs up the chosen continuation values exactly.
// Computed at the observation level from exact rational products of the
// factored transition rows, then checked to depend on the latent state only.
BarPolicyResult benchmark_bar_policy(const ExBMDPSpec& spec, double eps,
                                     const std::vector<double>& zeta);

// Same recursion carried out directly on the latent chain.
BarPolicyResult bar_policy_latent(const ExBMDPSpec& spec, double eps,
                                  const std::vector<double>& zeta);

struct SnapViolation {
  int layer = 0;
  int state = 0;
  int action = 0;
};

struct SnapCheckResult {
  bool snapped = true;
  std::vector<SnapViolation> violations;
};

// zeta is snapped iff no backup value g_h(s, a) of the benchmark recursion
// has frac = ceil(g/eps) - g/eps within 4*eps of zeta_h (closed interval,
// exact rational arithmetic) and no zeta_h lies in [0, 4*eps].
SnapCheckResult snap_check(const ExBMDPSpec& spec, double eps,
                           const std::vector<double>& zeta);

}  // namespace simlab
