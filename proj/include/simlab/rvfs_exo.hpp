#pragma once

#include <cstdint>

#include "simlab/exbmdp.hpp"
#include "simlab/rvfs.hpp"

namespace simlab {

// Rounded-variant formulas (latent sizes S, A; weak-correlation c_exo):
//   M       = ceil(8 eps^-2 c_exo S A H)
//   n_test  = ceil(scale 2^8 M^2 H eps^-2 ln(8 M^6 H^8 eps^-2 delta^-1))
//   n_reg   = ceil(scale 2^8 M^2 eps^-2 ln(8 |V| H M^2 / delta))
//   delta'  = delta / (4 M^7 n_test_theory^2 H^8 |V|)
//   eps_reg^2 = 9 M H^2 ln(8 M^2 H |V| / delta) / n_reg
//             + 34 M H^3 ln(8 M^6 n_test_theory^2 H^8 / delta) / n_test
// with the same theory-vs-used convention as the plain variant, and a test
// threshold factor of 1 instead of 2 inside beta(t).
RvfsParams make_exo_params(double eps, double delta, int latent_states,
                           int num_actions, int horizon, double c_exo,
                           std::size_t vclass_size, double scale,
                           const RvfsOverrides& overrides = {});

// Rounded variant: rollout actions and the final policy use exact bins
// ceil(backup / eps + zeta_layer); the tested discrepancy is eps^2 and every
// backup runs at accuracy (eps^2, delta').
RvfsResult rvfs_exo(LocalSimSession& session, const FiniteVClass& vclass,
                    const RvfsParams& params, const std::vector<double>& zeta);

struct BoostParams {
  double eps = 0.0;
  double delta = 0.0;
  long long n_boost = 0;  // independent attempts
  long long n_eval = 0;   // on-policy evaluation episodes per attempt
  long long n_bc = 0;     // cloning episodes per attempt
  // True when 24 S A H eps >= 1, i.e. repeating attempts cannot amplify the
  // chance that some attempt used a well-placed bin offset.
  bool vacuous_amplification = false;

  // n_boost = ceil(ln(1/delta) / |ln(24 S A H eps)|)   (error when the log
  //           argument equals 1),
  // n_eval  = ceil(256 eps^-2 ln(2 n_boost / delta)),
  // n_bc    = ceil(8 H^2 ln(4 H |policy class| / delta) / eps), overridable.
  static BoostParams make(double eps, double delta, int latent_states,
                          int num_actions, int horizon,
                          std::size_t policy_class_size,
                          long long n_bc_override = 0);
};

struct BoostIteration {
  std::vector<double> zeta;  // bin offsets drawn for this attempt
  bool snapped = false;      // exact-recursion diagnostic for those offsets
  int cloned_index = -1;
  double j_hat = 0.0;        // Monte-Carlo value of the cloned policy
  double j_exact = 0.0;      // exact value of the cloned policy
  std::vector<int> v_hat_ids;
  SampleLedger ledger;       // session totals at the end of the attempt
};

struct ExoBcResult {
  BoostParams boost;
  std::vector<BoostIteration> iterations;
  int best_index = -1;  // attempt with the largest j_hat (ties: earliest)
  PolicyTable best_policy;
};

// Full pipeline on an exogenous block MDP: for each attempt, draw fresh bin
// offsets uniform on [0, 1/2] per layer, run the rounded search in a fresh
// session over the flattened observations, clone the rounded backup expert
// onto the policy class, and score the clone with n_eval on-policy episodes.
// Returns every attempt plus the best clone.
ExoBcResult rvfs_exo_bc(const ExBMDPSpec& spec, const FiniteVClass& vclass,
                        const FinitePolicyClass& policy_class, double eps,
                        double delta, double c_exo, double scale,
                        const RvfsOverrides& overrides, std::uint64_t seed,
                        long long n_bc_override = 0);

}  // namespace simlab
