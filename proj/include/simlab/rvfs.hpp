#pragma once

#include <string>
#include <vector>

#include "simlab/backup.hpp"
#include "simlab/classes.hpp"
#include "simlab/session.hpp"

namespace simlab {

// Engine-facing parameters for recursive value-function search. Both the
// plain and the rounded (exogenous-noise) variants resolve their own formulas
// into this struct; the engine never recomputes theory quantities.
struct RvfsParams {
  double eps = 0.0;
  double delta = 0.0;
  int horizon = 0;
  int num_actions = 0;
  std::size_t vclass_size = 0;
  double scale = 1.0;  // multiplies the test / regression counts only

  long long m_budget = 0;        // core-set size bound per level
  double n_test_theory = 0.0;    // unscaled, uncapped test count (bounds only)
  long long n_test = 0;          // per-pair test repetitions actually run
  long long n_reg = 0;           // per-pair regression draws actually run
  long long cap_n_est = 0;       // 0 = no cap
  double log_inv_delta_prime = 0.0;  // ln(1/delta'), from theory counts
  double eps_reg_sq = 0.0;       // confidence-set radius actually used
  double beta_factor = 0.0;      // 2 for the plain variant, 1 for the rounded

  bool budget_guard = true;      // throw when a core set exceeds m_budget
  long long max_restarts = 400;  // hard stop regardless of the guard

  // Rollout-label count when the core set holds k pairs:
  // ceil(2 n_reg^2 ln(8 A n_reg H k^3 / delta)), then capped.
  long long n_est(long long k) const;

  // Test threshold inflation at the t-th test of a level:
  // sqrt(beta_factor ln(8 A m_budget |V| t^2 / delta) / ln(1/delta')).
  double beta(long long t) const;
};

// Optional desk-scale knobs. Caps of 0 leave the scaled counts unchanged. A
// nonnegative eps_reg_sq_override replaces the theory confidence radius,
// whose value under capped counts is far too large to exclude anything.
struct RvfsOverrides {
  long long cap_n_test = 0;
  long long cap_n_reg = 0;
  long long cap_n_est = 0;
  double eps_reg_sq_override = -1.0;
  bool budget_guard = true;
  long long max_restarts = 400;
};

// Plain-variant formulas:
//   M       = ceil(8 c_push H / eps)
//   n_test  = ceil(scale 2^8 M^2 H ln(8 M^6 H^8 eps^-2 delta^-1) / eps)
//   n_reg   = ceil(scale 2^8 M^2 ln(8 |V|^2 H M^2 delta^-1) / eps)
//   delta'  = delta / (8 M^7 n_test_theory^2 H^8 |V|)
//   eps_reg^2 = 9 M H^2 ln(8 M^2 H |V|^2 / delta) / n_reg
//             + 34 M H^3 ln(8 M^6 n_test_theory^2 H^8 / delta) / n_test
// where the logarithms always use the theory (unscaled, uncapped) test count
// and the denominators use the counts actually run.
RvfsParams make_rvfs_params(double eps, double delta, int horizon,
                            int num_actions, double c_push,
                            std::size_t vclass_size, double scale,
                            const RvfsOverrides& overrides = {});

// How the engine interacts with the simulator: the discrepancy tested at a
// pair, the accuracy of every Monte-Carlo backup, and whether rollout actions
// are chosen greedily or through exact rounding bins.
struct RvfsEngineConfig {
  double test_eps = 0.0;          // eps (plain) or eps^2 (rounded)
  BackupParams pihat_params;      // accuracy of every phat in the run
  bool rounded = false;
  double eps_round = 0.0;         // bin width (rounded variant)
  std::vector<double> zeta;       // per-layer bin offsets (rounded variant)
};

// A core-set element: the state reached at the level's layer and the action
// whose backup failed the test there. The virtual anchor (-1, -1) stands for
// "draw the initial state"; it seeds level 0 and is the only pair level 1 can
// receive.
struct CorePair {
  int state = -1;
  int action = -1;
};

struct RvfsTraceRow {
  std::string event;     // "recurse" | "test_fail" | "refit" | "return" | "budget"
  int level = 0;
  long long core_size = 0;
  long long t_level = 0;
  SampleLedger ledger;
};

// Validates the call discipline recorded in a trace: recurse/return rows nest
// like a call stack; a frame only recurses after a test failure and then
// descends one level at a time down to its own level + 1; refits happen in
// the frame being exited and only once its recursion obligations are done.
// Returns true when the trace is consistent; `reason`, when supplied,
// receives a description of the first violation.
bool check_recursion_order(const std::vector<RvfsTraceRow>& trace,
                           std::string* reason = nullptr);

struct RvfsResult {
  // v_hat_ids[l] indexes the value-class member fitted for level l (1-based;
  // entry 0 unused); -1 means never fitted, treated as identically zero.
  std::vector<int> v_hat_ids;
  std::vector<std::vector<CorePair>> core;  // [level]; entry 0 unused
  std::vector<long long> t;                 // per-level test counters
  long long refit_count = 0;
  long long restart_count = 0;
  std::vector<std::string> budget_violations;
  std::vector<RvfsTraceRow> trace;
  SampleLedger ledger;
};

// Largest |phat[vhat] - phat[f]| at (level, state, action) over the
// confidence set of the level, with fresh estimates per member. Exposed for
// unit tests; `data_states` are the regression draws defining the set (empty
// = the whole class).
struct TestSupResult {
  double sup = 0.0;
  int argmax_member = -1;
  long long confidence_size = 0;
};
TestSupResult rvfs_test_sup(LocalSimSession& session, const FiniteVClass& vclass,
                            int level, int state, int action, int vhat_id,
                            const std::vector<int>& data_states,
                            double eps_reg_sq, const RvfsEngineConfig& cfg);

// Full run of the shared engine from level 0.
RvfsResult run_rvfs_engine(LocalSimSession& session, const FiniteVClass& vclass,
                           const RvfsParams& params,
                           const RvfsEngineConfig& cfg);

// Plain variant: greedy rollouts, test discrepancy eps, backups at
// (eps, delta').
RvfsResult rvfs(LocalSimSession& session, const FiniteVClass& vclass,
                const RvfsParams& params);

// Non-executable reference: the exact-model greedy policy of the fitted
// values (continuation of level l read from v_hat_ids[l]).
PolicyTable exact_greedy_policy(const TabularMDP& m, const FiniteVClass& vclass,
                                const std::vector<int>& v_hat_ids);

// Rounded-bin counterpart used by the exogenous-noise variant.
PolicyTable exact_rounded_policy(const TabularMDP& m, const FiniteVClass& vclass,
                                 const std::vector<int>& v_hat_ids,
                                 double eps_round,
                                 const std::vector<double>& zeta);

struct RvfsBcResult {
  RvfsResult search;
  int cloned_index = -1;
  PolicyTable policy;
  std::vector<long long> mistakes;
  SampleLedger ledger;
};

// Runs the plain variant at accuracy eps / (48 H), then clones the
// backup-greedy expert over the policy class with a fresh trajectory corpus.
// A positive n_bc_override replaces the cloning sample formula.
RvfsBcResult rvfs_bc(LocalSimSession& session, const FiniteVClass& vclass,
                     const FinitePolicyClass& policy_class, double eps,
                     double delta, double c_push, double scale,
                     const RvfsOverrides& overrides = {},
                     long long n_bc_override = 0);

}  // namespace simlab
