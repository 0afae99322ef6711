#pragma once

#include <string>
#include <vector>

#include "simlab/mdp.hpp"
#include "simlab/rng.hpp"
#include "simlab/value_tables.hpp"

namespace simlab {

// Finite function classes with stable integer ids (the id of a member is its
// index). Classes are immutable after construction.

struct FiniteQClass {
  std::vector<QTable> members;
  std::string origin;  // "hand-built" | "exbmdp-induced" | "discretized"
  std::size_t size() const { return members.size(); }
};

struct FiniteVClass {
  std::vector<VTable> members;
  std::string origin;
  std::size_t size() const { return members.size(); }
};

// Decoders map each observation id to a latent state id, per layer:
// members[i][h][obs] -> latent. true_index marks the ground-truth decoder.
struct DecoderClass {
  std::vector<std::vector<std::vector<int>>> members;
  int true_index = -1;
  std::size_t size() const { return members.size(); }
};

struct FinitePolicyClass {
  std::vector<PolicyTable> members;
  std::size_t size() const { return members.size(); }
};

// Latent tables used for injection into induced classes.
using LatentQTable = std::vector<std::vector<std::vector<double>>>;  // [h][s][a]
using LatentVTable = std::vector<std::vector<double>>;               // [h][s]

// Induced Q-class over observations: for every decoder phi and every sampled
// latent grid table g, the member (h, x, a) -> g[h][phi_h(x)][a]. Grid values
// live on {0, grid_step, ..., H}; grid_step must divide H evenly. When
// inject_latent_q is given, the member induced by the true decoder from that
// exact table is appended, making it realizable with zero tolerance.
FiniteQClass build_exbmdp_q_class(const DecoderClass& decoders, int S, int A,
                                  int H, double grid_step, int budget, Rng rng,
                                  const LatentQTable* inject_latent_q);

FiniteVClass build_exbmdp_v_class(const DecoderClass& decoders, int S, int H,
                                  double grid_step, int budget, Rng rng,
                                  const LatentVTable* inject_latent_v);

// Deterministic observation policies induced by decoders and latent action
// tables. When the number of latent action tables A^(S*H) is at most
// max_exhaustive they are all enumerated per decoder; otherwise `budget`
// seeded tables are sampled per decoder.
FinitePolicyClass build_endogenous_policy_class(const DecoderClass& decoders,
                                                int S, int A, int H,
                                                int num_obs_per_layer,
                                                long long max_exhaustive,
                                                int budget, Rng rng);

// True iff some member is within sup-norm `tol` of the target at every layer.
bool check_qstar_realizable(const FiniteQClass& cls, const QTable& qstar,
                            double tol);

// True iff for every policy in `policies`, some member of `cls` is within
// sup-norm `tol` of that policy's exact value function.
bool check_vpi_realizable(const FiniteVClass& cls, const TabularMDP& m,
                          const FinitePolicyClass& policies, double tol);

}  // namespace simlab
