#pragma once

#include <cstdint>
#include <vector>

#include "simlab/classes.hpp"
#include "simlab/mdp.hpp"

namespace simlab {

// Exogenous block MDP: a controlled endogenous chain over S latent states and
// an action-independent exogenous chain over Xi noise states, observed
// through an injective deterministic pairing. Rewards depend on observations
// only through the endogenous latent.
struct ExBMDPSpec {
  int S = 0;
  int Xi = 0;
  int A = 0;
  int H = 0;
  std::vector<double> endo_init;                                   // over S
  std::vector<std::vector<std::vector<std::vector<double>>>> t_endo;  // [h][s][a][s']
  std::vector<double> exo_init;                                    // over Xi
  std::vector<std::vector<std::vector<double>>> t_exo;             // [h][xi][xi']
  std::vector<std::vector<std::vector<double>>> rewards;           // [h][s][a]
  RewardLaw reward_law = RewardLaw::bernoulli_mean;
  double lambda = 0.0;      // exogenous stickiness used at generation
  double target_gap = 0.0;  // 0 = no gap shaping requested

  // Emission: observation id of (s, xi) at every layer.
  int obs_count() const { return S * Xi; }
  int obs_of(int s, int xi) const { return s * Xi + xi; }
  int latent_of(int obs) const { return obs / Xi; }  // the true decoder
  int exo_of(int obs) const { return obs % Xi; }

  void validate() const;
};

struct GeneratorTargets {
  int S = 2;
  int Xi = 2;
  int A = 2;
  int H = 2;
  double lambda = 0.0;  // exo kernel = lambda * identity + (1-lambda) * uniform
  double gap = 0.0;     // requested exact action gap; must be <= 1
  RewardLaw law = RewardLaw::bernoulli_mean;
  int num_distractor_decoders = 2;
};

struct GeneratedInstance {
  ExBMDPSpec spec;
  DecoderClass decoders;  // true decoder plus seeded distractors
};

// Random instance from targets. The exogenous chain is the
// lambda-identity/uniform mixture with a uniform initial distribution
// (lambda = 0 gives an i.i.d. chain). When gap > 0 and S > 1, rewards are
// gap * 1{a = preferred action}, which makes every optimal action gap
// exactly `gap` at every latent state and layer. When S == 1 rewards are
// constant (every policy optimal). Distractor decoders disagree with the
// true decoder on at least 25% of observations per layer.
GeneratedInstance generate_exbmdp(const GeneratorTargets& targets,
                                  std::uint64_t seed);

// Observation-level tabular MDP with product dynamics pushed through the
// emission. Throws when S * Xi exceeds max_obs_per_layer.
TabularMDP flatten(const ExBMDPSpec& spec, int max_obs_per_layer = 4096);

// Exact optimal latent Q/V tables of the endogenous chain (backward
// induction), used for injecting realizable members into induced classes.
LatentQTable latent_qstar(const ExBMDPSpec& spec);
LatentVTable latent_vstar(const ExBMDPSpec& spec);

}  // namespace simlab
