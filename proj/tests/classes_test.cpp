// Tests for finite function classes induced by decoders: grid discretization,
// member counts and ordering, exact injection of realizable members,
// exhaustive policy enumeration, and realizability checks.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "simlab/classes.hpp"
#include "simlab/errors.hpp"
#include "simlab/exbmdp.hpp"
#include "simlab/mdp.hpp"
#include "simlab/oracle.hpp"
#include "simlab/rng.hpp"

using namespace simlab;

namespace {

// Deterministic two-layer chain as a block MDP with one noise state.
ExBMDPSpec chain_spec() {
  ExBMDPSpec spec;
  spec.S = 2;
  spec.Xi = 1;
  spec.A = 2;
  spec.H = 2;
  spec.endo_init = {1.0, 0.0};
  spec.t_endo = {{{{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}}};
  spec.exo_init = {1.0};
  spec.t_exo = {{{1.0}}};
  spec.rewards = {{{0.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {1.0, 1.0}}};
  spec.reward_law = RewardLaw::deterministic_mean;
  spec.validate();
  return spec;
}

DecoderClass truth_only(const ExBMDPSpec& spec) {
  DecoderClass d;
  d.true_index = 0;
  d.members.resize(1);
  d.members[0].resize(spec.H);
  for (int h = 0; h < spec.H; ++h) {
    d.members[0][h].resize(spec.obs_count());
    for (int o = 0; o < spec.obs_count(); ++o)
      d.members[0][h][o] = spec.latent_of(o);
  }
  return d;
}

bool on_grid(double v, double step, double top) {
  if (v < -1e-12 || v > top + 1e-12) return false;
  const double ratio = v / step;
  return std::abs(ratio - std::llround(ratio)) <= 1e-9;
}

}  // namespace

TEST_CASE("induced value classes reject invalid grids and budgets") {
  const ExBMDPSpec spec = chain_spec();
  const DecoderClass dec = truth_only(spec);
  Rng rng(1);
  CHECK_THROWS_AS(build_exbmdp_q_class(dec, spec.S, spec.A, spec.H, 0.3, 2,
                                       rng, nullptr),
                  config_error);  // 2 / 0.3 is not an integer
  CHECK_THROWS_AS(build_exbmdp_q_class(dec, spec.S, spec.A, spec.H, 0.25, 0,
                                       rng, nullptr),
                  config_error);
  CHECK_THROWS_AS(build_exbmdp_v_class(dec, spec.S, spec.H, 0.25, 0, rng,
                                       nullptr),
                  config_error);
}

TEST_CASE("induced Q-class members live on the grid and broadcast latents") {
  const ExBMDPSpec spec = chain_spec();
  const DecoderClass dec = truth_only(spec);
  Rng rng(5);
  const FiniteQClass cls =
      build_exbmdp_q_class(dec, spec.S, spec.A, spec.H, 0.25, 4, rng, nullptr);
  CHECK(cls.size() == 4);  // one decoder, four sampled tables, no injection
  for (const QTable& member : cls.members) {
    REQUIRE(static_cast<int>(member.q.size()) == spec.H);
    for (int h = 0; h < spec.H; ++h)
      for (int o = 0; o < spec.obs_count(); ++o)
        for (int a = 0; a < spec.A; ++a) {
          CHECK(on_grid(member.q[h][o][a], 0.25, 2.0));
          // Same latent state -> same value under the inducing decoder.
          const int mate = spec.obs_of(spec.latent_of(o), 0);
          CHECK(member.q[h][o][a] == member.q[h][mate][a]);
        }
  }
}

TEST_CASE("injection appends an exactly realizable member last") {
  const ExBMDPSpec spec = chain_spec();
  const DecoderClass dec = truth_only(spec);
  const TabularMDP flat = flatten(spec);
  const ValueIterationResult vi = value_iteration(flat);
  const LatentQTable latent_q = latent_qstar(spec);
  Rng rng(9);
  const FiniteQClass cls = build_exbmdp_q_class(dec, spec.S, spec.A, spec.H,
                                                0.25, 3, rng, &latent_q);
  CHECK(cls.size() == 4);  // 1 decoder * 3 tables + 1 injected
  const QTable& inj = cls.members.back();
  for (int h = 0; h < spec.H; ++h)
    for (int o = 0; o < spec.obs_count(); ++o)
      for (int a = 0; a < spec.A; ++a)
        CHECK(inj.q[h][o][a] == latent_q[h][spec.latent_of(o)][a]);
  // On this deterministic dyadic instance the injected member equals the
  // optimal table bit for bit.
  CHECK(check_qstar_realizable(cls, vi.qstar, 0.0));

  // A class of zero tables is not realizable for a nonzero target.
  FiniteQClass zeros;
  zeros.members.push_back(inj);
  for (auto& layer : zeros.members[0].q)
    for (auto& state : layer)
      for (double& v : state) v = 0.0;
  CHECK_FALSE(check_qstar_realizable(zeros, vi.qstar, 0.0));
  CHECK(check_qstar_realizable(zeros, vi.qstar, 1.0));  // sup gap is exactly 1
}

TEST_CASE("induced V-class injection mirrors the Q-class behavior") {
  const ExBMDPSpec spec = chain_spec();
  const DecoderClass dec = truth_only(spec);
  const LatentVTable latent_v = latent_vstar(spec);
  Rng rng(11);
  const FiniteVClass cls =
      build_exbmdp_v_class(dec, spec.S, spec.H, 0.5, 2, rng, &latent_v);
  CHECK(cls.size() == 3);
  const VTable& inj = cls.members.back();
  for (int h = 0; h < spec.H; ++h)
    for (int o = 0; o < spec.obs_count(); ++o)
      CHECK(inj.v[h][o] == latent_v[h][spec.latent_of(o)]);
  for (const VTable& member : cls.members)
    for (int h = 0; h < spec.H; ++h)
      for (int o = 0; o < spec.obs_count(); ++o)
        CHECK(on_grid(member.v[h][o], 0.5, 2.0));
}

TEST_CASE("class construction is deterministic in the generator key") {
  const ExBMDPSpec spec = chain_spec();
  const DecoderClass dec = truth_only(spec);
  const FiniteQClass a = build_exbmdp_q_class(dec, spec.S, spec.A, spec.H,
                                              0.25, 5, Rng(77), nullptr);
  const FiniteQClass b = build_exbmdp_q_class(dec, spec.S, spec.A, spec.H,
                                              0.25, 5, Rng(77), nullptr);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.members[i].q == b.members[i].q);
}

TEST_CASE("generated decoder families scale the class size multiplicatively") {
  GeneratorTargets t;
  t.S = 2;
  t.Xi = 2;
  t.A = 2;
  t.H = 2;
  t.num_distractor_decoders = 2;
  const GeneratedInstance gi = generate_exbmdp(t, 3);
  REQUIRE(gi.decoders.size() == 3);
  Rng rng(13);
  const LatentQTable latent_q = latent_qstar(gi.spec);
  const FiniteQClass cls = build_exbmdp_q_class(
      gi.decoders, gi.spec.S, gi.spec.A, gi.spec.H, 0.25, 2, rng, &latent_q);
  CHECK(cls.size() == 3 * 2 + 1);
  // Members come out decoder-major, so the first two are induced by the true
  // decoder and must agree across observations with the same latent state.
  for (int i = 0; i < 2; ++i)
    for (int h = 0; h < gi.spec.H; ++h)
      for (int o = 0; o < gi.spec.obs_count(); ++o)
        for (int o2 = 0; o2 < gi.spec.obs_count(); ++o2)
          if (gi.spec.latent_of(o) == gi.spec.latent_of(o2))
            for (int a = 0; a < gi.spec.A; ++a)
              CHECK(cls.members[i].q[h][o][a] == cls.members[i].q[h][o2][a]);
}

TEST_CASE("exhaustive policy classes enumerate every latent action table") {
  const ExBMDPSpec spec = chain_spec();
  const DecoderClass dec = truth_only(spec);
  Rng rng(17);
  const FinitePolicyClass cls = build_endogenous_policy_class(
      dec, spec.S, spec.A, spec.H, spec.obs_count(), 100, 4, rng);
  CHECK(cls.size() == 16);  // 2 actions ^ (2 latents * 2 layers)
  // Members follow little-endian digits over (layer, latent) slots.
  for (int t = 0; t < 16; ++t) {
    const PolicyTable& pi = cls.members[t];
    CHECK(pi.deterministic);
    for (int h = 0; h < spec.H; ++h)
      for (int o = 0; o < spec.obs_count(); ++o) {
        const int s = spec.latent_of(o);
        int power = 1;
        for (int k = 0; k < h * spec.S + s; ++k) power *= spec.A;
        CHECK(pi.action_at(h, o) == (t / power) % spec.A);
      }
  }
  // All members are distinct policies.
  std::set<std::vector<int>> seen;
  for (const PolicyTable& pi : cls.members) {
    std::vector<int> key;
    for (int h = 0; h < spec.H; ++h)
      for (int o = 0; o < spec.obs_count(); ++o)
        key.push_back(pi.action_at(h, o));
    seen.insert(key);
  }
  CHECK(seen.size() == 16);
}

TEST_CASE("policy classes fall back to sampled tables past the cap") {
  const ExBMDPSpec spec = chain_spec();
  const DecoderClass dec = truth_only(spec);
  Rng rng(19);
  const FinitePolicyClass cls = build_endogenous_policy_class(
      dec, spec.S, spec.A, spec.H, spec.obs_count(), 8, 5, rng);
  CHECK(cls.size() == 5);  // budget per decoder once 16 > 8
  for (const PolicyTable& pi : cls.members) {
    CHECK(pi.deterministic);
    // Broadcast property still holds for sampled tables.
    for (int h = 0; h < spec.H; ++h)
      CHECK(pi.action_at(h, 0) == pi.action_at(h, spec.obs_of(0, 0)));
  }
  Rng rng2(19);
  CHECK_THROWS_AS(build_endogenous_policy_class(dec, spec.S, spec.A, spec.H,
                                                spec.obs_count(), 8, 0, rng2),
                  config_error);
}

TEST_CASE("value realizability over a policy set") {
  const ExBMDPSpec spec = chain_spec();
  const TabularMDP flat = flatten(spec);
  const ValueIterationResult vi = value_iteration(flat);
  FinitePolicyClass only_optimal;
  only_optimal.members.push_back(vi.pistar);

  FiniteVClass cls;
  VTable vstar_table = vi.vstar;
  cls.members.push_back(vstar_table);
  CHECK(check_vpi_realizable(cls, flat, only_optimal, 0.0));

  FiniteVClass zeros;
  zeros.members.push_back(vstar_table);
  for (auto& layer : zeros.members[0].v)
    for (double& v : layer) v = 0.0;
  CHECK_FALSE(check_vpi_realizable(zeros, flat, only_optimal, 0.5));
  CHECK(check_vpi_realizable(zeros, flat, only_optimal, 1.0));
}
