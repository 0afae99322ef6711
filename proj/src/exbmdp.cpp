#include "simlab/exbmdp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace simlab {

namespace {

void check_row(const std::vector<double>& row, int n, const char* where) {
  if (static_cast<int>(row.size()) != n)
    throw validation_error(std::string(where) + ": row size mismatch");
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0) throw validation_error(std::string(where) + ": negative entry");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw validation_error(std::string(where) + ": row does not sum to 1");
}

std::vector<double> random_prob_row(Rng& rng, int n) {
  std::vector<double> row(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    row[i] = 0.1 + rng.next_double();
    sum += row[i];
  }
  for (int i = 0; i < n; ++i) row[i] /= sum;
  return row;
}

}  // namespace

void ExBMDPSpec::validate() const {
  if (S < 1 || Xi < 1 || A < 1 || H < 1)
    throw validation_error("exbmdp: S, Xi, A, H must all be positive");
  check_row(endo_init, S, "endo_init");
  check_row(exo_init, Xi, "exo_init");
  if (static_cast<int>(t_endo.size()) != H - 1 ||
      static_cast<int>(t_exo.size()) != H - 1)
    throw validation_error("exbmdp: chains must cover layers 0..H-2");
  for (int h = 0; h + 1 < H; ++h) {
    if (static_cast<int>(t_endo[h].size()) != S)
      throw validation_error("exbmdp: endo table size mismatch");
    for (int s = 0; s < S; ++s) {
      if (static_cast<int>(t_endo[h][s].size()) != A)
        throw validation_error("exbmdp: endo action size mismatch");
      for (int a = 0; a < A; ++a) check_row(t_endo[h][s][a], S, "t_endo");
    }
    if (static_cast<int>(t_exo[h].size()) != Xi)
      throw validation_error("exbmdp: exo table size mismatch");
    for (int xi = 0; xi < Xi; ++xi) check_row(t_exo[h][xi], Xi, "t_exo");
  }
  if (static_cast<int>(rewards.size()) != H)
    throw validation_error("exbmdp: rewards must cover every layer");
  for (int h = 0; h < H; ++h) {
    if (static_cast<int>(rewards[h].size()) != S)
      throw validation_error("exbmdp: reward latent size mismatch");
    for (int s = 0; s < S; ++s) {
      if (static_cast<int>(rewards[h][s].size()) != A)
        throw validation_error("exbmdp: reward action size mismatch");
      for (int a = 0; a < A; ++a)
        if (rewards[h][s][a] < 0.0 || rewards[h][s][a] > 1.0)
          throw validation_error("exbmdp: rewards must lie in [0, 1]");
    }
  }
}

GeneratedInstance generate_exbmdp(const GeneratorTargets& t, std::uint64_t seed) {
  if (t.S < 1 || t.Xi < 1 || t.A < 1 || t.H < 1)
    throw config_error("generate_exbmdp: targets must be positive");
  if (t.lambda < 0.0 || t.lambda > 1.0)
    throw config_error("generate_exbmdp: lambda must lie in [0, 1]");
  if (t.gap > 1.0)
    throw config_error("generate_exbmdp: requested gap exceeds 1, rewards cannot stay in [0, 1]");
  if (t.gap < 0.0) throw config_error("generate_exbmdp: gap must be nonnegative");
  if (t.num_distractor_decoders < 0)
    throw config_error("generate_exbmdp: distractor count must be nonnegative");
  if (t.S == 1 && t.num_distractor_decoders > 0)
    throw config_error(
        "generate_exbmdp: distractor decoders need at least two latent states "
        "to disagree with the truth");

  Rng root(seed);
  Rng rng_endo = root.substream("endo");
  Rng rng_reward = root.substream("reward");
  Rng rng_decoder = root.substream("decoder");

  ExBMDPSpec spec;
  spec.S = t.S;
  spec.Xi = t.Xi;
  spec.A = t.A;
  spec.H = t.H;
  spec.reward_law = t.law;
  spec.lambda = t.lambda;
  spec.target_gap = (t.S > 1) ? t.gap : 0.0;

  spec.endo_init = random_prob_row(rng_endo, t.S);
  spec.t_endo.resize(t.H - 1);
  for (int h = 0; h + 1 < t.H; ++h) {
    spec.t_endo[h].resize(t.S);
    for (int s = 0; s < t.S; ++s) {
      spec.t_endo[h][s].resize(t.A);
      for (int a = 0; a < t.A; ++a)
        spec.t_endo[h][s][a] = random_prob_row(rng_endo, t.S);
    }
  }

  spec.exo_init.assign(t.Xi, 1.0 / t.Xi);
  spec.t_exo.resize(t.H - 1);
  const double u = (1.0 - t.lambda) / t.Xi;
  for (int h = 0; h + 1 < t.H; ++h) {
    spec.t_exo[h].resize(t.Xi);
    for (int xi = 0; xi < t.Xi; ++xi) {
      spec.t_exo[h][xi].assign(t.Xi, u);
      spec.t_exo[h][xi][xi] += t.lambda;
    }
  }

  spec.rewards.resize(t.H);
  for (int h = 0; h < t.H; ++h) {
    spec.rewards[h].resize(t.S);
    for (int s = 0; s < t.S; ++s) spec.rewards[h][s].resize(t.A);
  }
  if (t.S == 1) {
    // A single latent state makes every policy optimal; gap shaping is
    // meaningless, so rewards are action-independent.
    for (int h = 0; h < t.H; ++h)
      for (int a = 0; a < t.A; ++a) spec.rewards[h][0][a] = 0.5;
  } else if (t.gap > 0.0) {
    // With rewards gap * 1{a = preferred}, backward induction gives
    // V_h(s) = (H - h) * gap for every s, so each Q gap is exactly `gap`.
    for (int h = 0; h < t.H; ++h)
      for (int s = 0; s < t.S; ++s) {
        int preferred = rng_reward.uniform_int(t.A);
        for (int a = 0; a < t.A; ++a)
          spec.rewards[h][s][a] = (a == preferred) ? t.gap : 0.0;
      }
  } else {
    for (int h = 0; h < t.H; ++h)
      for (int s = 0; s < t.S; ++s)
        for (int a = 0; a < t.A; ++a)
          spec.rewards[h][s][a] = rng_reward.next_double();
  }
  spec.validate();

  DecoderClass decoders;
  const int n_obs = spec.obs_count();
  std::vector<std::vector<int>> truth(t.H, std::vector<int>(n_obs));
  for (int h = 0; h < t.H; ++h)
    for (int obs = 0; obs < n_obs; ++obs) truth[h][obs] = spec.latent_of(obs);
  decoders.members.push_back(truth);
  decoders.true_index = 0;

  const int min_disagree = (n_obs + 3) / 4;  // at least 25% of observations
  for (int d = 0; d < t.num_distractor_decoders; ++d) {
    std::vector<std::vector<int>> member = truth;
    for (int h = 0; h < t.H; ++h) {
      for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<int> layer = truth[h];
        std::vector<int> order(n_obs);
        for (int i = 0; i < n_obs; ++i) order[i] = i;
        for (int i = n_obs - 1; i > 0; --i)
          std::swap(order[i], order[rng_decoder.uniform_int(i + 1)]);
        for (int i = 0; i < min_disagree; ++i) {
          int obs = order[i];
          int shift = 1 + rng_decoder.uniform_int(t.S - 1);
          layer[obs] = (layer[obs] + shift) % t.S;
        }
        std::set<int> image(layer.begin(), layer.end());
        if (static_cast<int>(image.size()) == t.S) {
          member[h] = layer;
          break;
        }
        if (attempt == 199)
          throw config_error("generate_exbmdp: could not build a surjective distractor decoder");
      }
    }
    decoders.members.push_back(member);
  }
  return {spec, decoders};
}

TabularMDP flatten(const ExBMDPSpec& spec, int max_obs_per_layer) {
  spec.validate();
  const int n_obs = spec.obs_count();
  if (n_obs > max_obs_per_layer) {
    std::ostringstream os;
    os << "flatten: " << n_obs << " observations per layer exceeds the budget "
       << max_obs_per_layer;
    throw config_error(os.str());
  }
  TabularMDP m;
  m.horizon = spec.H;
  m.states_per_layer.assign(spec.H, n_obs);
  m.num_actions = spec.A;
  m.reward_law = spec.reward_law;
  m.init_dist.resize(n_obs);
  for (int obs = 0; obs < n_obs; ++obs)
    m.init_dist[obs] =
        spec.endo_init[spec.latent_of(obs)] * spec.exo_init[spec.exo_of(obs)];
  m.transitions.resize(spec.H - 1);
  for (int h = 0; h + 1 < spec.H; ++h) {
    m.transitions[h].resize(n_obs);
    for (int obs = 0; obs < n_obs; ++obs) {
      const int s = spec.latent_of(obs);
      const int xi = spec.exo_of(obs);
      m.transitions[h][obs].resize(spec.A);
      for (int a = 0; a < spec.A; ++a) {
        std::vector<double> row(n_obs);
        for (int next = 0; next < n_obs; ++next)
          row[next] = spec.t_endo[h][s][a][spec.latent_of(next)] *
                      spec.t_exo[h][xi][spec.exo_of(next)];
        m.transitions[h][obs][a] = std::move(row);
      }
    }
  }
  m.reward_means.resize(spec.H);
  for (int h = 0; h < spec.H; ++h) {
    m.reward_means[h].resize(n_obs);
    for (int obs = 0; obs < n_obs; ++obs)
      m.reward_means[h][obs] = spec.rewards[h][spec.latent_of(obs)];
  }
  m.validate();
  return m;
}

LatentQTable latent_qstar(const ExBMDPSpec& spec) {
  LatentQTable q(spec.H);
  std::vector<double> v_next(spec.S, 0.0);
  for (int h = spec.H - 1; h >= 0; --h) {
    q[h].assign(spec.S, std::vector<double>(spec.A, 0.0));
    std::vector<double> v(spec.S, 0.0);
    for (int s = 0; s < spec.S; ++s) {
      double best = 0.0;
      for (int a = 0; a < spec.A; ++a) {
        double val = spec.rewards[h][s][a];
        if (h + 1 < spec.H)
          for (int ns = 0; ns < spec.S; ++ns)
            val += spec.t_endo[h][s][a][ns] * v_next[ns];
        q[h][s][a] = val;
        if (a == 0 || val > best) best = val;
      }
      v[s] = best;
    }
    v_next = std::move(v);
  }
  return q;
}

LatentVTable latent_vstar(const ExBMDPSpec& spec) {
  LatentQTable q = latent_qstar(spec);
  LatentVTable v(spec.H, std::vector<double>(spec.S, 0.0));
  for (int h = 0; h < spec.H; ++h)
    for (int s = 0; s < spec.S; ++s)
      v[h][s] = *std::max_element(q[h][s].begin(), q[h][s].end());
  return v;
}

}  // namespace simlab
