#include "simlab/classes.hpp"

#include <cmath>
#include <cstdint>

#include "simlab/errors.hpp"
#include "simlab/oracle.hpp"

namespace simlab {

namespace {

int grid_levels(int H, double grid_step) {
  if (!(grid_step > 0.0))
    throw config_error("induced class: grid step must be positive");
  const double ratio = H / grid_step;
  const long long levels = std::llround(ratio);
  if (std::fabs(ratio - static_cast<double>(levels)) > 1e-9)
    throw config_error("induced class: grid step must divide the horizon");
  return static_cast<int>(levels) + 1;  // {0, step, ..., H}
}

void check_decoders(const DecoderClass& decoders, int S, int H) {
  if (decoders.members.empty())
    throw config_error("induced class: decoder class is empty");
  for (const auto& member : decoders.members) {
    if (static_cast<int>(member.size()) != H)
      throw config_error("induced class: decoder horizon mismatch");
    for (const auto& layer : member) {
      if (layer.empty()) throw config_error("induced class: decoder layer empty");
      for (int latent : layer)
        if (latent < 0 || latent >= S)
          throw config_error("induced class: decoder output outside latent range");
    }
  }
}

}  // namespace

FiniteQClass build_exbmdp_q_class(const DecoderClass& decoders, int S, int A,
                                  int H, double grid_step, int budget, Rng rng,
                                  const LatentQTable* inject_latent_q) {
  check_decoders(decoders, S, H);
  if (budget < 1)
    throw config_error("induced class: budget must be at least one table");
  const int levels = grid_levels(H, grid_step);

  std::vector<LatentQTable> tables;
  tables.reserve(budget);
  for (int b = 0; b < budget; ++b) {
    LatentQTable g(H);
    for (int h = 0; h < H; ++h) {
      g[h].assign(S, std::vector<double>(A, 0.0));
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          g[h][s][a] = grid_step * rng.uniform_int(levels);
    }
    tables.push_back(std::move(g));
  }

  auto induce = [&](const std::vector<std::vector<int>>& phi,
                    const LatentQTable& g) {
    QTable q;
    q.q.resize(H);
    for (int h = 0; h < H; ++h) {
      const int n_obs = static_cast<int>(phi[h].size());
      q.q[h].assign(n_obs, std::vector<double>(A, 0.0));
      for (int obs = 0; obs < n_obs; ++obs) q.q[h][obs] = g[h][phi[h][obs]];
    }
    return q;
  };

  FiniteQClass cls;
  cls.origin = "exbmdp-induced";
  for (const auto& phi : decoders.members)
    for (const auto& g : tables) cls.members.push_back(induce(phi, g));
  if (inject_latent_q != nullptr) {
    if (static_cast<int>(inject_latent_q->size()) != H)
      throw config_error("induced class: injected table horizon mismatch");
    if (decoders.true_index < 0 ||
        decoders.true_index >= static_cast<int>(decoders.size()))
      throw config_error("induced class: injection needs a true decoder index");
    cls.members.push_back(
        induce(decoders.members[decoders.true_index], *inject_latent_q));
  }
  return cls;
}

FiniteVClass build_exbmdp_v_class(const DecoderClass& decoders, int S, int H,
                                  double grid_step, int budget, Rng rng,
                                  const LatentVTable* inject_latent_v) {
  check_decoders(decoders, S, H);
  if (budget < 1)
    throw config_error("induced class: budget must be at least one table");
  const int levels = grid_levels(H, grid_step);

  std::vector<LatentVTable> tables;
  tables.reserve(budget);
  for (int b = 0; b < budget; ++b) {
    LatentVTable g(H, std::vector<double>(S, 0.0));
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s) g[h][s] = grid_step * rng.uniform_int(levels);
    tables.push_back(std::move(g));
  }

  auto induce = [&](const std::vector<std::vector<int>>& phi,
                    const LatentVTable& g) {
    VTable v;
    v.v.resize(H);
    for (int h = 0; h < H; ++h) {
      const int n_obs = static_cast<int>(phi[h].size());
      v.v[h].assign(n_obs, 0.0);
      for (int obs = 0; obs < n_obs; ++obs) v.v[h][obs] = g[h][phi[h][obs]];
    }
    return v;
  };

  FiniteVClass cls;
  cls.origin = "exbmdp-induced";
  for (const auto& phi : decoders.members)
    for (const auto& g : tables) cls.members.push_back(induce(phi, g));
  if (inject_latent_v != nullptr) {
    if (static_cast<int>(inject_latent_v->size()) != H)
      throw config_error("induced class: injected table horizon mismatch");
    if (decoders.true_index < 0 ||
        decoders.true_index >= static_cast<int>(decoders.size()))
      throw config_error("induced class: injection needs a true decoder index");
    cls.members.push_back(
        induce(decoders.members[decoders.true_index], *inject_latent_v));
  }
  return cls;
}

FinitePolicyClass build_endogenous_policy_class(const DecoderClass& decoders,
                                                int S, int A, int H,
                                                int num_obs_per_layer,
                                                long long max_exhaustive,
                                                int budget, Rng rng) {
  check_decoders(decoders, S, H);
  for (const auto& member : decoders.members)
    for (const auto& layer : member)
      if (static_cast<int>(layer.size()) != num_obs_per_layer)
        throw config_error("policy class: decoder layer size mismatch");

  const int sites = S * H;
  double total_d = std::pow(static_cast<double>(A), static_cast<double>(sites));
  const bool exhaustive = total_d <= static_cast<double>(max_exhaustive);

  // Latent action table for enumeration index t: site (h, s) has digit
  // (t / A^(h*S+s)) % A.
  auto table_from_index = [&](std::uint64_t t) {
    std::vector<std::vector<int>> table(H, std::vector<int>(S, 0));
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s) {
        table[h][s] = static_cast<int>(t % A);
        t /= A;
      }
    return table;
  };

  std::vector<std::vector<std::vector<int>>> tables;
  if (exhaustive) {
    const auto total = static_cast<std::uint64_t>(total_d);
    for (std::uint64_t t = 0; t < total; ++t) tables.push_back(table_from_index(t));
  } else {
    if (budget < 1)
      throw config_error("policy class: budget must be at least one table");
    for (int b = 0; b < budget; ++b) {
      std::vector<std::vector<int>> table(H, std::vector<int>(S, 0));
      for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) table[h][s] = rng.uniform_int(A);
      tables.push_back(std::move(table));
    }
  }

  FinitePolicyClass cls;
  for (const auto& phi : decoders.members)
    for (const auto& table : tables) {
      PolicyTable pi;
      pi.deterministic = true;
      pi.rows.resize(H);
      for (int h = 0; h < H; ++h) {
        pi.rows[h].assign(num_obs_per_layer, std::vector<double>(A, 0.0));
        for (int obs = 0; obs < num_obs_per_layer; ++obs)
          pi.rows[h][obs][table[h][phi[h][obs]]] = 1.0;
      }
      cls.members.push_back(std::move(pi));
    }
  return cls;
}

namespace {

bool within_sup_norm(const QTable& a, const QTable& b, double tol) {
  if (a.q.size() != b.q.size()) throw validation_error("q-table shape mismatch");
  for (std::size_t h = 0; h < a.q.size(); ++h) {
    if (a.q[h].size() != b.q[h].size())
      throw validation_error("q-table shape mismatch");
    for (std::size_t x = 0; x < a.q[h].size(); ++x) {
      if (a.q[h][x].size() != b.q[h][x].size())
        throw validation_error("q-table shape mismatch");
      for (std::size_t i = 0; i < a.q[h][x].size(); ++i)
        if (std::fabs(a.q[h][x][i] - b.q[h][x][i]) > tol) return false;
    }
  }
  return true;
}

bool within_sup_norm(const VTable& a, const VTable& b, double tol) {
  if (a.v.size() != b.v.size()) throw validation_error("v-table shape mismatch");
  for (std::size_t h = 0; h < a.v.size(); ++h) {
    if (a.v[h].size() != b.v[h].size())
      throw validation_error("v-table shape mismatch");
    for (std::size_t x = 0; x < a.v[h].size(); ++x)
      if (std::fabs(a.v[h][x] - b.v[h][x]) > tol) return false;
  }
  return true;
}

}  // namespace

bool check_qstar_realizable(const FiniteQClass& cls, const QTable& qstar,
                            double tol) {
  for (const auto& member : cls.members)
    if (within_sup_norm(member, qstar, tol)) return true;
  return false;
}

bool check_vpi_realizable(const FiniteVClass& cls, const TabularMDP& m,
                          const FinitePolicyClass& policies, double tol) {
  for (const auto& pi : policies.members) {
    const PolicyEvalResult eval = policy_eval(m, pi);
    bool found = false;
    for (const auto& member : cls.members)
      if (within_sup_norm(member, eval.vpi, tol)) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

}  // namespace simlab
