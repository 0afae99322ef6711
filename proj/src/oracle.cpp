#include "simlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "simlab/errors.hpp"

namespace simlab {

namespace {

void check_layer(const TabularMDP& m, int layer, const char* who) {
  if (layer < 0 || layer >= m.horizon) {
    std::ostringstream os;
    os << who << ": layer " << layer << " outside [0, " << m.horizon << ")";
    throw validation_error(os.str());
  }
}

}  // namespace

ValueIterationResult value_iteration(const TabularMDP& m) {
  m.validate();
  ValueIterationResult out;
  out.qstar.q.resize(m.horizon);
  out.vstar.v.resize(m.horizon);
  std::vector<std::vector<int>> actions(m.horizon);
  std::vector<double> v_next;  // values of layer h+1 (empty past the end)
  for (int h = m.horizon - 1; h >= 0; --h) {
    const int S = m.states(h);
    out.qstar.q[h].assign(S, std::vector<double>(m.num_actions, 0.0));
    out.vstar.v[h].assign(S, 0.0);
    actions[h].assign(S, 0);
    for (int x = 0; x < S; ++x) {
      int best_a = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < m.num_actions; ++a) {
        double q = m.reward_means[h][x][a];
        if (h + 1 < m.horizon) {
          const auto& row = m.transitions[h][x][a];
          for (int nx = 0; nx < m.states(h + 1); ++nx)
            q += row[nx] * v_next[nx];
        }
        out.qstar.q[h][x][a] = q;
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      out.vstar.v[h][x] = best;
      actions[h][x] = best_a;
    }
    v_next = out.vstar.v[h];
  }
  out.pistar = deterministic_policy(m, actions);
  out.jstar = 0.0;
  for (int x = 0; x < m.states(0); ++x)
    out.jstar += m.init_dist[x] * out.vstar.v[0][x];
  return out;
}

PolicyEvalResult policy_eval(const TabularMDP& m, const PolicyTable& pi) {
  m.validate();
  pi.validate(m);
  PolicyEvalResult out;
  out.qpi.q.resize(m.horizon);
  out.vpi.v.resize(m.horizon);
  std::vector<double> v_next;
  for (int h = m.horizon - 1; h >= 0; --h) {
    const int S = m.states(h);
    out.qpi.q[h].assign(S, std::vector<double>(m.num_actions, 0.0));
    out.vpi.v[h].assign(S, 0.0);
    for (int x = 0; x < S; ++x) {
      double v = 0.0;
      for (int a = 0; a < m.num_actions; ++a) {
        double q = m.reward_means[h][x][a];
        if (h + 1 < m.horizon) {
          const auto& row = m.transitions[h][x][a];
          for (int nx = 0; nx < m.states(h + 1); ++nx)
            q += row[nx] * v_next[nx];
        }
        out.qpi.q[h][x][a] = q;
        v += pi.rows[h][x][a] * q;
      }
      out.vpi.v[h][x] = v;
    }
    v_next = out.vpi.v[h];
  }
  out.j = 0.0;
  for (int x = 0; x < m.states(0); ++x)
    out.j += m.init_dist[x] * out.vpi.v[0][x];
  return out;
}

std::vector<std::vector<double>> occupancy(const TabularMDP& m,
                                           const PolicyTable& pi) {
  m.validate();
  pi.validate(m);
  std::vector<std::vector<double>> d(m.horizon);
  d[0] = m.init_dist;
  for (int h = 0; h + 1 < m.horizon; ++h) {
    d[h + 1].assign(m.states(h + 1), 0.0);
    for (int x = 0; x < m.states(h); ++x) {
      if (d[h][x] == 0.0) continue;
      for (int a = 0; a < m.num_actions; ++a) {
        const double w = d[h][x] * pi.rows[h][x][a];
        if (w == 0.0) continue;
        const auto& row = m.transitions[h][x][a];
        for (int nx = 0; nx < m.states(h + 1); ++nx)
          d[h + 1][nx] += w * row[nx];
      }
    }
  }
  return d;
}

PerformanceDifference performance_difference(const TabularMDP& m,
                                             const PolicyTable& pi,
                                             const PolicyTable& pihat) {
  PerformanceDifference out;
  const PolicyEvalResult hat = policy_eval(m, pihat);
  const PolicyEvalResult cur = policy_eval(m, pi);
  const auto d = occupancy(m, pi);
  for (int h = 0; h < m.horizon; ++h)
    for (int x = 0; x < m.states(h); ++x) {
      if (d[h][x] == 0.0) continue;
      double q_pi = 0.0, q_hat = 0.0;
      for (int a = 0; a < m.num_actions; ++a) {
        q_pi += pi.rows[h][x][a] * hat.qpi.q[h][x][a];
        q_hat += pihat.rows[h][x][a] * hat.qpi.q[h][x][a];
      }
      out.lhs += d[h][x] * (q_pi - q_hat);
    }
  out.rhs = cur.j - hat.j;
  return out;
}

// ---------------------------------------------------------------------------
// Coverability.
// ---------------------------------------------------------------------------

namespace {

// Maximum probability, over all policies, of sitting at `target` at `layer`.
double max_reach_probability(const TabularMDP& m, int layer, int target) {
  std::vector<double> w(m.states(layer), 0.0);
  w[target] = 1.0;
  for (int h = layer - 1; h >= 0; --h) {
    std::vector<double> prev(m.states(h), 0.0);
    for (int x = 0; x < m.states(h); ++x) {
      double best = 0.0;
      for (int a = 0; a < m.num_actions; ++a) {
        double val = 0.0;
        const auto& row = m.transitions[h][x][a];
        for (int nx = 0; nx < m.states(h + 1); ++nx) val += row[nx] * w[nx];
        best = std::max(best, val);
      }
      prev[x] = best;
    }
    w = std::move(prev);
  }
  double p = 0.0;
  for (int x = 0; x < m.states(0); ++x) p += m.init_dist[x] * w[x];
  return p;
}

}  // namespace

double coverability(const TabularMDP& m, int layer) {
  m.validate();
  check_layer(m, layer, "coverability");
  double sum = 0.0;
  for (int x = 0; x < m.states(layer); ++x)
    sum += max_reach_probability(m, layer, x);
  return m.num_actions * sum;
}

double coverability(const TabularMDP& m) {
  double best = 0.0;
  for (int h = 0; h < m.horizon; ++h) best = std::max(best, coverability(m, h));
  return best;
}

double coverability_bruteforce(const TabularMDP& m, int layer) {
  m.validate();
  check_layer(m, layer, "coverability_bruteforce");
  // Decision sites: every state at layers strictly before `layer`.
  std::vector<std::pair<int, int>> sites;
  for (int h = 0; h < layer; ++h)
    for (int x = 0; x < m.states(h); ++x) sites.emplace_back(h, x);
  double policies = std::pow(static_cast<double>(m.num_actions),
                             static_cast<double>(sites.size()));
  if (policies > 2e6)
    throw config_error("coverability_bruteforce: too many deterministic policies");

  std::vector<double> best_occ(m.states(layer), 0.0);
  std::vector<int> digits(sites.size(), 0);
  while (true) {
    // Forward occupancy under the deterministic policy encoded by `digits`.
    std::vector<double> d = m.init_dist;
    std::size_t cursor = 0;
    for (int h = 0; h < layer; ++h) {
      std::vector<double> next(m.states(h + 1), 0.0);
      for (int x = 0; x < m.states(h); ++x) {
        const int a = digits[cursor++];
        if (d[x] == 0.0) continue;
        const auto& row = m.transitions[h][x][a];
        for (int nx = 0; nx < m.states(h + 1); ++nx) next[nx] += d[x] * row[nx];
      }
      d = std::move(next);
    }
    for (int x = 0; x < m.states(layer); ++x)
      best_occ[x] = std::max(best_occ[x], d[x]);
    // Advance the mixed-radix counter.
    std::size_t i = 0;
    for (; i < digits.size(); ++i) {
      if (++digits[i] < m.num_actions) break;
      digits[i] = 0;
    }
    if (i == digits.size()) break;
  }
  double sum = 0.0;
  for (double v : best_occ) sum += v;
  return m.num_actions * sum;
}

// ---------------------------------------------------------------------------
// Pushforward coverability.
// ---------------------------------------------------------------------------

namespace {

// M(x') for a layer: the initial distribution at layer 0, otherwise the
// per-target max of the incoming transition rows.
std::vector<double> pushforward_maxima(const TabularMDP& m, int layer) {
  if (layer == 0) return m.init_dist;
  std::vector<double> best(m.states(layer), 0.0);
  for (int x = 0; x < m.states(layer - 1); ++x)
    for (int a = 0; a < m.num_actions; ++a) {
      const auto& row = m.transitions[layer - 1][x][a];
      for (int nx = 0; nx < m.states(layer); ++nx)
        best[nx] = std::max(best[nx], row[nx]);
    }
  return best;
}

}  // namespace

double pushforward_coverability(const TabularMDP& m, int layer) {
  m.validate();
  check_layer(m, layer, "pushforward_coverability");
  const auto maxima = pushforward_maxima(m, layer);
  double sum = 0.0;
  for (double v : maxima) sum += v;
  return sum;
}

double pushforward_coverability(const TabularMDP& m) {
  double best = 0.0;
  for (int h = 0; h < m.horizon; ++h)
    best = std::max(best, pushforward_coverability(m, h));
  return best;
}

double pushforward_coverability_bruteforce(const TabularMDP& m, int layer,
                                           double grid_step, int max_states) {
  m.validate();
  check_layer(m, layer, "pushforward_coverability_bruteforce");
  const int n = m.states(layer);
  if (n > max_states)
    throw config_error(
        "pushforward_coverability_bruteforce: layer has too many states for "
        "simplex enumeration");
  if (grid_step <= 0.0 || grid_step > 1.0)
    throw config_error("pushforward_coverability_bruteforce: bad grid step");
  const auto maxima = pushforward_maxima(m, layer);
  const long long k = std::llround(1.0 / grid_step);

  double best = std::numeric_limits<double>::infinity();
  // Enumerate all weak compositions of k into n parts; mu = parts / k.
  std::vector<long long> parts(n, 0);
  auto evaluate = [&]() {
    double value = 0.0;
    for (int x = 0; x < n; ++x) {
      if (maxima[x] == 0.0) continue;
      if (parts[x] == 0) return;  // infinite ratio, infeasible support
      value = std::max(value, maxima[x] * k / static_cast<double>(parts[x]));
    }
    best = std::min(best, value);
  };
  auto enumerate = [&](auto&& self, int index, long long remaining) -> void {
    if (index == n - 1) {
      parts[index] = remaining;
      evaluate();
      return;
    }
    for (long long v = 0; v <= remaining; ++v) {
      parts[index] = v;
      self(self, index + 1, remaining - v);
    }
  };
  enumerate(enumerate, 0, k);
  return best;
}

// ---------------------------------------------------------------------------
// Gaps.
// ---------------------------------------------------------------------------

GapResult min_gap(const TabularMDP& m) {
  const ValueIterationResult vi = value_iteration(m);
  GapResult out;
  out.gap = std::numeric_limits<double>::infinity();
  out.unique = true;
  const double tie_tol = 1e-12;
  for (int h = 0; h < m.horizon; ++h)
    for (int x = 0; x < m.states(h); ++x) {
      const double best = vi.vstar.v[h][x];
      int ties = 0;
      for (int a = 0; a < m.num_actions; ++a) {
        const double slack = best - vi.qstar.q[h][x][a];
        if (slack <= tie_tol) ++ties;
      }
      if (ties > 1) out.unique = false;
      const int astar = vi.pistar.action_at(h, x);
      for (int a = 0; a < m.num_actions; ++a) {
        if (a == astar) continue;
        out.gap = std::min(out.gap, best - vi.qstar.q[h][x][a]);
      }
    }
  if (out.gap < 0.0) out.gap = 0.0;  // guard against -0 style round-off
  return out;
}

TabularMDP make_gapped_twochain() {
  TabularMDP m;
  m.horizon = 2;
  m.states_per_layer = {1, 2};
  m.num_actions = 2;
  m.init_dist = {1.0};
  m.transitions = {{{{0.0, 1.0}, {0.0, 1.0}}}};
  // Action a at the single layer-0 state moves deterministically to state a.
  m.transitions[0][0][0] = {1.0, 0.0};
  m.transitions[0][0][1] = {0.0, 1.0};
  m.reward_means = {{{0.0, 1.0}}, {{0.0, 1.0}, {0.0, 1.0}}};
  m.reward_law = RewardLaw::deterministic_mean;
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Weak correlation of an exogenous chain.
// ---------------------------------------------------------------------------

double weak_correlation_coeff(
    const std::vector<double>& init,
    const std::vector<std::vector<std::vector<double>>>& t_exo, int horizon) {
  if (horizon < 1) throw validation_error("weak_correlation_coeff: empty horizon");
  const int n = static_cast<int>(init.size());
  if (static_cast<int>(t_exo.size()) != horizon - 1)
    throw validation_error("weak_correlation_coeff: chain must cover layers 0..H-2");
  // Marginals of the chain at every layer.
  std::vector<std::vector<double>> marg(horizon);
  marg[0] = init;
  for (int h = 0; h + 1 < horizon; ++h) {
    marg[h + 1].assign(n, 0.0);
    for (int xi = 0; xi < n; ++xi)
      for (int nxi = 0; nxi < n; ++nxi)
        marg[h + 1][nxi] += marg[h][xi] * t_exo[h][xi][nxi];
  }
  double best = 1.0;
  for (int h = 0; h < horizon; ++h) {
    for (int xi = 0; xi < n; ++xi) {
      if (marg[h][xi] <= 0.0) continue;
      std::vector<double> cond(n, 0.0);
      cond[xi] = 1.0;
      for (int h2 = h + 1; h2 < horizon; ++h2) {
        std::vector<double> next(n, 0.0);
        for (int y = 0; y < n; ++y)
          for (int ny = 0; ny < n; ++ny)
            next[ny] += cond[y] * t_exo[h2 - 1][y][ny];
        cond = std::move(next);
        for (int y = 0; y < n; ++y)
          if (marg[h2][y] > 0.0) best = std::max(best, cond[y] / marg[h2][y]);
      }
    }
  }
  return best;
}

double weak_correlation_coeff(const ExBMDPSpec& spec) {
  spec.validate();
  return weak_correlation_coeff(spec.exo_init, spec.t_exo, spec.H);
}

// ---------------------------------------------------------------------------
// Snapped benchmark policy.
// ---------------------------------------------------------------------------

namespace {

void check_bar_inputs(const ExBMDPSpec& spec, double eps,
                      const std::vector<double>& zeta) {
  spec.validate();
  if (!(eps > 0.0)) throw config_error("benchmark policy: eps must be positive");
  if (static_cast<int>(zeta.size()) != spec.H)
    throw config_error("benchmark policy: zeta must have one entry per layer");
  for (double z : zeta)
    if (!std::isfinite(z)) throw config_error("benchmark policy: zeta must be finite");
}

}  // namespace

BarPolicyResult benchmark_bar_policy(const ExBMDPSpec& spec, double eps,
                                     const std::vector<double>& zeta) {
  check_bar_inputs(spec, eps, zeta);
  const int n_obs = spec.obs_count();
  BarPolicyResult out;
  out.policy.rows.resize(spec.H);
  out.policy.deterministic = true;
  out.latent_actions.assign(spec.H, std::vector<int>(spec.S, 0));
  out.latent_backup.assign(
      spec.H, std::vector<std::vector<rational>>(
                  spec.S, std::vector<rational>(spec.A, rational(0))));

  std::vector<rational> v_next(n_obs, rational(0));
  std::vector<int> act(n_obs, 0);
  std::vector<std::vector<rational>> g(n_obs,
                                       std::vector<rational>(spec.A, rational(0)));
  for (int h = spec.H - 1; h >= 0; --h) {
    std::vector<rational> v_cur(n_obs, rational(0));
    out.policy.rows[h].assign(n_obs, std::vector<double>(spec.A, 0.0));
    for (int obs = 0; obs < n_obs; ++obs) {
      const int s = spec.latent_of(obs);
      const int xi = spec.exo_of(obs);
      std::vector<bigint> bins(spec.A);
      for (int a = 0; a < spec.A; ++a) {
        rational val = to_rational(spec.rewards[h][s][a]);
        if (h + 1 < spec.H) {
          // Exact product of the two factored rows; never the rounded
          // product held by a flattened model.
          for (int next = 0; next < n_obs; ++next) {
            const rational p = to_rational(spec.t_endo[h][s][a][spec.latent_of(next)]) *
                               to_rational(spec.t_exo[h][xi][spec.exo_of(next)]);
            if (p != 0) val += p * v_next[next];
          }
        }
        g[obs][a] = val;
        bins[a] = ceil_bin(val, eps, zeta[h]);
      }
      act[obs] = argmax_bin(bins);
      v_cur[obs] = g[obs][act[obs]];
      out.policy.rows[h][obs][act[obs]] = 1.0;
    }
    // The chosen action and the backed-up value must be functions of the
    // latent state alone.
    for (int s = 0; s < spec.S; ++s) {
      const int ref = spec.obs_of(s, 0);
      for (int xi = 1; xi < spec.Xi; ++xi) {
        const int obs = spec.obs_of(s, xi);
        if (act[obs] != act[ref] || v_cur[obs] != v_cur[ref]) {
          std::ostringstream os;
          os << "benchmark policy: choice at layer " << h
             << " depends on the exogenous component of latent state " << s;
          throw validation_error(os.str());
        }
      }
      out.latent_actions[h][s] = act[ref];
      for (int a = 0; a < spec.A; ++a) out.latent_backup[h][s][a] = g[ref][a];
    }
    v_next = std::move(v_cur);
  }
  return out;
}

BarPolicyResult bar_policy_latent(const ExBMDPSpec& spec, double eps,
                                  const std::vector<double>& zeta) {
  check_bar_inputs(spec, eps, zeta);
  BarPolicyResult out;
  out.policy.rows.resize(spec.H);
  out.policy.deterministic = true;
  out.latent_actions.assign(spec.H, std::vector<int>(spec.S, 0));
  out.latent_backup.assign(
      spec.H, std::vector<std::vector<rational>>(
                  spec.S, std::vector<rational>(spec.A, rational(0))));

  std::vector<rational> v_next(spec.S, rational(0));
  for (int h = spec.H - 1; h >= 0; --h) {
    std::vector<rational> v_cur(spec.S, rational(0));
    for (int s = 0; s < spec.S; ++s) {
      std::vector<bigint> bins(spec.A);
      for (int a = 0; a < spec.A; ++a) {
        rational val = to_rational(spec.rewards[h][s][a]);
        if (h + 1 < spec.H)
          for (int ns = 0; ns < spec.S; ++ns) {
            const rational p = to_rational(spec.t_endo[h][s][a][ns]);
            if (p != 0) val += p * v_next[ns];
          }
        out.latent_backup[h][s][a] = val;
        bins[a] = ceil_bin(val, eps, zeta[h]);
      }
      const int a_star = argmax_bin(bins);
      out.latent_actions[h][s] = a_star;
      v_cur[s] = out.latent_backup[h][s][a_star];
    }
    v_next = std::move(v_cur);
  }
  // Broadcast to the observation level so callers can execute the policy.
  const int n_obs = spec.obs_count();
  for (int h = 0; h < spec.H; ++h) {
    out.policy.rows[h].assign(n_obs, std::vector<double>(spec.A, 0.0));
    for (int obs = 0; obs < n_obs; ++obs)
      out.policy.rows[h][obs][out.latent_actions[h][spec.latent_of(obs)]] = 1.0;
  }
  return out;
}

SnapCheckResult snap_check(const ExBMDPSpec& spec, double eps,
                           const std::vector<double>& zeta) {
  check_bar_inputs(spec, eps, zeta);
  const BarPolicyResult bar = bar_policy_latent(spec, eps, zeta);
  const rational eps_r = to_rational(eps);
  const rational margin = rational(4) * eps_r;
  SnapCheckResult out;
  for (int h = 0; h < spec.H; ++h) {
    const rational z = to_rational(zeta[h]);
    if (z >= 0 && z <= margin) {
      out.snapped = false;
      out.violations.push_back({h, -1, -1});
    }
    for (int s = 0; s < spec.S; ++s)
      for (int a = 0; a < spec.A; ++a) {
        const rational scaled = bar.latent_backup[h][s][a] / eps_r;
        const rational frac = rational(ceil_rational(scaled)) - scaled;
        if (z >= frac - margin && z <= frac + margin) {
          out.snapped = false;
          out.violations.push_back({h, s, a});
        }
      }
  }
  return out;
}

}  // namespace simlab
