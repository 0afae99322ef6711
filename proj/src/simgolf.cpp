#include "simlab/simgolf.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "simlab/errors.hpp"
#include "simlab/oracle.hpp"

namespace simlab {

PolicyTable greedy_policy_of(const TabularMDP& m, const QTable& q) {
  std::vector<std::vector<int>> actions(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    actions[h].assign(m.states(h), 0);
    for (int x = 0; x < m.states(h); ++x) {
      int best_a = 0;
      for (int a = 1; a < m.num_actions; ++a)
        if (q.q[h][x][a] > q.q[h][x][best_a]) best_a = a;
      actions[h][x] = best_a;
    }
  }
  return deterministic_policy(m, actions);
}

SimGolfParams SimGolfParams::make(double eps, double delta,
                                  std::size_t qclass_size, double c_cov,
                                  int horizon, double scale_n, double scale_k) {
  if (!(eps > 0.0)) throw config_error("simgolf: eps must be positive");
  if (!(delta > 0.0) || delta >= 1.0)
    throw config_error("simgolf: delta must lie in (0, 1)");
  if (qclass_size == 0) throw config_error("simgolf: empty value class");
  if (!(c_cov > 0.0)) throw config_error("simgolf: coverability must be positive");
  if (horizon < 1) throw config_error("simgolf: horizon must be positive");
  if (!(scale_n > 0.0) || scale_n > 1.0)
    throw config_error("simgolf: scale_n must lie in (0, 1]");
  if (!(scale_k > 0.0))
    throw config_error("simgolf: scale_k must be positive");
  SimGolfParams p;
  p.eps = eps;
  p.delta = delta;
  p.scale_n = scale_n;
  p.scale_k = scale_k;
  p.c_cov = c_cov;
  p.horizon = horizon;
  const double H = horizon;
  const double size = static_cast<double>(qclass_size);
  auto iters_for = [&](double beta) {
    const double n = std::ceil(scale_n * H * H * c_cov * beta / (eps * eps));
    if (!(n < 9e18)) throw config_error("simgolf: iteration count overflows");
    return static_cast<long long>(std::max(1.0, n));
  };
  p.beta_one = 2.0 * 16.0 * std::log(2.0 * H * 1.0 * size / delta);
  p.n_guess = iters_for(p.beta_one);
  p.beta_stat =
      16.0 * std::log(2.0 * H * static_cast<double>(p.n_guess) * size / delta);
  p.beta = 2.0 * p.beta_stat;
  p.n_iters = iters_for(p.beta);
  const double k = std::ceil(scale_k * 8.0 * static_cast<double>(p.n_iters) /
                             p.beta_stat);
  if (!(k < 9e18)) throw config_error("simgolf: draw count overflows");
  p.k_draws = static_cast<long long>(std::max(1.0, k));
  return p;
}

bool ConfidenceState::active(std::size_t member) const {
  for (double c : cum[member])
    if (c > beta) return false;
  return true;
}

long long ConfidenceState::active_count() const {
  long long n = 0;
  for (std::size_t i = 0; i < cum.size(); ++i)
    if (active(i)) ++n;
  return n;
}

int optimistic_select(const FiniteQClass& qclass, const ConfidenceState& state,
                      const std::vector<int>& initial_states) {
  int best = -1;
  double best_score = 0.0;
  for (std::size_t i = 0; i < qclass.size(); ++i) {
    if (!state.active(i)) continue;
    double score = 0.0;
    for (int x1 : initial_states) {
      const auto& row = qclass.members[i].q[0][x1];
      score += *std::max_element(row.begin(), row.end());
    }
    if (best < 0 || score > best_score) {
      best = static_cast<int>(i);
      best_score = score;
    }
  }
  if (best < 0)
    throw algorithm_error("simgolf: every member of the value class was eliminated");
  return best;
}

void confidence_update(ConfidenceState& state,
                       const std::vector<std::vector<double>>& residuals) {
  if (residuals.size() != state.cum.size())
    throw validation_error("simgolf: residual table size mismatch");
  for (std::size_t i = 0; i < residuals.size(); ++i)
    for (std::size_t h = 0; h < residuals[i].size(); ++h)
      state.cum[i][h] += residuals[i][h];
}

SimGolfResult run_simgolf(LocalSimSession& session, const FiniteQClass& qclass,
                          const SimGolfParams& params) {
  const TabularMDP& m = session.model();
  if (params.horizon != m.horizon)
    throw config_error("simgolf: parameter horizon does not match the model");
  const std::size_t n_members = qclass.size();
  const int H = m.horizon;
  const int A = m.num_actions;

  SimGolfResult out;
  out.jstar = value_iteration(m).jstar;
  ConfidenceState conf;
  conf.beta = params.beta;
  conf.cum.assign(n_members, std::vector<double>(H, 0.0));

  std::vector<int> initial_states;
  initial_states.reserve(params.n_iters);
  double j_sum = 0.0;

  for (long long t = 1; t <= params.n_iters; ++t) {
    const long long active_before = conf.active_count();
    const int sel = optimistic_select(qclass, conf, initial_states);
    const QTable& qsel = qclass.members[sel];

    const int x1 = session.start_episode();
    initial_states.push_back(x1);

    // Play the greedy policy of the selected member for one episode.
    std::vector<std::array<int, 3>> visited;  // (layer, state, action)
    int x = x1;
    for (int h = 0; h < H; ++h) {
      int a = 0;
      for (int b = 1; b < A; ++b)
        if (qsel.q[h][x][b] > qsel.q[h][x][a]) a = b;
      visited.push_back({h, x, a});
      const auto [r, nx] = session.step(a);
      (void)r;
      x = nx;
    }

    // Score the full class on k fresh draws at every visited site.
    std::vector<std::vector<double>> residuals(n_members,
                                               std::vector<double>(H, 0.0));
    for (const auto& [h, xs, as] : visited) {
      std::vector<double> target_sum(n_members, 0.0);
      for (long long k = 0; k < params.k_draws; ++k) {
        session.reset_to(h, xs);
        const auto [r, nx] = session.step(as);
        for (std::size_t i = 0; i < n_members; ++i) {
          double target = r;
          if (nx >= 0) {
            const auto& row = qclass.members[i].q[h + 1][nx];
            target += *std::max_element(row.begin(), row.end());
          }
          target_sum[i] += target;
        }
      }
      for (std::size_t i = 0; i < n_members; ++i) {
        const double mean = target_sum[i] / static_cast<double>(params.k_draws);
        const double diff = qclass.members[i].q[h][xs][as] - mean;
        residuals[i][h] += diff * diff;
      }
    }
    confidence_update(conf, residuals);

    double residual_max = 0.0;
    for (std::size_t i = 0; i < n_members; ++i) {
      double total = 0.0;
      for (double v : residuals[i]) total += v;
      residual_max = std::max(residual_max, total);
    }
    const double j_exact = policy_eval(m, greedy_policy_of(m, qsel)).j;
    j_sum += j_exact;
    out.selected.push_back(sel);
    out.trace.push_back({t, sel, active_before, j_exact, residual_max});
  }

  out.mixture_j = j_sum / static_cast<double>(params.n_iters);
  out.final_active.assign(n_members, 0);
  for (std::size_t i = 0; i < n_members; ++i)
    out.final_active[i] = conf.active(i) ? 1 : 0;
  out.ledger = session.ledger();
  return out;
}

}  // namespace simlab
