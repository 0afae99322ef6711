#include "simlab/backup.hpp"

#include <cmath>

#include "simlab/errors.hpp"
#include "simlab/exact_bins.hpp"

namespace simlab {

BackupParams BackupParams::make(double eps, double delta) {
  if (!(delta > 0.0) || delta >= 1.0)
    throw config_error("backup: delta must lie in (0, 1)");
  return make_from_log(eps, std::log(1.0 / delta));
}

BackupParams BackupParams::make_from_log(double eps, double log_inv_delta) {
  if (!(eps > 0.0)) throw config_error("backup: eps must be positive");
  if (!(log_inv_delta > 0.0))
    throw config_error("backup: ln(1/delta) must be positive");
  BackupParams p;
  p.eps = eps;
  p.log_inv_delta = log_inv_delta;
  const double n = std::ceil(2.0 * log_inv_delta / (eps * eps));
  if (!(n < 9e18)) throw config_error("backup: required sample count overflows");
  p.n_sim = static_cast<long long>(n);
  if (p.n_sim < 1) p.n_sim = 1;
  return p;
}

double phat(LocalSimSession& session, int layer, int state, int action,
            const StateValueFn& f_next, const BackupParams& params) {
  double sum = 0.0;
  for (long long i = 0; i < params.n_sim; ++i) {
    session.reset_to(layer, state);
    const auto [r, next] = session.step(action);
    sum += r;
    if (next >= 0 && f_next) sum += f_next(next);
  }
  return sum / static_cast<double>(params.n_sim);
}

double phat_initial(LocalSimSession& session, const StateValueFn& f,
                    const BackupParams& params) {
  double sum = 0.0;
  for (long long i = 0; i < params.n_sim; ++i) {
    const int x = session.start_episode();
    if (f) sum += f(x);
  }
  return sum / static_cast<double>(params.n_sim);
}

int greedy_action(LocalSimSession& session, int layer, int state,
                  const StateValueFn& f_next, const BackupParams& params) {
  const int A = session.model().num_actions;
  int best_a = 0;
  double best = -1.0;
  for (int a = 0; a < A; ++a) {
    const double est = phat(session, layer, state, a, f_next, params);
    if (a == 0 || est > best) {
      best = est;
      best_a = a;
    }
  }
  return best_a;
}

int rounded_action(LocalSimSession& session, int layer, int state,
                   const StateValueFn& f_next, const BackupParams& params,
                   double eps_round, double zeta) {
  const int A = session.model().num_actions;
  std::vector<bigint> bins(A);
  for (int a = 0; a < A; ++a)
    bins[a] =
        ceil_bin(phat(session, layer, state, a, f_next, params), eps_round, zeta);
  return argmax_bin(bins);
}

}  // namespace simlab
