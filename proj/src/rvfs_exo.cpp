#include "simlab/rvfs_exo.hpp"

#include <algorithm>
#include <cmath>

#include "simlab/errors.hpp"
#include "simlab/imitation.hpp"
#include "simlab/oracle.hpp"

namespace simlab {

RvfsParams make_exo_params(double eps, double delta, int latent_states,
                           int num_actions, int horizon, double c_exo,
                           std::size_t vclass_size, double scale,
                           const RvfsOverrides& overrides) {
  if (!(eps > 0.0)) throw config_error("rvfs-exo: eps must be positive");
  if (!(delta > 0.0) || delta >= 1.0)
    throw config_error("rvfs-exo: delta must lie in (0, 1)");
  if (horizon < 1 || latent_states < 1 || num_actions < 1)
    throw config_error("rvfs-exo: sizes must be positive");
  if (!(c_exo >= 1.0))
    throw config_error("rvfs-exo: the weak-correlation constant is at least 1");
  if (vclass_size == 0) throw config_error("rvfs-exo: empty value class");
  if (!(scale > 0.0) || scale > 1.0)
    throw config_error("rvfs-exo: scale must lie in (0, 1]");

  RvfsParams p;
  p.eps = eps;
  p.delta = delta;
  p.horizon = horizon;
  p.num_actions = num_actions;
  p.vclass_size = vclass_size;
  p.scale = scale;
  p.cap_n_est = overrides.cap_n_est;
  p.budget_guard = overrides.budget_guard;
  p.max_restarts = overrides.max_restarts;
  p.beta_factor = 1.0;

  const double H = horizon;
  const double V = static_cast<double>(vclass_size);
  const double inv_eps_sq = 1.0 / (eps * eps);
  const double m =
      std::ceil(8.0 * inv_eps_sq * c_exo * latent_states * num_actions * H);
  if (!(m < 9e18)) throw config_error("rvfs-exo: core budget overflows");
  p.m_budget = static_cast<long long>(m);

  const double ln_test =
      std::log(8.0 * std::pow(m, 6) * std::pow(H, 8) / (eps * eps * delta));
  const double test_base = 256.0 * m * m * H * inv_eps_sq * ln_test;
  p.n_test_theory = std::ceil(test_base);
  auto resolve = [](double scaled, long long cap, const char* what) {
    double n = std::ceil(scaled);
    if (!(n < 9e18)) {
      if (cap > 0) return cap;
      throw config_error(std::string("rvfs-exo: ") + what +
                         " overflows; supply a scale or cap");
    }
    long long out = std::max(1LL, static_cast<long long>(n));
    if (cap > 0) out = std::min(out, cap);
    return out;
  };
  p.n_test = resolve(scale * test_base, overrides.cap_n_test, "test count");

  const double ln_reg = std::log(8.0 * V * H * m * m / delta);
  const double reg_base = 256.0 * m * m * inv_eps_sq * ln_reg;
  p.n_reg = resolve(scale * reg_base, overrides.cap_n_reg, "regression count");

  p.log_inv_delta_prime = std::log(4.0 / delta) + 7.0 * std::log(m) +
                          2.0 * std::log(p.n_test_theory) +
                          8.0 * std::log(H) + std::log(V);

  if (overrides.eps_reg_sq_override >= 0.0) {
    p.eps_reg_sq = overrides.eps_reg_sq_override;
  } else {
    p.eps_reg_sq =
        9.0 * m * H * H * std::log(8.0 * m * m * H * V / delta) /
            static_cast<double>(p.n_reg) +
        34.0 * m * H * H * H *
            std::log(8.0 * std::pow(m, 6) * p.n_test_theory *
                     p.n_test_theory * std::pow(H, 8) / delta) /
            static_cast<double>(p.n_test);
  }
  return p;
}

RvfsResult rvfs_exo(LocalSimSession& session, const FiniteVClass& vclass,
                    const RvfsParams& params, const std::vector<double>& zeta) {
  RvfsEngineConfig cfg;
  cfg.test_eps = params.eps * params.eps;
  cfg.pihat_params = BackupParams::make_from_log(params.eps * params.eps,
                                                 params.log_inv_delta_prime);
  cfg.rounded = true;
  cfg.eps_round = params.eps;
  cfg.zeta = zeta;
  return run_rvfs_engine(session, vclass, params, cfg);
}

BoostParams BoostParams::make(double eps, double delta, int latent_states,
                              int num_actions, int horizon,
                              std::size_t policy_class_size,
                              long long n_bc_override) {
  if (!(eps > 0.0)) throw config_error("boost: eps must be positive");
  if (!(delta > 0.0) || delta >= 1.0)
    throw config_error("boost: delta must lie in (0, 1)");
  if (policy_class_size == 0) throw config_error("boost: empty policy class");
  BoostParams p;
  p.eps = eps;
  p.delta = delta;
  const double snap_fail =
      24.0 * latent_states * num_actions * horizon * eps;
  if (snap_fail == 1.0)
    throw config_error(
        "boost: 24 S A H eps equals 1, the amplification count is undefined");
  p.vacuous_amplification = snap_fail >= 1.0;
  const double n_boost =
      std::ceil(std::log(1.0 / delta) / std::fabs(std::log(snap_fail)));
  p.n_boost = std::max(1LL, static_cast<long long>(n_boost));
  const double n_eval = std::ceil(
      256.0 / (eps * eps) * std::log(2.0 * static_cast<double>(p.n_boost) / delta));
  if (!(n_eval < 9e18)) throw config_error("boost: evaluation count overflows");
  p.n_eval = static_cast<long long>(n_eval);
  if (n_bc_override > 0) {
    p.n_bc = n_bc_override;
  } else {
    const double h2 = static_cast<double>(horizon) * horizon;
    const double n_bc = std::ceil(
        8.0 * h2 *
        std::log(4.0 * horizon * static_cast<double>(policy_class_size) / delta) /
        eps);
    if (!(n_bc < 9e18)) throw config_error("boost: cloning count overflows");
    p.n_bc = static_cast<long long>(n_bc);
  }
  return p;
}

ExoBcResult rvfs_exo_bc(const ExBMDPSpec& spec, const FiniteVClass& vclass,
                        const FinitePolicyClass& policy_class, double eps,
                        double delta, double c_exo, double scale,
                        const RvfsOverrides& overrides, std::uint64_t seed,
                        long long n_bc_override) {
  const TabularMDP model = flatten(spec);
  const RvfsParams params =
      make_exo_params(eps, delta, spec.S, spec.A, spec.H, c_exo, vclass.size(),
                      scale, overrides);
  ExoBcResult out;
  out.boost = BoostParams::make(eps, delta, spec.S, spec.A, spec.H,
                                policy_class.size(), n_bc_override);
  const BackupParams expert_params = BackupParams::make_from_log(
      eps * eps, params.log_inv_delta_prime);

  Rng root(seed);
  double best_j_hat = 0.0;
  for (long long i = 0; i < out.boost.n_boost; ++i) {
    Rng iter = root.substream("boost").substream(static_cast<std::uint64_t>(i));
    Rng zeta_rng = iter.substream("zeta");
    BoostIteration it;
    it.zeta.resize(spec.H);
    for (int h = 0; h < spec.H; ++h) it.zeta[h] = zeta_rng.uniform(0.0, 0.5);
    it.snapped = snap_check(spec, eps, it.zeta).snapped;

    LocalSimSession session(model, iter.substream("session").key());
    const RvfsResult search = rvfs_exo(session, vclass, params, it.zeta);
    it.v_hat_ids = search.v_hat_ids;

    const std::vector<int> ids = search.v_hat_ids;
    const FiniteVClass* cls = &vclass;
    const std::vector<double> zeta = it.zeta;
    ExpertFn expert = [ids, cls, zeta, expert_params, eps](
                          LocalSimSession& ses, int layer, int x) {
      StateValueFn f;
      const int next_level = layer + 2;
      if (next_level < static_cast<int>(ids.size()) && ids[next_level] >= 0) {
        const std::vector<double>* table =
            &cls->members[ids[next_level]].v[layer + 1];
        f = [table](int nx) { return (*table)[nx]; };
      }
      return rounded_action(ses, layer, x, f, expert_params, eps, zeta[layer]);
    };

    CloneParams clone_params =
        CloneParams::make(eps, delta, spec.H, policy_class.size(), out.boost.n_bc);
    const CloneResult clone =
        behavior_cloning(session, policy_class, expert, clone_params);
    it.cloned_index = clone.selected_index;

    double return_sum = 0.0;
    for (long long e = 0; e < out.boost.n_eval; ++e) {
      session.start_episode();
      for (const StepRecord& s : session.rollout(clone.policy))
        return_sum += s.reward;
    }
    it.j_hat = return_sum / static_cast<double>(out.boost.n_eval);
    it.j_exact = policy_eval(model, clone.policy).j;
    it.ledger = session.ledger();

    if (out.best_index < 0 || it.j_hat > best_j_hat) {
      out.best_index = static_cast<int>(i);
      best_j_hat = it.j_hat;
      out.best_policy = clone.policy;
    }
    out.iterations.push_back(std::move(it));
  }
  return out;
}

}  // namespace simlab
