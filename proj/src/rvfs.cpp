#include "simlab/rvfs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "simlab/errors.hpp"
#include "simlab/exact_bins.hpp"
#include "simlab/imitation.hpp"

namespace simlab {

long long RvfsParams::n_est(long long k) const {
  const double nr = static_cast<double>(n_reg);
  const double arg = 8.0 * num_actions * nr * horizon *
                     static_cast<double>(k) * k * k / delta;
  double n = std::ceil(2.0 * nr * nr * std::log(arg));
  if (!(n < 9e18))
    throw config_error("rvfs: rollout-label count overflows; cap n_est");
  long long out = std::max(1LL, static_cast<long long>(n));
  if (cap_n_est > 0) out = std::min(out, cap_n_est);
  return out;
}

double RvfsParams::beta(long long t) const {
  // Any resolved configuration has m_budget >= 1 and t >= 1, making the
  // argument >= 8; the clamp keeps degenerate hand-built budgets from
  // poisoning thresholds with a NaN.
  const double arg = 8.0 * num_actions * static_cast<double>(m_budget) *
                     static_cast<double>(vclass_size) *
                     static_cast<double>(t) * t / delta;
  return std::sqrt(beta_factor * std::log(std::max(arg, 1.0)) /
                   log_inv_delta_prime);
}

RvfsParams make_rvfs_params(double eps, double delta, int horizon,
                            int num_actions, double c_push,
                            std::size_t vclass_size, double scale,
                            const RvfsOverrides& overrides) {
  if (!(eps > 0.0)) throw config_error("rvfs: eps must be positive");
  if (!(delta > 0.0) || delta >= 1.0)
    throw config_error("rvfs: delta must lie in (0, 1)");
  if (horizon < 1) throw config_error("rvfs: horizon must be positive");
  if (num_actions < 1) throw config_error("rvfs: need at least one action");
  if (!(c_push > 0.0)) throw config_error("rvfs: c_push must be positive");
  if (vclass_size == 0) throw config_error("rvfs: empty value class");
  if (!(scale > 0.0) || scale > 1.0)
    throw config_error("rvfs: scale must lie in (0, 1]");

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
  p.beta_factor = 2.0;

  const double H = horizon;
  const double V = static_cast<double>(vclass_size);
  const double m = std::ceil(8.0 * c_push * H / eps);
  if (!(m < 9e18)) throw config_error("rvfs: core budget overflows");
  p.m_budget = static_cast<long long>(m);

  const double ln_test =
      std::log(8.0 * std::pow(m, 6) * std::pow(H, 8) / (eps * eps * delta));
  const double test_base = 256.0 * m * m * H * ln_test / eps;
  p.n_test_theory = std::ceil(test_base);
  auto resolve = [](double scaled, long long cap, const char* what) {
    double n = std::ceil(scaled);
    if (!(n < 9e18)) {
      if (cap > 0) return cap;
      throw config_error(std::string("rvfs: ") + what +
                         " overflows; supply a scale or cap");
    }
    long long out = std::max(1LL, static_cast<long long>(n));
    if (cap > 0) out = std::min(out, cap);
    return out;
  };
  p.n_test = resolve(scale * test_base, overrides.cap_n_test, "test count");

  const double ln_reg = std::log(8.0 * V * V * H * m * m / delta);
  const double reg_base = 256.0 * m * m * ln_reg / eps;
  p.n_reg = resolve(scale * reg_base, overrides.cap_n_reg, "regression count");

  p.log_inv_delta_prime = std::log(8.0 / delta) + 7.0 * std::log(m) +
                          2.0 * std::log(p.n_test_theory) +
                          8.0 * std::log(H) + std::log(V);

  if (overrides.eps_reg_sq_override >= 0.0) {
    p.eps_reg_sq = overrides.eps_reg_sq_override;
  } else {
    p.eps_reg_sq =
        9.0 * m * H * H * std::log(8.0 * m * m * H * V * V / delta) /
            static_cast<double>(p.n_reg) +
        34.0 * m * H * H * H *
            std::log(8.0 * std::pow(m, 6) * p.n_test_theory *
                     p.n_test_theory * std::pow(H, 8) / delta) /
            static_cast<double>(p.n_test);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Shared engine.
// ---------------------------------------------------------------------------

namespace {

class RvfsEngine {
 public:
  RvfsEngine(LocalSimSession& session, const FiniteVClass& vclass,
             const RvfsParams& params, const RvfsEngineConfig& cfg)
      : session_(session),
        vclass_(vclass),
        params_(params),
        cfg_(cfg),
        H_(params.horizon),
        A_(params.num_actions) {
    v_hat_ids_.assign(H_ + 1, -1);
    core_.assign(H_ + 1, {});
    data_states_.assign(H_ + 1, {});
    data_labels_.assign(H_ + 1, {});
    t_.assign(H_ + 1, 0);
  }

  RvfsResult run() {
    run_level(0);
    RvfsResult out;
    out.v_hat_ids = v_hat_ids_;
    out.core = core_;
    out.t = t_;
    out.refit_count = refit_count_;
    out.restart_count = restart_count_;
    out.budget_violations = violations_;
    out.trace = std::move(trace_);
    out.ledger = session_.ledger();
    return out;
  }

  StateValueFn value_fn(int level) const {
    if (level < 1 || level > H_) return {};
    const int id = v_hat_ids_[level];
    if (id < 0) return {};
    const std::vector<double>* table = &vclass_.members[id].v[level - 1];
    return [table](int x) { return (*table)[x]; };
  }

 private:
  // Action of the learned policy at (model layer, state): the Monte-Carlo
  // backup of the next level's fitted value.
  int pick_action(int model_layer, int x) {
    const StateValueFn f = value_fn(model_layer + 2);
    if (cfg_.rounded)
      return rounded_action(session_, model_layer, x, f, cfg_.pihat_params,
                            cfg_.eps_round, cfg_.zeta[model_layer]);
    return greedy_action(session_, model_layer, x, f, cfg_.pihat_params);
  }

  // Commits one policy step from (model layer, state); pick_action moves the
  // cursor through its own draws, so the pending state is restored first.
  int policy_step(int model_layer, int x, double* reward_out = nullptr) {
    const int a = pick_action(model_layer, x);
    session_.reset_to(model_layer, x);
    const auto [r, nx] = session_.step(a);
    if (reward_out != nullptr) *reward_out = r;
    return nx;
  }

  // Draws a state at the layer of `level` (1-based levels; model layer
  // level-2 holds the pair, the drawn state lands on model layer level-1).
  int draw_from_pair(int level, const CorePair& pair) {
    if (level <= 1) return session_.start_episode();
    session_.reset_to(level - 2, pair.state);
    const auto [r, nx] = session_.step(pair.action);
    (void)r;
    return nx;
  }

  // Rolls the learned policy from a level-h pair down to the layer tested by
  // level `target` (model layer target-2). Only called with target >= 2.
  int roll_to_test_layer(int h, const CorePair& pair, int target) {
    int x;
    int model_layer;
    if (h == 0) {
      x = session_.start_episode();
      model_layer = 0;
    } else {
      x = draw_from_pair(h, pair);
      model_layer = h - 1;
    }
    while (model_layer < target - 2) {
      x = policy_step(model_layer, x);
      ++model_layer;
    }
    return x;
  }

  void record(const std::string& event, int level) {
    trace_.push_back({event, level,
                      static_cast<long long>(core_[level].size()), t_[level],
                      session_.ledger()});
  }

  void run_level(int h) {
    record("recurse", h);
    while (sweep_once(h)) {
    }
    if (h >= 1 && !core_[h].empty()) refit(h);
    record("return", h);
  }

  // One full pass over the level's pairs; returns true when a failed test
  // forced recursion (the caller restarts the pass).
  bool sweep_once(int h) {
    static const CorePair anchor{-1, -1};
    const std::size_t n_pairs = (h == 0) ? 1 : core_[h].size();
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const CorePair pair = (h == 0) ? anchor : core_[h][p];
      for (int level = H_; level >= h + 1; --level) {
        for (long long n = 0; n < params_.n_test; ++n) {
          const int y =
              (level == 1) ? -1 : roll_to_test_layer(h, pair, level);
          const int num_tests = (level == 1) ? 1 : A_;
          for (int a = 0; a < num_tests; ++a) {
            const int a_test = (level == 1) ? -1 : a;
            ++t_[level];
            const TestSupResult sup = rvfs_test_sup(
                session_, vclass_, level, y, a_test, v_hat_ids_[level],
                data_states_[level], params_.eps_reg_sq, cfg_);
            const double threshold =
                cfg_.test_eps * (1.0 + params_.beta(t_[level]));
            if (sup.sup <= threshold) continue;
            // Failure: the pair joins the level's core set and every level
            // between here and h+1 is rebuilt before this sweep restarts.
            core_[level].push_back({y, a_test});
            record("test_fail", level);
            enforce_budgets(level);
            for (int tau = level; tau >= h + 1; --tau) run_level(tau);
            return true;
          }
        }
      }
    }
    return false;
  }

  void enforce_budgets(int level) {
    if (static_cast<long long>(core_[level].size()) > params_.m_budget) {
      std::ostringstream os;
      os << "core set at level " << level << " grew to " << core_[level].size()
         << ", past the budget " << params_.m_budget;
      record("budget", level);
      if (params_.budget_guard) throw budget_error(os.str());
      violations_.push_back(os.str());
    }
    ++restart_count_;
    if (restart_count_ > params_.max_restarts) {
      std::ostringstream os;
      os << "restart count exceeded the hard cap " << params_.max_restarts;
      record("budget", level);
      throw budget_error(os.str());
    }
  }

  void refit(int h) {
    const long long k = static_cast<long long>(core_[h].size());
    const long long n_labels = params_.n_est(k);
    std::vector<int> states;
    std::vector<double> labels;
    states.reserve(core_[h].size() * params_.n_reg);
    for (const CorePair& pair : core_[h]) {
      for (long long i = 0; i < params_.n_reg; ++i) {
        const int x = draw_from_pair(h, pair);
        double total = 0.0;
        for (long long j = 0; j < n_labels; ++j)
          total += rollout_return(h - 1, x);
        states.push_back(x);
        labels.push_back(total / static_cast<double>(n_labels));
      }
    }
    int best = 0;
    double best_score = 0.0;
    for (std::size_t id = 0; id < vclass_.size(); ++id) {
      const auto& table = vclass_.members[id].v[h - 1];
      double score = 0.0;
      for (std::size_t i = 0; i < states.size(); ++i) {
        const double d = table[states[i]] - labels[i];
        score += d * d;
      }
      if (id == 0 || score < best_score) {
        best = static_cast<int>(id);
        best_score = score;
      }
    }
    v_hat_ids_[h] = best;
    data_states_[h] = std::move(states);
    data_labels_[h] = std::move(labels);
    ++refit_count_;
    record("refit", h);
  }

  // Total reward of one learned-policy episode suffix from (model layer, x).
  double rollout_return(int model_layer, int x) {
    double total = 0.0;
    for (int layer = model_layer; layer < H_; ++layer) {
      double r = 0.0;
      x = policy_step(layer, x, &r);
      total += r;
    }
    return total;
  }

  LocalSimSession& session_;
  const FiniteVClass& vclass_;
  const RvfsParams& params_;
  const RvfsEngineConfig& cfg_;
  const int H_;
  const int A_;

  std::vector<int> v_hat_ids_;
  std::vector<std::vector<CorePair>> core_;
  std::vector<std::vector<int>> data_states_;
  std::vector<std::vector<double>> data_labels_;
  std::vector<long long> t_;
  long long refit_count_ = 0;
  long long restart_count_ = 0;
  std::vector<std::string> violations_;
  std::vector<RvfsTraceRow> trace_;
};

}  // namespace

TestSupResult rvfs_test_sup(LocalSimSession& session, const FiniteVClass& vclass,
                            int level, int state, int action, int vhat_id,
                            const std::vector<int>& data_states,
                            double eps_reg_sq, const RvfsEngineConfig& cfg) {
  const int layer = level - 1;  // model layer of the compared values
  auto member_fn = [&](int id) -> StateValueFn {
    const std::vector<double>* table = &vclass.members[id].v[layer];
    return [table](int x) { return (*table)[x]; };
  };
  StateValueFn vhat_fn;
  if (vhat_id >= 0) vhat_fn = member_fn(vhat_id);

  // Confidence set: members close to the fitted value on the regression
  // draws. With no draws yet, nothing is excluded.
  std::vector<int> confidence;
  if (data_states.empty()) {
    confidence.resize(vclass.size());
    for (std::size_t i = 0; i < vclass.size(); ++i)
      confidence[i] = static_cast<int>(i);
  } else {
    const auto& vhat_table = vclass.members[vhat_id].v[layer];
    for (std::size_t i = 0; i < vclass.size(); ++i) {
      const auto& table = vclass.members[i].v[layer];
      double mse = 0.0;
      for (int x : data_states) {
        const double d = table[x] - vhat_table[x];
        mse += d * d;
      }
      mse /= static_cast<double>(data_states.size());
      if (mse <= eps_reg_sq) confidence.push_back(static_cast<int>(i));
    }
  }

  auto estimate = [&](const StateValueFn& f) {
    if (level == 1) return phat_initial(session, f, cfg.pihat_params);
    return phat(session, level - 2, state, action, f, cfg.pihat_params);
  };

  TestSupResult out;
  out.confidence_size = static_cast<long long>(confidence.size());
  const double est_vhat = estimate(vhat_fn);
  for (int id : confidence) {
    const double diff = std::fabs(est_vhat - estimate(member_fn(id)));
    if (diff > out.sup) {
      out.sup = diff;
      out.argmax_member = id;
    }
  }
  return out;
}

RvfsResult run_rvfs_engine(LocalSimSession& session, const FiniteVClass& vclass,
                           const RvfsParams& params,
                           const RvfsEngineConfig& cfg) {
  const TabularMDP& m = session.model();
  if (params.horizon != m.horizon)
    throw config_error("rvfs: parameter horizon does not match the model");
  if (params.num_actions != m.num_actions)
    throw config_error("rvfs: parameter action count does not match the model");
  if (vclass.size() == 0) throw config_error("rvfs: empty value class");
  for (const VTable& member : vclass.members) {
    if (static_cast<int>(member.v.size()) != m.horizon)
      throw config_error("rvfs: value-class member horizon mismatch");
    for (int h = 0; h < m.horizon; ++h)
      if (static_cast<int>(member.v[h].size()) != m.states(h))
        throw config_error("rvfs: value-class member layer size mismatch");
  }
  if (cfg.rounded && static_cast<int>(cfg.zeta.size()) != m.horizon)
    throw config_error("rvfs: rounded runs need one zeta per layer");
  if (!(cfg.test_eps > 0.0)) throw config_error("rvfs: test_eps must be positive");

  RvfsEngine engine(session, vclass, params, cfg);
  return engine.run();
}

RvfsResult rvfs(LocalSimSession& session, const FiniteVClass& vclass,
                const RvfsParams& params) {
  RvfsEngineConfig cfg;
  cfg.test_eps = params.eps;
  cfg.pihat_params =
      BackupParams::make_from_log(params.eps, params.log_inv_delta_prime);
  cfg.rounded = false;
  return run_rvfs_engine(session, vclass, params, cfg);
}

bool check_recursion_order(const std::vector<RvfsTraceRow>& trace,
                           std::string* reason) {
  // Each frame owes at most one pending direct child: after a failure at
  // level l it must visit l, l-1, ..., own level + 1 in that order before
  // testing again, refitting, or returning.
  struct Frame {
    int level = 0;
    int pending = -1;
  };
  std::vector<Frame> stack;
  bool root_done = false;
  auto fail = [&](std::size_t i, const char* what) {
    if (reason) {
      std::ostringstream os;
      os << "row " << i << " (" << trace[i].event << " at level "
         << trace[i].level << "): " << what;
      *reason = os.str();
    }
    return false;
  };
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& row = trace[i];
    if (row.event == "budget") continue;  // bookkeeping only; no call effect
    if (row.event == "recurse") {
      if (stack.empty()) {
        if (root_done) return fail(i, "second root frame");
        stack.push_back({row.level, -1});
        continue;
      }
      if (stack.back().pending != row.level)
        return fail(i, "entered without a matching recursion obligation");
      stack.push_back({row.level, -1});
    } else if (row.event == "test_fail") {
      if (stack.empty()) return fail(i, "test outside any frame");
      Frame& top = stack.back();
      if (top.pending != -1)
        return fail(i, "test ran while recursion was still owed");
      if (row.level <= top.level)
        return fail(i, "failed level does not lie above the current frame");
      top.pending = row.level;
    } else if (row.event == "refit") {
      if (stack.empty()) return fail(i, "refit outside any frame");
      if (stack.back().level != row.level)
        return fail(i, "refit of a level other than the current frame");
      if (stack.back().pending != -1)
        return fail(i, "refit while recursion was still owed");
    } else if (row.event == "return") {
      if (stack.empty()) return fail(i, "return outside any frame");
      const Frame top = stack.back();
      if (top.level != row.level)
        return fail(i, "return from a level other than the current frame");
      if (top.pending != -1)
        return fail(i, "return while recursion was still owed");
      stack.pop_back();
      if (stack.empty()) {
        root_done = true;
      } else {
        Frame& parent = stack.back();
        if (parent.pending != row.level)
          return fail(i, "child returned out of descent order");
        parent.pending = (row.level - 1 > parent.level) ? row.level - 1 : -1;
      }
    } else {
      return fail(i, "unknown event");
    }
  }
  if (!stack.empty()) {
    // A budget abort legitimately cuts the trace short mid-frame.
    if (!trace.empty() && trace.back().event == "budget") return true;
    if (reason) *reason = "trace ended with unclosed frames";
    return false;
  }
  return true;
}

namespace {

// Exact one-step backups of the fitted values against the true model.
std::vector<double> exact_backups(const TabularMDP& m,
                                  const FiniteVClass& vclass,
                                  const std::vector<int>& v_hat_ids, int layer,
                                  int x) {
  std::vector<double> q(m.num_actions, 0.0);
  const int next_level = layer + 2;
  const bool has_next = next_level <= static_cast<int>(v_hat_ids.size()) - 1 &&
                        layer + 1 < m.horizon && v_hat_ids[next_level] >= 0;
  for (int a = 0; a < m.num_actions; ++a) {
    double val = m.reward_means[layer][x][a];
    if (layer + 1 < m.horizon && has_next) {
      const auto& table = vclass.members[v_hat_ids[next_level]].v[layer + 1];
      const auto& row = m.transitions[layer][x][a];
      for (int nx = 0; nx < m.states(layer + 1); ++nx)
        val += row[nx] * table[nx];
    }
    q[a] = val;
  }
  return q;
}

}  // namespace

PolicyTable exact_greedy_policy(const TabularMDP& m, const FiniteVClass& vclass,
                                const std::vector<int>& v_hat_ids) {
  std::vector<std::vector<int>> actions(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    actions[h].assign(m.states(h), 0);
    for (int x = 0; x < m.states(h); ++x) {
      const auto q = exact_backups(m, vclass, v_hat_ids, h, x);
      int best = 0;
      for (int a = 1; a < m.num_actions; ++a)
        if (q[a] > q[best]) best = a;
      actions[h][x] = best;
    }
  }
  return deterministic_policy(m, actions);
}

PolicyTable exact_rounded_policy(const TabularMDP& m, const FiniteVClass& vclass,
                                 const std::vector<int>& v_hat_ids,
                                 double eps_round,
                                 const std::vector<double>& zeta) {
  if (static_cast<int>(zeta.size()) != m.horizon)
    throw config_error("rvfs: need one zeta per layer");
  std::vector<std::vector<int>> actions(m.horizon);
  for (int h = 0; h < m.horizon; ++h) {
    actions[h].assign(m.states(h), 0);
    for (int x = 0; x < m.states(h); ++x) {
      const auto q = exact_backups(m, vclass, v_hat_ids, h, x);
      std::vector<bigint> bins(m.num_actions);
      for (int a = 0; a < m.num_actions; ++a)
        bins[a] = ceil_bin(q[a], eps_round, zeta[h]);
      actions[h][x] = argmax_bin(bins);
    }
  }
  return deterministic_policy(m, actions);
}

RvfsBcResult rvfs_bc(LocalSimSession& session, const FiniteVClass& vclass,
                     const FinitePolicyClass& policy_class, double eps,
                     double delta, double c_push, double scale,
                     const RvfsOverrides& overrides, long long n_bc_override) {
  const TabularMDP& m = session.model();
  const double eps_search = eps / (48.0 * m.horizon);
  const RvfsParams params =
      make_rvfs_params(eps_search, delta, m.horizon, m.num_actions, c_push,
                       vclass.size(), scale, overrides);
  RvfsBcResult out;
  out.search = rvfs(session, vclass, params);

  const BackupParams expert_params =
      BackupParams::make_from_log(eps_search, params.log_inv_delta_prime);
  const std::vector<int> ids = out.search.v_hat_ids;
  const FiniteVClass* cls = &vclass;
  ExpertFn expert = [ids, cls, expert_params](LocalSimSession& ses, int layer,
                                              int x) {
    StateValueFn f;
    const int next_level = layer + 2;
    if (next_level < static_cast<int>(ids.size()) && ids[next_level] >= 0) {
      const std::vector<double>* table = &cls->members[ids[next_level]].v[layer + 1];
      f = [table](int nx) { return (*table)[nx]; };
    }
    return greedy_action(ses, layer, x, f, expert_params);
  };

  const CloneParams clone_params =
      CloneParams::make(eps, delta, m.horizon, policy_class.size(), n_bc_override);
  CloneResult clone =
      behavior_cloning(session, policy_class, expert, clone_params);
  out.cloned_index = clone.selected_index;
  out.policy = std::move(clone.policy);
  out.mistakes = std::move(clone.mistakes);
  out.ledger = session.ledger();
  return out;
}

}  // namespace simlab
