#include "simlab/imitation.hpp"

#include <cmath>

#include "simlab/errors.hpp"

namespace simlab {

CloneParams CloneParams::make(double eps, double delta, int horizon,
                              std::size_t policy_class_size,
                              long long n_bc_override) {
  if (!(eps > 0.0)) throw config_error("cloning: eps must be positive");
  if (!(delta > 0.0) || delta >= 1.0)
    throw config_error("cloning: delta must lie in (0, 1)");
  if (horizon < 1) throw config_error("cloning: horizon must be positive");
  if (policy_class_size == 0) throw config_error("cloning: empty policy class");
  CloneParams p;
  p.eps = eps;
  p.delta = delta;
  if (n_bc_override > 0) {
    p.n_bc = n_bc_override;
  } else {
    const double h2 = static_cast<double>(horizon) * horizon;
    const double n = std::ceil(
        16.0 * h2 *
        std::log(2.0 * static_cast<double>(policy_class_size) / delta) / eps);
    if (!(n < 9e18)) throw config_error("cloning: required episode count overflows");
    p.n_bc = static_cast<long long>(n);
  }
  return p;
}

CloneResult behavior_cloning(LocalSimSession& session,
                             const FinitePolicyClass& policy_class,
                             const ExpertFn& expert, const CloneParams& params) {
  if (policy_class.size() == 0)
    throw config_error("cloning: empty policy class");
  if (!expert) throw config_error("cloning: missing expert");
  CloneResult out;
  out.corpus.reserve(params.n_bc);
  for (long long i = 0; i < params.n_bc; ++i) {
    session.start_episode();
    out.corpus.push_back(session.rollout(expert));
  }
  out.mistakes.assign(policy_class.size(), 0);
  for (std::size_t i = 0; i < policy_class.size(); ++i) {
    const PolicyTable& pi = policy_class.members[i];
    for (const Trajectory& traj : out.corpus)
      for (const StepRecord& step : traj)
        if (pi.action_at(step.layer, step.state) != step.action)
          ++out.mistakes[i];
  }
  out.selected_index = 0;
  for (std::size_t i = 1; i < policy_class.size(); ++i)
    if (out.mistakes[i] < out.mistakes[out.selected_index])
      out.selected_index = static_cast<int>(i);
  out.policy = policy_class.members[out.selected_index];
  return out;
}

}  // namespace simlab
