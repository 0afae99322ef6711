#include "simlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <utility>

#include "simlab/errors.hpp"
#include "simlab/imitation.hpp"
#include "simlab/oracle.hpp"
#include "simlab/rvfs_exo.hpp"
#include "simlab/serialize.hpp"
#include "simlab/simgolf.hpp"

namespace simlab {

using nlohmann::json;

// --------------------------------------------------------------------------
// Configuration serialization.
// --------------------------------------------------------------------------

void to_json(json& j, const GeneratorTargets& t) {
  j = json{{"S", t.S},
           {"Xi", t.Xi},
           {"A", t.A},
           {"H", t.H},
           {"lambda", t.lambda},
           {"gap", t.gap},
           {"reward_law", to_string(t.law)},
           {"num_distractor_decoders", t.num_distractor_decoders}};
}

void from_json(const json& j, GeneratorTargets& t) {
  const GeneratorTargets d;
  t.S = j.value("S", d.S);
  t.Xi = j.value("Xi", d.Xi);
  t.A = j.value("A", d.A);
  t.H = j.value("H", d.H);
  t.lambda = j.value("lambda", d.lambda);
  t.gap = j.value("gap", d.gap);
  t.law = reward_law_from_string(j.value("reward_law", to_string(d.law)));
  t.num_distractor_decoders =
      j.value("num_distractor_decoders", d.num_distractor_decoders);
}

void to_json(json& j, const InstanceSource& s) {
  j = json{{"kind", s.kind},
           {"path", s.path},
           {"targets", s.targets},
           {"gen_seed", s.gen_seed}};
}

void from_json(const json& j, InstanceSource& s) {
  const InstanceSource d;
  s.kind = j.value("kind", d.kind);
  s.path = j.value("path", d.path);
  if (j.contains("targets")) j.at("targets").get_to(s.targets);
  s.gen_seed = j.value("gen_seed", d.gen_seed);
}

void to_json(json& j, const RvfsOverrides& o) {
  j = json{{"cap_n_test", o.cap_n_test},
           {"cap_n_reg", o.cap_n_reg},
           {"cap_n_est", o.cap_n_est},
           {"eps_reg_sq_override", o.eps_reg_sq_override},
           {"budget_guard", o.budget_guard},
           {"max_restarts", o.max_restarts}};
}

void from_json(const json& j, RvfsOverrides& o) {
  const RvfsOverrides d;
  o.cap_n_test = j.value("cap_n_test", d.cap_n_test);
  o.cap_n_reg = j.value("cap_n_reg", d.cap_n_reg);
  o.cap_n_est = j.value("cap_n_est", d.cap_n_est);
  o.eps_reg_sq_override = j.value("eps_reg_sq_override", d.eps_reg_sq_override);
  o.budget_guard = j.value("budget_guard", d.budget_guard);
  o.max_restarts = j.value("max_restarts", d.max_restarts);
}

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"algorithm", c.algorithm},
           {"seeds", c.seeds},
           {"instance", c.instance},
           {"eps", c.eps},
           {"delta", c.delta},
           {"scale", c.scale},
           {"scale_n", c.scale_n},
           {"scale_k", c.scale_k},
           {"grid_step", c.grid_step},
           {"class_budget", c.class_budget},
           {"policy_budget", c.policy_budget},
           {"max_exhaustive", c.max_exhaustive},
           {"inject_optimal", c.inject_optimal},
           {"class_seed", c.class_seed},
           {"rvfs", c.rvfs},
           {"n_bc_override", c.n_bc_override},
           {"sweep_eps", c.sweep_eps},
           {"out_dir", c.out_dir},
           {"format", c.format}};
}

void from_json(const json& j, ExperimentConfig& c) {
  const ExperimentConfig d;
  c.algorithm = j.value("algorithm", d.algorithm);
  if (j.contains("seeds")) {
    j.at("seeds").get_to(c.seeds);
  } else if (j.contains("seed")) {
    c.seeds = {j.at("seed").get<std::uint64_t>()};
  } else {
    c.seeds = d.seeds;
  }
  if (j.contains("instance")) j.at("instance").get_to(c.instance);
  c.eps = j.value("eps", d.eps);
  c.delta = j.value("delta", d.delta);
  c.scale = j.value("scale", d.scale);
  c.scale_n = j.value("scale_n", d.scale_n);
  c.scale_k = j.value("scale_k", d.scale_k);
  c.grid_step = j.value("grid_step", d.grid_step);
  c.class_budget = j.value("class_budget", d.class_budget);
  c.policy_budget = j.value("policy_budget", d.policy_budget);
  c.max_exhaustive = j.value("max_exhaustive", d.max_exhaustive);
  c.inject_optimal = j.value("inject_optimal", d.inject_optimal);
  c.class_seed = j.value("class_seed", d.class_seed);
  if (j.contains("rvfs")) j.at("rvfs").get_to(c.rvfs);
  c.n_bc_override = j.value("n_bc_override", d.n_bc_override);
  c.sweep_eps = j.value("sweep_eps", d.sweep_eps);
  c.out_dir = j.value("out_dir", d.out_dir);
  c.format = j.value("format", d.format);
}

namespace {

bool known_algorithm(const std::string& name) {
  return name == "simgolf" || name == "rvfs_bc" || name == "rvfs_exo_bc" ||
         name == "behavior_cloning";
}

bool known_instance_kind(const std::string& kind) {
  return kind == "twochain" || kind == "gapped-twochain" || kind == "file" ||
         kind == "exbmdp-file" || kind == "generator";
}

bool exogenous_kind(const std::string& kind) {
  return kind == "exbmdp-file" || kind == "generator";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!known_algorithm(algorithm))
    throw config_error("config: unknown algorithm '" + algorithm + "'");
  if (seeds.empty()) throw config_error("config: no seeds");
  if (!known_instance_kind(instance.kind))
    throw config_error("config: unknown instance kind '" + instance.kind + "'");
  if ((instance.kind == "file" || instance.kind == "exbmdp-file") &&
      instance.path.empty())
    throw config_error("config: instance kind '" + instance.kind +
                       "' needs a path");
  if (algorithm == "rvfs_exo_bc" && !exogenous_kind(instance.kind))
    throw config_error(
        "config: rvfs_exo_bc needs an exogenous instance source "
        "(exbmdp-file or generator)");
  if (!(eps > 0.0) || eps >= 1.0)
    throw config_error("config: eps must lie in (0, 1)");
  if (!(delta > 0.0) || delta >= 1.0)
    throw config_error("config: delta must lie in (0, 1)");
  if (!(scale > 0.0) || scale > 1.0)
    throw config_error("config: scale must lie in (0, 1]");
  if (!(scale_n > 0.0) || scale_n > 1.0)
    throw config_error("config: scale_n must lie in (0, 1]");
  if (!(scale_k > 0.0)) throw config_error("config: scale_k must be positive");
  if (grid_step < 0.0) throw config_error("config: negative grid step");
  if (class_budget < 0) throw config_error("config: negative class budget");
  if (policy_budget < 0) throw config_error("config: negative policy budget");
  if (max_exhaustive < 1)
    throw config_error("config: max_exhaustive must be at least 1");
  if (rvfs.cap_n_test < 0 || rvfs.cap_n_reg < 0 || rvfs.cap_n_est < 0)
    throw config_error("config: negative sample-count cap");
  if (rvfs.max_restarts < 1)
    throw config_error("config: max_restarts must be at least 1");
  if (n_bc_override < 0) throw config_error("config: negative n_bc_override");
  if (sweep_eps.empty()) throw config_error("config: empty sweep grid");
  for (double e : sweep_eps)
    if (!(e > 0.0) || e >= 1.0)
      throw config_error("config: sweep grid entries must lie in (0, 1)");
  if (format != "csv" && format != "json")
    throw config_error("config: format must be csv or json");
}

ExperimentConfig config_from_text(const std::string& text) {
  ExperimentConfig config;
  try {
    json::parse(text).get_to(config);
  } catch (const json::exception& e) {
    throw config_error(std::string("config JSON malformed: ") + e.what());
  }
  config.validate();
  return config;
}

std::string config_to_text(const ExperimentConfig& config) {
  return json(config).dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_text(read_text_file(path));
}

// --------------------------------------------------------------------------
// Report serialization.
// --------------------------------------------------------------------------

void to_json(json& j, const RunReport& report) {
  j = json{{"config", report.config},
           {"seed", report.seed},
           {"algorithm", report.algorithm},
           {"j_star", report.j_star},
           {"j_output", report.j_output},
           {"suboptimality", report.suboptimality},
           {"ledger", report.ledger},
           {"diagnostics", report.diagnostics},
           {"wall_time_sec", report.wall_time_sec}};
}

void from_json(const json& j, RunReport& report) {
  j.at("config").get_to(report.config);
  j.at("seed").get_to(report.seed);
  j.at("algorithm").get_to(report.algorithm);
  j.at("j_star").get_to(report.j_star);
  j.at("j_output").get_to(report.j_output);
  j.at("suboptimality").get_to(report.suboptimality);
  j.at("ledger").get_to(report.ledger);
  report.diagnostics = j.at("diagnostics");
  j.at("wall_time_sec").get_to(report.wall_time_sec);
}

std::string report_to_text(const RunReport& report) {
  return json(report).dump(2) + "\n";
}

RunReport report_from_text(const std::string& text) {
  RunReport report;
  try {
    json::parse(text).get_to(report);
  } catch (const json::exception& e) {
    throw validation_error(std::string("report JSON malformed: ") + e.what());
  }
  return report;
}

// --------------------------------------------------------------------------
// Class construction.
// --------------------------------------------------------------------------

double resolve_grid_step(double requested, double eps, int horizon) {
  if (requested > 0.0) return requested;
  if (!(eps > 0.0)) throw config_error("grid step: eps must be positive");
  if (horizon < 1) throw config_error("grid step: horizon must be positive");
  const double pieces = std::ceil(4.0 * horizon / eps - 1e-12);
  return static_cast<double>(horizon) / pieces;
}

namespace {

std::vector<double> grid_values(int horizon, double grid_step) {
  if (!(grid_step > 0.0))
    throw config_error("tabular class: grid step must be positive");
  const double ratio = horizon / grid_step;
  const long long n = std::llround(ratio);
  if (n < 1 || std::fabs(ratio - static_cast<double>(n)) > 1e-9)
    throw config_error("tabular class: grid step must divide the horizon");
  std::vector<double> levels(static_cast<std::size_t>(n) + 1);
  for (std::size_t i = 0; i < levels.size(); ++i)
    levels[i] = grid_step * static_cast<double>(i);
  return levels;
}

}  // namespace

FiniteQClass build_tabular_q_class(const TabularMDP& m, double grid_step,
                                   int budget, bool include_optimal, Rng rng) {
  m.validate();
  if (budget < 0) throw config_error("tabular class: negative budget");
  const auto levels = grid_values(m.horizon, grid_step);
  const int n_levels = static_cast<int>(levels.size());
  FiniteQClass cls;
  cls.origin = "discretized";
  if (include_optimal) cls.members.push_back(value_iteration(m).qstar);
  for (int b = 0; b < budget; ++b) {
    QTable t;
    t.q.resize(m.horizon);
    for (int h = 0; h < m.horizon; ++h) {
      t.q[h].assign(m.states(h), std::vector<double>(m.num_actions, 0.0));
      for (int x = 0; x < m.states(h); ++x)
        for (int a = 0; a < m.num_actions; ++a)
          t.q[h][x][a] = levels[rng.uniform_int(n_levels)];
    }
    cls.members.push_back(std::move(t));
  }
  if (cls.members.empty())
    throw config_error("tabular class: no members requested");
  return cls;
}

FiniteVClass build_tabular_v_class(const TabularMDP& m, double grid_step,
                                   int budget, bool include_optimal, Rng rng) {
  m.validate();
  if (budget < 0) throw config_error("tabular class: negative budget");
  const auto levels = grid_values(m.horizon, grid_step);
  const int n_levels = static_cast<int>(levels.size());
  FiniteVClass cls;
  cls.origin = "discretized";
  if (include_optimal) cls.members.push_back(value_iteration(m).vstar);
  for (int b = 0; b < budget; ++b) {
    VTable t;
    t.v.resize(m.horizon);
    for (int h = 0; h < m.horizon; ++h) {
      t.v[h].assign(m.states(h), 0.0);
      for (int x = 0; x < m.states(h); ++x)
        t.v[h][x] = levels[rng.uniform_int(n_levels)];
    }
    cls.members.push_back(std::move(t));
  }
  if (cls.members.empty())
    throw config_error("tabular class: no members requested");
  return cls;
}

FinitePolicyClass build_tabular_policy_class(const TabularMDP& m, int budget,
                                             bool include_optimal, Rng rng) {
  m.validate();
  if (budget < 0) throw config_error("tabular class: negative budget");
  FinitePolicyClass cls;
  if (include_optimal) cls.members.push_back(value_iteration(m).pistar);
  for (int b = 0; b < budget; ++b) {
    std::vector<std::vector<int>> actions(m.horizon);
    for (int h = 0; h < m.horizon; ++h) {
      actions[h].resize(m.states(h));
      for (int x = 0; x < m.states(h); ++x)
        actions[h][x] = rng.uniform_int(m.num_actions);
    }
    cls.members.push_back(deterministic_policy(m, actions));
  }
  if (cls.members.empty())
    throw config_error("tabular class: no members requested");
  return cls;
}

// --------------------------------------------------------------------------
// Experiment execution.
// --------------------------------------------------------------------------

ResolvedInstance resolve_instance(const InstanceSource& src) {
  ResolvedInstance out;
  if (src.kind == "twochain") {
    out.mdp = make_twochain();
  } else if (src.kind == "gapped-twochain") {
    out.mdp = make_gapped_twochain();
  } else if (src.kind == "file") {
    out.mdp = load_instance(src.path);
  } else if (src.kind == "exbmdp-file") {
    json bundle;
    try {
      bundle = json::parse(read_text_file(src.path));
      bundle.at("spec").get_to(out.spec);
      bundle.at("decoders").get_to(out.decoders);
    } catch (const json::exception& e) {
      throw validation_error(std::string("bundle JSON malformed: ") + e.what());
    }
    out.spec.validate();
    out.exo = true;
    out.mdp = flatten(out.spec);
  } else if (src.kind == "generator") {
    GeneratedInstance gen = generate_exbmdp(src.targets, src.gen_seed);
    out.spec = std::move(gen.spec);
    out.decoders = std::move(gen.decoders);
    out.exo = true;
    out.mdp = flatten(out.spec);
  } else {
    throw config_error("unknown instance kind '" + src.kind + "'");
  }
  return out;
}

namespace {

FiniteQClass make_q_class(const ExperimentConfig& c,
                          const ResolvedInstance& inst, double step, Rng rng) {
  if (inst.exo) {
    LatentQTable latent;
    const LatentQTable* inject = nullptr;
    if (c.inject_optimal) {
      latent = latent_qstar(inst.spec);
      inject = &latent;
    }
    return build_exbmdp_q_class(inst.decoders, inst.spec.S, inst.spec.A,
                                inst.spec.H, step, c.class_budget, rng, inject);
  }
  return build_tabular_q_class(inst.mdp, step, c.class_budget,
                               c.inject_optimal, rng);
}

FiniteVClass make_v_class(const ExperimentConfig& c,
                          const ResolvedInstance& inst, double step, Rng rng) {
  if (inst.exo) {
    LatentVTable latent;
    const LatentVTable* inject = nullptr;
    if (c.inject_optimal) {
      latent = latent_vstar(inst.spec);
      inject = &latent;
    }
    return build_exbmdp_v_class(inst.decoders, inst.spec.S, inst.spec.H, step,
                                c.class_budget, rng, inject);
  }
  return build_tabular_v_class(inst.mdp, step, c.class_budget,
                               c.inject_optimal, rng);
}

FinitePolicyClass make_policy_class(const ExperimentConfig& c,
                                    const ResolvedInstance& inst, Rng rng) {
  if (inst.exo)
    return build_endogenous_policy_class(
        inst.decoders, inst.spec.S, inst.spec.A, inst.spec.H,
        inst.spec.obs_count(), c.max_exhaustive, c.policy_budget, rng);
  return build_tabular_policy_class(inst.mdp, c.policy_budget,
                                    c.inject_optimal, rng);
}

json ledger_fields(const SampleLedger& ledger) {
  return json{{"episodes", ledger.episodes_started},
              {"transitions", ledger.transitions_sampled},
              {"resets", ledger.resets}};
}

json rvfs_trace_json(const std::vector<RvfsTraceRow>& trace) {
  json rows = json::array();
  for (const auto& row : trace) {
    json r = ledger_fields(row.ledger);
    r["event"] = row.event;
    r["level"] = row.level;
    r["core_size"] = row.core_size;
    r["t_level"] = row.t_level;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  ResolvedInstance inst = resolve_instance(config.instance);
  const ValueIterationResult vi = value_iteration(inst.mdp);

  RunReport report;
  report.config = config;
  report.config.seeds = {seed};
  report.seed = seed;
  report.algorithm = config.algorithm;
  report.j_star = vi.jstar;

  Rng class_rng(config.class_seed);
  const double step =
      resolve_grid_step(config.grid_step, config.eps, inst.mdp.horizon);
  json diag = json::object();

  if (config.algorithm == "simgolf") {
    const FiniteQClass qcls = make_q_class(config, inst, step, class_rng);
    const SimGolfParams params = SimGolfParams::make(
        config.eps, config.delta, qcls.size(), coverability(inst.mdp),
        inst.mdp.horizon, config.scale_n, config.scale_k);
    LocalSimSession session(inst.mdp, seed);
    const SimGolfResult res = run_simgolf(session, qcls, params);
    report.j_output = res.mixture_j;
    report.ledger = res.ledger;
    diag["params"] = json{{"n_iters", params.n_iters},
                          {"k_draws", params.k_draws},
                          {"beta", params.beta},
                          {"beta_stat", params.beta_stat},
                          {"c_cov", params.c_cov},
                          {"class_size", qcls.size()}};
    json trace = json::array();
    for (const auto& row : res.trace)
      trace.push_back(json{{"t", row.t},
                           {"active_set_size", row.active_size},
                           {"j_pi_t_exact", row.j_exact},
                           {"residual_max", row.residual_max}});
    diag["trace"] = std::move(trace);
    diag["selected"] = res.selected;
    diag["final_active"] =
        std::vector<int>(res.final_active.begin(), res.final_active.end());
  } else if (config.algorithm == "rvfs_bc") {
    const FiniteVClass vcls = make_v_class(config, inst, step, class_rng);
    const FinitePolicyClass pcls =
        make_policy_class(config, inst, class_rng.substream("policies"));
    const double c_push = pushforward_coverability(inst.mdp);
    LocalSimSession session(inst.mdp, seed);
    const RvfsBcResult res =
        rvfs_bc(session, vcls, pcls, config.eps, config.delta, c_push,
                config.scale, config.rvfs, config.n_bc_override);
    report.j_output = policy_eval(inst.mdp, res.policy).j;
    report.ledger = res.ledger;
    diag["c_push"] = c_push;
    diag["cloned_index"] = res.cloned_index;
    diag["mistakes"] = res.mistakes;
    diag["v_hat_ids"] = res.search.v_hat_ids;
    diag["refit_count"] = res.search.refit_count;
    diag["restart_count"] = res.search.restart_count;
    diag["budget_violations"] = res.search.budget_violations;
    std::vector<std::size_t> core_sizes;
    for (const auto& level : res.search.core) core_sizes.push_back(level.size());
    diag["core_sizes"] = core_sizes;
    diag["trace"] = rvfs_trace_json(res.search.trace);
  } else if (config.algorithm == "rvfs_exo_bc") {
    if (!inst.exo)
      throw config_error("rvfs_exo_bc needs an exogenous instance source");
    const FiniteVClass vcls = make_v_class(config, inst, step, class_rng);
    const FinitePolicyClass pcls =
        make_policy_class(config, inst, class_rng.substream("policies"));
    const double c_exo = weak_correlation_coeff(inst.spec);
    const ExoBcResult res = rvfs_exo_bc(
        inst.spec, vcls, pcls, config.eps, config.delta, c_exo, config.scale,
        config.rvfs, seed, config.n_bc_override);
    report.j_output = policy_eval(inst.mdp, res.best_policy).j;
    SampleLedger total;
    json attempts = json::array();
    for (std::size_t i = 0; i < res.iterations.size(); ++i) {
      const BoostIteration& it = res.iterations[i];
      total.episodes_started += it.ledger.episodes_started;
      total.transitions_sampled += it.ledger.transitions_sampled;
      total.resets += it.ledger.resets;
      json row = ledger_fields(it.ledger);
      row["attempt"] = i;
      row["zeta"] = it.zeta;
      row["snapped"] = it.snapped;
      row["cloned_index"] = it.cloned_index;
      row["j_hat"] = it.j_hat;
      row["j_exact"] = it.j_exact;
      row["v_hat_ids"] = it.v_hat_ids;
      attempts.push_back(std::move(row));
    }
    report.ledger = total;
    diag["c_exo"] = c_exo;
    diag["attempts"] = std::move(attempts);
    diag["best_index"] = res.best_index;
    diag["boost"] = json{{"n_boost", res.boost.n_boost},
                         {"n_eval", res.boost.n_eval},
                         {"n_bc", res.boost.n_bc},
                         {"vacuous_amplification",
                          res.boost.vacuous_amplification}};
  } else {  // behavior_cloning
    const FinitePolicyClass pcls =
        make_policy_class(config, inst, class_rng.substream("policies"));
    const CloneParams params =
        CloneParams::make(config.eps, config.delta, inst.mdp.horizon,
                          pcls.size(), config.n_bc_override);
    LocalSimSession session(inst.mdp, seed);
    const PolicyTable expert_table = vi.pistar;
    const ExpertFn expert = [&expert_table](LocalSimSession&, int h, int x) {
      return expert_table.action_at(h, x);
    };
    const CloneResult res = behavior_cloning(session, pcls, expert, params);
    report.j_output = policy_eval(inst.mdp, res.policy).j;
    report.ledger = session.ledger();
    diag["n_bc"] = params.n_bc;
    diag["selected"] = res.selected_index;
    diag["mistakes"] = res.mistakes;
    diag["corpus_trajectories"] = res.corpus.size();
  }

  report.suboptimality = report.j_star - report.j_output;
  report.diagnostics = std::move(diag);
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

// --------------------------------------------------------------------------
// Emission.
// --------------------------------------------------------------------------

namespace {

std::string integer_field(const json& v) {
  if (v.is_number_unsigned())
    return std::to_string(v.get<unsigned long long>());
  return std::to_string(v.get<long long>());
}

}  // namespace

std::string report_to_csv(const RunReport& report) {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  const json& d = report.diagnostics;
  if (report.algorithm == "simgolf") {
    header = {"t", "active_set_size", "j_pi_t_exact", "residual_max"};
    if (d.contains("trace"))
      for (const auto& r : d.at("trace"))
        rows.push_back({integer_field(r.at("t")),
                        integer_field(r.at("active_set_size")),
                        format_double(r.at("j_pi_t_exact").get<double>()),
                        format_double(r.at("residual_max").get<double>())});
  } else if (report.algorithm == "rvfs_bc") {
    header = {"event",    "level",       "core_size", "t_level",
              "episodes", "transitions", "resets"};
    if (d.contains("trace"))
      for (const auto& r : d.at("trace"))
        rows.push_back({r.at("event").get<std::string>(),
                        integer_field(r.at("level")),
                        integer_field(r.at("core_size")),
                        integer_field(r.at("t_level")),
                        integer_field(r.at("episodes")),
                        integer_field(r.at("transitions")),
                        integer_field(r.at("resets"))});
  } else if (report.algorithm == "rvfs_exo_bc") {
    header = {"attempt",  "snapped",     "j_hat", "j_exact",
              "episodes", "transitions", "resets"};
    if (d.contains("attempts"))
      for (const auto& r : d.at("attempts"))
        rows.push_back({integer_field(r.at("attempt")),
                        r.at("snapped").get<bool>() ? "1" : "0",
                        format_double(r.at("j_hat").get<double>()),
                        format_double(r.at("j_exact").get<double>()),
                        integer_field(r.at("episodes")),
                        integer_field(r.at("transitions")),
                        integer_field(r.at("resets"))});
  } else if (report.algorithm == "behavior_cloning") {
    header = {"policy_id", "mistakes"};
    if (d.contains("mistakes")) {
      std::size_t id = 0;
      for (const auto& r : d.at("mistakes"))
        rows.push_back({std::to_string(id++), integer_field(r)});
    }
  } else {
    throw config_error("report_to_csv: unknown algorithm '" +
                       report.algorithm + "'");
  }
  return csv_table(header, rows);
}

void emit_metrics(const RunReport& report, const std::string& path,
                  const std::string& format) {
  if (format == "json") {
    write_text_file(path, report_to_text(report));
  } else if (format == "csv") {
    write_text_file(path, report_to_csv(report));
  } else {
    throw config_error("emit_metrics: format must be csv or json");
  }
}

std::string summary_csv(const std::vector<RunReport>& reports) {
  const std::vector<std::string> header = {
      "seed",     "algorithm",   "eps",    "j_star",       "j_output",
      "suboptimality", "episodes", "transitions", "resets", "wall_time_sec"};
  std::vector<std::vector<std::string>> rows;
  for (const RunReport& r : reports)
    rows.push_back({std::to_string(r.seed), r.algorithm,
                    format_double(r.config.eps), format_double(r.j_star),
                    format_double(r.j_output), format_double(r.suboptimality),
                    std::to_string(r.ledger.episodes_started),
                    std::to_string(r.ledger.transitions_sampled),
                    std::to_string(r.ledger.resets),
                    format_double(r.wall_time_sec)});
  return csv_table(header, rows);
}

std::vector<RunReport> run_seeds(const ExperimentConfig& config) {
  config.validate();
  std::vector<RunReport> reports;
  reports.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds)
    reports.push_back(run_experiment(config, seed));
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    for (const RunReport& r : reports) {
      const std::string path = config.out_dir + "/report_seed" +
                               std::to_string(r.seed) + "." + config.format;
      emit_metrics(r, path, config.format);
    }
    write_text_file(config.out_dir + "/summary.csv", summary_csv(reports));
  }
  return reports;
}

// --------------------------------------------------------------------------
// Sweeps.
// --------------------------------------------------------------------------

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) throw config_error("median of no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

SweepResult sweep(const ExperimentConfig& base,
                  const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw config_error("sweep: empty eps grid");
  SweepResult out;
  out.eps_grid = eps_grid;
  for (double eps : eps_grid) {
    ExperimentConfig config = base;
    config.eps = eps;
    config.out_dir.clear();  // the sweep controls its own file layout
    out.reports.push_back(run_seeds(config));
    std::vector<double> subopts;
    for (const RunReport& r : out.reports.back())
      subopts.push_back(r.suboptimality);
    out.median_suboptimality.push_back(median_of(std::move(subopts)));
  }
  if (!base.out_dir.empty()) {
    std::filesystem::create_directories(base.out_dir);
    std::vector<RunReport> flat;
    for (std::size_t i = 0; i < out.reports.size(); ++i) {
      for (const RunReport& r : out.reports[i]) {
        const std::string path = base.out_dir + "/report_eps" +
                                 std::to_string(i) + "_seed" +
                                 std::to_string(r.seed) + "." + base.format;
        emit_metrics(r, path, base.format);
        flat.push_back(r);
      }
    }
    write_text_file(base.out_dir + "/sweep.csv", summary_csv(flat));
    write_text_file(base.out_dir + "/sweep_summary.csv",
                    sweep_summary_csv(out));
  }
  return out;
}

std::string sweep_summary_csv(const SweepResult& result) {
  const std::vector<std::string> header = {"eps", "median_suboptimality",
                                           "num_seeds"};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < result.eps_grid.size(); ++i)
    rows.push_back({format_double(result.eps_grid[i]),
                    format_double(result.median_suboptimality[i]),
                    std::to_string(result.reports[i].size())});
  return csv_table(header, rows);
}

}  // namespace simlab
