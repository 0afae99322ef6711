#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "simlab/harness.hpp"
#include "simlab/oracle.hpp"
#include "simlab/serialize.hpp"

namespace {

using nlohmann::json;

json min_gap_json(const simlab::GapResult& gap) {
  json out;
  out["unique"] = gap.unique;
  if (std::isinf(gap.gap))
    out["gap"] = "infinity";  // single-action instances have no runner-up
  else
    out["gap"] = gap.gap;
  return out;
}

int do_gen(const simlab::ExperimentConfig& config) {
  const simlab::GeneratedInstance gen =
      simlab::generate_exbmdp(config.instance.targets, config.instance.gen_seed);
  const simlab::TabularMDP flat = simlab::flatten(gen.spec);
  const std::string dir = config.out_dir.empty() ? "." : config.out_dir;
  std::filesystem::create_directories(dir);

  const std::string bundle_path = dir + "/exbmdp.json";
  const std::string instance_path = dir + "/instance.json";
  json bundle{{"spec", gen.spec},
              {"decoders", gen.decoders},
              {"flattened", flat}};
  simlab::write_text_file(bundle_path, bundle.dump(2) + "\n");
  simlab::save_instance(flat, instance_path);

  json summary{{"bundle", bundle_path},
               {"instance", instance_path},
               {"seed", config.instance.gen_seed},
               {"latent_states", gen.spec.S},
               {"noise_states", gen.spec.Xi},
               {"actions", gen.spec.A},
               {"horizon", gen.spec.H},
               {"observations_per_layer", gen.spec.obs_count()},
               {"decoder_count", gen.decoders.size()},
               {"j_star", simlab::value_iteration(flat).jstar},
               {"weak_correlation", simlab::weak_correlation_coeff(gen.spec)},
               {"min_gap", min_gap_json(simlab::min_gap(flat))}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int do_oracle(const simlab::ExperimentConfig& config) {
  const simlab::ResolvedInstance inst =
      simlab::resolve_instance(config.instance);
  const simlab::ValueIterationResult vi = simlab::value_iteration(inst.mdp);

  std::vector<std::vector<int>> pistar(inst.mdp.horizon);
  for (int h = 0; h < inst.mdp.horizon; ++h) {
    pistar[h].resize(inst.mdp.states(h));
    for (int x = 0; x < inst.mdp.states(h); ++x)
      pistar[h][x] = vi.pistar.action_at(h, x);
  }

  std::vector<double> cov(inst.mdp.horizon), push(inst.mdp.horizon);
  for (int h = 0; h < inst.mdp.horizon; ++h) {
    cov[h] = simlab::coverability(inst.mdp, h);
    push[h] = simlab::pushforward_coverability(inst.mdp, h);
  }

  json out{{"horizon", inst.mdp.horizon},
           {"num_actions", inst.mdp.num_actions},
           {"states_per_layer", inst.mdp.states_per_layer},
           {"j_star", vi.jstar},
           {"pi_star", pistar},
           {"v_star", vi.vstar.v},
           {"q_star", vi.qstar.q},
           {"coverability",
            json{{"per_layer", cov}, {"max", simlab::coverability(inst.mdp)}}},
           {"pushforward_coverability",
            json{{"per_layer", push},
                 {"max", simlab::pushforward_coverability(inst.mdp)}}},
           {"min_gap", min_gap_json(simlab::min_gap(inst.mdp))}};
  if (inst.exo) {
    out["weak_correlation"] = simlab::weak_correlation_coeff(inst.spec);
    out["latent"] = json{{"S", inst.spec.S},
                         {"Xi", inst.spec.Xi},
                         {"A", inst.spec.A},
                         {"H", inst.spec.H}};
  }
  const std::string text = out.dump(2) + "\n";
  std::cout << text;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    simlab::write_text_file(config.out_dir + "/oracle.json", text);
  }
  return 0;
}

int do_run(const simlab::ExperimentConfig& config) {
  const std::vector<simlab::RunReport> reports = simlab::run_seeds(config);
  std::cout << simlab::summary_csv(reports);
  return 0;
}

int do_sweep(const simlab::ExperimentConfig& config) {
  const simlab::SweepResult result = simlab::sweep(config, config.sweep_eps);
  std::cout << simlab::sweep_summary_csv(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Layered tabular RL laboratory: simulator sessions with reset-to-"
      "observed-state access, exact planning oracles, and finite-class "
      "learners"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format;
  double scale = 1.0;

  app.add_option("--config", config_path, "Experiment configuration JSON");
  app.add_option("--seed", seed,
                 "Single run seed (run/sweep) or generator seed (gen)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--scale", scale, "Sample-count scale in (0, 1]");

  CLI::App* gen_cmd =
      app.add_subcommand("gen", "Generate an exogenous block MDP bundle");
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle", "Exact values, coefficients, and optimal policy of an instance");
  CLI::App* run_cmd = app.add_subcommand(
      "run", "Run the configured experiment across its seeds");
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Run the experiment across the configured accuracy grid");
  for (CLI::App* sub : {gen_cmd, oracle_cmd, run_cmd, sweep_cmd})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    simlab::ExperimentConfig config;
    if (!config_path.empty()) config = simlab::load_config(config_path);
    if (app.count("--seed") > 0) {
      if (gen_cmd->parsed())
        config.instance.gen_seed = seed;
      else
        config.seeds = {seed};
    }
    if (app.count("--out") > 0) config.out_dir = out_dir;
    if (app.count("--format") > 0) config.format = format;
    if (app.count("--scale") > 0) config.scale = scale;

    if (gen_cmd->parsed()) return do_gen(config);
    if (oracle_cmd->parsed()) return do_oracle(config);
    if (run_cmd->parsed()) return do_run(config);
    if (sweep_cmd->parsed()) return do_sweep(config);
    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
