#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "simlab/classes.hpp"
#include "simlab/exbmdp.hpp"
#include "simlab/mdp.hpp"
#include "simlab/rvfs.hpp"
#include "simlab/session.hpp"

namespace simlab {

// Where the experiment's instance comes from. `twochain` and
// `gapped-twochain` are the built-in references; `file` loads a tabular
// instance JSON; `exbmdp-file` loads a generated bundle (spec + decoders);
// `generator` builds a fresh exogenous block MDP from targets.
struct InstanceSource {
  std::string kind = "twochain";
  std::string path;
  GeneratorTargets targets;
  std::uint64_t gen_seed = 1;
};

struct ExperimentConfig {
  std::string algorithm = "simgolf";  // simgolf | rvfs_bc | rvfs_exo_bc |
                                      // behavior_cloning
  std::vector<std::uint64_t> seeds = {1};
  InstanceSource instance;
  double eps = 0.1;
  double delta = 0.05;

  double scale = 1.0;    // recursive-search sample-count scale
  double scale_n = 1.0;  // optimistic-search iteration scale
  double scale_k = 1.0;  // optimistic-search per-site draw scale

  // Function-class construction. grid_step 0 resolves to the finest step
  // at most eps / 4 that divides the horizon evenly.
  double grid_step = 0.0;
  int class_budget = 8;     // sampled value tables (per decoder when induced)
  int policy_budget = 16;   // sampled policies when not exhaustive
  long long max_exhaustive = 4096;
  bool inject_optimal = true;
  std::uint64_t class_seed = 0xC1A55ULL;

  RvfsOverrides rvfs;           // desk-scale caps for the recursive searches
  long long n_bc_override = 0;  // cloning episodes (0 = formula)

  // Accuracy grid the sweep command walks, finest last.
  std::vector<double> sweep_eps = {0.5, 0.25, 0.1};

  std::string out_dir;        // empty = run_seeds writes no files
  std::string format = "csv";  // csv | json

  // Structural checks plus algorithm-specific ones (e.g. the exogenous
  // pipeline needs an exogenous instance source).
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& config);
void from_json(const nlohmann::json& j, ExperimentConfig& config);

// The instance an experiment runs on. For exogenous sources the latent spec
// and decoder class ride along with the flattened observation-level model.
struct ResolvedInstance {
  TabularMDP mdp;
  bool exo = false;
  ExBMDPSpec spec;
  DecoderClass decoders;
};

ResolvedInstance resolve_instance(const InstanceSource& source);

ExperimentConfig config_from_text(const std::string& text);
std::string config_to_text(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

struct RunReport {
  ExperimentConfig config;  // echo; seeds collapsed to the seed that ran
  std::uint64_t seed = 0;
  std::string algorithm;
  double j_star = 0.0;    // exact optimal value of the instance
  double j_output = 0.0;  // exact value of the learned policy / mixture
  double suboptimality = 0.0;
  SampleLedger ledger;  // every simulator draw the run charged
  nlohmann::json diagnostics = nlohmann::json::object();
  double wall_time_sec = 0.0;
};

void to_json(nlohmann::json& j, const RunReport& report);
void from_json(const nlohmann::json& j, RunReport& report);

// Builds the instance and classes, runs the selected algorithm through a
// fresh session, and evaluates the result exactly.
RunReport run_experiment(const ExperimentConfig& config, std::uint64_t seed);

// All configured seeds in order. When config.out_dir is nonempty, writes
// report_seed<k>.<format> per seed plus summary.csv.
std::vector<RunReport> run_seeds(const ExperimentConfig& config);

// Pretty JSON of the full report; loads back field-wise.
std::string report_to_text(const RunReport& report);
RunReport report_from_text(const std::string& text);

// Fixed-schema diagnostics table; header-only when the run produced no rows.
//   simgolf:          t,active_set_size,j_pi_t_exact,residual_max
//   rvfs_bc:          event,level,core_size,t_level,episodes,transitions,resets
//   rvfs_exo_bc:      attempt,snapped,j_hat,j_exact,episodes,transitions,resets
//   behavior_cloning: policy_id,mistakes
std::string report_to_csv(const RunReport& report);

// Writes the report at `path` in the requested format.
void emit_metrics(const RunReport& report, const std::string& path,
                  const std::string& format);

// One row per report: seed,algorithm,eps,j_star,j_output,suboptimality,
// episodes,transitions,resets,wall_time_sec.
std::string summary_csv(const std::vector<RunReport>& reports);

struct SweepResult {
  std::vector<double> eps_grid;
  std::vector<std::vector<RunReport>> reports;  // [eps index][seed index]
  std::vector<double> median_suboptimality;     // per eps
};

// Runs the base config once per grid value with eps overridden; when
// base.out_dir is set, writes per-run reports plus sweep.csv and
// sweep_summary.csv.
SweepResult sweep(const ExperimentConfig& base,
                  const std::vector<double>& eps_grid);
std::string sweep_summary_csv(const SweepResult& result);

// Classes for plain tabular instances: optionally the exact optimal member,
// plus seeded tables with values on the {0, grid_step, ..., H} grid (and
// seeded deterministic tables for policies).
FiniteQClass build_tabular_q_class(const TabularMDP& m, double grid_step,
                                   int budget, bool include_optimal, Rng rng);
FiniteVClass build_tabular_v_class(const TabularMDP& m, double grid_step,
                                   int budget, bool include_optimal, Rng rng);
FinitePolicyClass build_tabular_policy_class(const TabularMDP& m, int budget,
                                             bool include_optimal, Rng rng);

// The finest grid step at most eps / 4 dividing the horizon evenly.
double resolve_grid_step(double requested, double eps, int horizon);

}  // namespace simlab
