#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "ringflow/config.hpp"
#include "ringflow/controllability.hpp"
#include "ringflow/ring_model.hpp"
#include "ringflow/sim/simulator.hpp"
#include "ringflow/synthesis.hpp"

namespace ringflow {

/// Everything a command needs, decoded from one configuration document.
struct ExperimentConfig {
  // [model]
  int n = 20;
  double length_m = 400.0;
  FleetDistribution fleet_dist;
  std::uint64_t heterogeneity_seed = 0;
  std::optional<std::vector<OvmParams>> explicit_fleet;

  // [target]
  double v_star = 15.0;
  std::optional<double> s1_star_override;

  // [controller]
  bool controller_enabled = true;
  PerformanceWeights weights;
  int topology_ahead = 5;
  int topology_behind = 5;
  std::optional<std::vector<int>> topology_set;
  SynthesisOptions synthesis;

  // [scenario]
  double duration_s = 100.0;
  double dt_s = 0.01;
  double noise_std = 0.0;
  sim::NoiseScaling noise_scaling = sim::NoiseScaling::PerStep;
  std::uint64_t rng_seed = 0;
  sim::InitialState initial = sim::InitialState::Equilibrium;
  double initial_velocity_jitter = 4.0;
  std::optional<sim::Perturbation> perturbation;
  std::vector<sim::ScheduleEntry> schedule;
  int output_stride = 1;
  double a_min = -5.0;
  double a_max = 2.0;
  bool emergency_braking = true;

  // [output]
  std::string out_dir = "out";
  bool write_trace = true;

  bool allow_unreachable = false;  // CLI flag, not a config key
  std::string config_hash;
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_doc(const ConfigDoc& doc);

/// Fleet realization (explicit overrides or seeded heterogeneity draws).
std::vector<OvmParams> build_fleet(const ExperimentConfig& cfg);

/// Linearized ring at the target velocity. Enforces the reachable-velocity
/// gate unless the config allows overriding it.
RingModel build_model(const ExperimentConfig& cfg,
                      const std::vector<OvmParams>& fleet);

SparsityPattern build_pattern(const ExperimentConfig& cfg);

sim::Scenario build_scenario(const ExperimentConfig& cfg,
                             const RingModel& model,
                             const std::vector<OvmParams>& fleet,
                             std::optional<Eigen::RowVectorXd> gain);

// Command bodies shared by the CLI and the tests. Each document carries the
// config hash so pipeline stages can be matched up after the fact.
nlohmann::json cmd_analyze(const ExperimentConfig& cfg);
nlohmann::json cmd_reach(const ExperimentConfig& cfg);
nlohmann::json cmd_synthesize(const ExperimentConfig& cfg,
                              SynthesisResult* result_out = nullptr);
nlohmann::json cmd_simulate(const ExperimentConfig& cfg,
                            const std::string& out_dir);
nlohmann::json cmd_experiment(const ExperimentConfig& cfg, char which,
                              const std::string& out_dir);

nlohmann::json metrics_to_json(const sim::Metrics& m);
void write_json(const nlohmann::json& doc, const std::string& path);

}  // namespace ringflow
