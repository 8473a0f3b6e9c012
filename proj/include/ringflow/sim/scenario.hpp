#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ringflow/ring_model.hpp"

namespace ringflow::sim {

/// A braking disturbance forced onto one vehicle for a time window.
struct Perturbation {
  int vehicle = 2;        // 1-based, matching the ring convention
  double start_s = 20.0;
  double decel = -3.0;    // m/s^2, overrides the vehicle's own law
  double duration_s = 3.0;
};

enum class InitialState { Equilibrium, RandomVelocity };

/// How the per-step acceleration disturbance relates to dt. PerStep applies
/// noise_std directly as the held acceleration's standard deviation (the
/// reading used by the experiments); Diffusion scales it by dt^{-1/2} so
/// trajectory statistics stay dt-invariant.
enum class NoiseScaling { PerStep, Diffusion };

/// (time, active) controller switch points, sorted by time by the caller.
struct ScheduleEntry {
  double time_s = 0.0;
  bool active = true;
};

struct Scenario {
  RingModel ring;                     // linear model + equilibrium targets
  std::vector<OvmParams> fleet;       // per-vehicle laws, index 0 = CAV
  std::optional<Eigen::RowVectorXd> gain;  // structured feedback, 1 x 2n
  /// Spacing target the controller uses for the CAV; defaults to the
  /// ring-consistent value. Deliberately wrong values model unreachable
  /// equilibria.
  std::optional<double> cav_spacing_target;

  double duration_s = 100.0;
  double dt_s = 0.01;
  double noise_std = 0.0;  // m/s^2; 0 selects the smooth RK4 path
  NoiseScaling noise_scaling = NoiseScaling::PerStep;
  std::optional<Perturbation> perturbation;
  InitialState initial = InitialState::Equilibrium;
  double initial_velocity_jitter = 4.0;  // U[-j, j] around v*
  std::vector<ScheduleEntry> schedule;   // empty = always on when gain given
  std::uint64_t rng_seed = 0;
  int output_stride = 1;

  double a_min = -5.0;
  double a_max = 2.0;
  bool emergency_braking = true;

  int n() const { return ring.n; }
  void validate() const;
};

}  // namespace ringflow::sim
