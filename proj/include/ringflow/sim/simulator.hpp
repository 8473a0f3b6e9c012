#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ringflow/exec.hpp"
#include "ringflow/sim/scenario.hpp"

namespace ringflow::sim {

struct Event {
  enum class Kind { EmergencyBrake, ControllerOn, ControllerOff, Collision };
  Kind kind;
  double time_s = 0.0;
  int vehicle = 0;  // 1-based; 0 when not vehicle-specific
};

/// Time-sampled closed-loop trajectory. Rows are samples (stride-subsampled
/// from the integration grid), columns vehicles.
struct SimTrace {
  double ring_length = 0.0;
  double v_star = 0.0;
  Eigen::VectorXd s_star;  // controller reference spacings
  std::vector<double> times;
  Eigen::MatrixXd positions;   // mod L
  Eigen::MatrixXd velocities;
  Eigen::MatrixXd spacings;
  Eigen::VectorXd control;     // CAV input per sample (0 when inactive)
  std::vector<Event> events;
  bool collision = false;
  double collision_time = 0.0;
  /// Worst |sum_i s_i - L| seen at any integration step, not just samples.
  double max_ring_defect = 0.0;

  int samples() const { return static_cast<int>(times.size()); }
  int vehicles() const { return static_cast<int>(velocities.cols()); }
};

struct Metrics {
  double lq_cost = 0.0;
  double max_cav_spacing = 0.0;
  double settle_time = 0.0;             // inf encoded as duration + dt
  double settle_threshold = 0.0;
  double final_velocity_deviation = 0.0;  // max_i |v_i(end) - v*|
  std::vector<double> velocity_std_profile;
  bool collision = false;
};

/// Integrates one scenario: RK4 when noiseless, Euler-Maruyama with the
/// noise held within each step otherwise. Deterministic for a fixed seed.
SimTrace run(const Scenario& sc);

/// Trapezoidal LQ cost over the sampled trace in error coordinates.
double lq_cost(const SimTrace& trace, const Eigen::MatrixXd& Q, double R);

/// Standard metric bundle; Q/R follow the performance-output convention.
Metrics compute_metrics(const SimTrace& trace, const Eigen::MatrixXd& Q,
                        double R, double settle_threshold = 0.1);

/// Runs independent scenarios, optionally one per worker. Results are
/// bit-identical across policies because each run owns its state and RNG.
std::vector<SimTrace> run_batch(const std::vector<Scenario>& scenarios,
                                ExecPolicy exec);

}  // namespace ringflow::sim
