#include "ringflow/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ringflow/rng.hpp"
#include "ringflow/sim/kernels.hpp"

namespace ringflow::sim {

void Scenario::validate() const {
  if (!(dt_s > 0.0)) throw ValidationError("dt must be positive");
  if (!(duration_s >= dt_s)) throw ValidationError("duration shorter than dt");
  if (static_cast<int>(fleet.size()) != ring.n) {
    throw ValidationError("fleet needs one parameter set per vehicle");
  }
  if (gain && gain->size() != 2 * ring.n) {
    throw ValidationError("gain length must be 2n");
  }
  if (perturbation &&
      (perturbation->vehicle < 1 || perturbation->vehicle > ring.n)) {
    throw ValidationError("perturbed vehicle index outside 1..n");
  }
  if (output_stride < 1) throw ValidationError("output stride must be >= 1");
  if (!(a_min < 0.0) || !(a_max > 0.0)) {
    throw ValidationError("acceleration bounds must straddle zero");
  }
  for (const auto& p : fleet) p.validate();
}

namespace {

struct Stepper {
  const Scenario& sc;
  int n;
  Eigen::VectorXd ref_spacing;  // controller reference
  double ref_velocity;
  // scratch
  std::vector<double> s, v_ahead, acc;
  std::vector<char> emergency;
  bool any_emergency = false;

  explicit Stepper(const Scenario& scenario)
      : sc(scenario), n(scenario.ring.n) {
    ref_spacing = scenario.ring.s_star;
    if (scenario.cav_spacing_target) {
      ref_spacing(0) = *scenario.cav_spacing_target;
    }
    ref_velocity = scenario.ring.v_star;
    s.resize(n);
    v_ahead.resize(n);
    acc.resize(n);
    emergency.assign(n, 0);
  }

  void spacings_from(const Eigen::VectorXd& pos, std::vector<double>& out) const {
    out[0] = pos(n - 1) - pos(0) + sc.ring.length;
    for (int i = 1; i < n; ++i) out[i] = pos(i - 1) - pos(i);
  }

  /// Acceleration field at time t. Order of authority: car-following law or
  /// controller, then the scripted perturbation, then emergency braking,
  /// then actuator clipping.
  void eval(const Eigen::VectorXd& pos, const Eigen::VectorXd& vel, double t,
            bool controller_on, Eigen::VectorXd& out) {
    spacings_from(pos, s);
    for (int i = 0; i < n; ++i) v_ahead[i] = vel((i + n - 1) % n);
    ovm_accel(sc.fleet, s.data(), vel.data(), v_ahead.data(), acc.data(), n,
              ExecPolicy::Serial);
    if (controller_on && sc.gain) {
      double u = 0.0;
      const auto& K = *sc.gain;
      for (int i = 0; i < n; ++i) {
        u -= K(2 * i) * (s[i] - ref_spacing(i));
        u -= K(2 * i + 1) * (vel(i) - ref_velocity);
      }
      acc[0] = u;
    }
    if (sc.perturbation && t >= sc.perturbation->start_s &&
        t < sc.perturbation->start_s + sc.perturbation->duration_s) {
      acc[sc.perturbation->vehicle - 1] = sc.perturbation->decel;
    }
    any_emergency = false;
    std::fill(emergency.begin(), emergency.end(), 0);
    if (sc.emergency_braking) {
      for (int i = 0; i < n; ++i) {
        if (s[i] <= 0.0) continue;
        const double closing =
            (vel(i) * vel(i) - v_ahead[i] * v_ahead[i]) / (2.0 * s[i]);
        if (closing >= std::abs(sc.a_min)) {
          acc[i] = sc.a_min;
          emergency[i] = 1;
          any_emergency = true;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      out(i) = std::clamp(acc[i], sc.a_min, sc.a_max);
    }
  }
};

bool controller_active_at(const Scenario& sc, double t) {
  if (!sc.gain) return false;
  if (sc.schedule.empty()) return true;
  bool state = false;
  for (const auto& e : sc.schedule) {
    if (e.time_s <= t + 1e-12) state = e.active;
  }
  return state;
}

}  // namespace

SimTrace run(const Scenario& sc) {
  sc.validate();
  const int n = sc.ring.n;
  Rng rng(sc.rng_seed);

  Eigen::VectorXd pos(n), vel(n);
  pos(0) = 0.0;
  for (int i = 1; i < n; ++i) pos(i) = pos(i - 1) - sc.ring.s_star(i);
  vel.setConstant(sc.ring.v_star);
  if (sc.initial == InitialState::RandomVelocity) {
    for (int i = 0; i < n; ++i) {
      vel(i) += rng.uniform(-sc.initial_velocity_jitter,
                            sc.initial_velocity_jitter);
    }
  }

  const int steps = static_cast<int>(std::llround(sc.duration_s / sc.dt_s));
  const int sample_count = steps / sc.output_stride + 1;

  SimTrace trace;
  trace.ring_length = sc.ring.length;
  trace.v_star = sc.ring.v_star;
  trace.s_star = sc.ring.s_star;
  if (sc.cav_spacing_target) trace.s_star(0) = *sc.cav_spacing_target;
  trace.times.reserve(sample_count);
  trace.positions.resize(sample_count, n);
  trace.velocities.resize(sample_count, n);
  trace.spacings.resize(sample_count, n);
  trace.control.resize(sample_count);

  Stepper stepper(sc);
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
  Eigen::VectorXd p_tmp(n), v_tmp(n);
  std::vector<double> spacing_now(n);

  const double noise_scale = sc.noise_scaling == NoiseScaling::PerStep
                                 ? sc.noise_std * sc.dt_s
                                 : sc.noise_std * std::sqrt(sc.dt_s);
  bool was_active = controller_active_at(sc, 0.0);
  if (sc.gain) {
    trace.events.push_back(Event{was_active ? Event::Kind::ControllerOn
                                            : Event::Kind::ControllerOff,
                                 0.0, 0});
  }
  bool emergency_latch = false;
  int row = 0;

  const auto record = [&](int step, double u_applied) {
    trace.times.push_back(step * sc.dt_s);
    for (int i = 0; i < n; ++i) {
      double pm = std::fmod(pos(i), sc.ring.length);
      if (pm < 0.0) pm += sc.ring.length;
      trace.positions(row, i) = pm;
      trace.velocities(row, i) = vel(i);
      trace.spacings(row, i) = spacing_now[i];
    }
    trace.control(row) = u_applied;
    ++row;
  };

  for (int step = 0; step <= steps; ++step) {
    const double t = step * sc.dt_s;
    const bool active = controller_active_at(sc, t);
    if (sc.gain && active != was_active) {
      trace.events.push_back(Event{active ? Event::Kind::ControllerOn
                                          : Event::Kind::ControllerOff,
                                   t, 0});
      was_active = active;
    }

    stepper.spacings_from(pos, spacing_now);
    double total = 0.0;
    double min_spacing = std::numeric_limits<double>::max();
    for (int i = 0; i < n; ++i) {
      total += spacing_now[i];
      min_spacing = std::min(min_spacing, spacing_now[i]);
    }
    trace.max_ring_defect =
        std::max(trace.max_ring_defect, std::abs(total - sc.ring.length));
    if (min_spacing <= 0.0) {
      trace.collision = true;
      trace.collision_time = t;
      trace.events.push_back(Event{Event::Kind::Collision, t, 0});
      if (step % sc.output_stride == 0) record(step, 0.0);
      break;
    }

    // The stage-1 field evaluation doubles as the per-step event probe and
    // supplies the recorded control value.
    stepper.eval(pos, vel, t, active, k1);
    if (stepper.any_emergency && !emergency_latch) {
      trace.events.push_back(Event{Event::Kind::EmergencyBrake, t, 0});
    }
    emergency_latch = stepper.any_emergency;
    if (step % sc.output_stride == 0) {
      record(step, active && sc.gain ? k1(0) : 0.0);
    }
    if (step == steps) break;

    if (sc.noise_std > 0.0) {
      // Euler-Maruyama step; the acceleration disturbance is held constant
      // within the step, one draw per vehicle. An emergency-braking vehicle
      // follows the pure a_min override, and nobody rolls backwards.
      p_tmp = pos + sc.dt_s * vel;
      for (int i = 0; i < n; ++i) {
        const double kick = noise_scale * rng.gaussian();
        vel(i) += sc.dt_s * k1(i) + (stepper.emergency[i] ? 0.0 : kick);
        if (vel(i) < 0.0) vel(i) = 0.0;
      }
      pos = p_tmp;
    } else {
      const double h = sc.dt_s;
      p_tmp = pos + 0.5 * h * vel;
      v_tmp = vel + 0.5 * h * k1;
      stepper.eval(p_tmp, v_tmp, t + 0.5 * h, active, k2);
      p_tmp = pos + 0.5 * h * (vel + 0.5 * h * k1);
      v_tmp = vel + 0.5 * h * k2;
      stepper.eval(p_tmp, v_tmp, t + 0.5 * h, active, k3);
      p_tmp = pos + h * (vel + 0.5 * h * k2);
      v_tmp = vel + h * k3;
      stepper.eval(p_tmp, v_tmp, t + h, active, k4);
      pos += h * vel + (h * h / 6.0) * (k1 + k2 + k3);
      vel += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      vel = vel.cwiseMax(0.0);
    }
  }

  trace.positions.conservativeResize(row, n);
  trace.velocities.conservativeResize(row, n);
  trace.spacings.conservativeResize(row, n);
  trace.control.conservativeResize(row);
  return trace;
}

double lq_cost(const SimTrace& trace, const Eigen::MatrixXd& Q, double R) {
  const int n = trace.vehicles();
  if (Q.rows() != 2 * n) throw ValidationError("Q size must be 2n");
  const auto integrand = [&](int row) {
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ds = trace.spacings(row, i) - trace.s_star(i);
      const double dv = trace.velocities(row, i) - trace.v_star;
      f += Q(2 * i, 2 * i) * ds * ds + Q(2 * i + 1, 2 * i + 1) * dv * dv;
    }
    const double u = trace.control(row);
    return f + R * u * u;
  };
  double cost = 0.0;
  for (int r = 0; r + 1 < trace.samples(); ++r) {
    const double h = trace.times[r + 1] - trace.times[r];
    cost += 0.5 * h * (integrand(r) + integrand(r + 1));
  }
  return cost;
}

Metrics compute_metrics(const SimTrace& trace, const Eigen::MatrixXd& Q,
                        double R, double settle_threshold) {
  Metrics m;
  m.collision = trace.collision;
  m.settle_threshold = settle_threshold;
  m.lq_cost = lq_cost(trace, Q, R);
  m.max_cav_spacing = trace.spacings.col(0).maxCoeff();

  const int rows = trace.samples();
  const int n = trace.vehicles();
  m.velocity_std_profile.resize(rows);
  Eigen::VectorXd dev(rows);
  for (int r = 0; r < rows; ++r) {
    const auto vrow = trace.velocities.row(r);
    const double mean = vrow.mean();
    m.velocity_std_profile[r] =
        std::sqrt((vrow.array() - mean).square().sum() / n);
    dev(r) = (vrow.array() - trace.v_star).abs().maxCoeff();
  }
  m.final_velocity_deviation = dev(rows - 1);

  int last_bad = -1;
  for (int r = 0; r < rows; ++r) {
    if (dev(r) >= settle_threshold) last_bad = r;
  }
  if (last_bad + 1 >= rows) {
    m.settle_time = trace.times.back() + 1.0;  // never settled
  } else {
    m.settle_time = trace.times[last_bad + 1];
  }
  return m;
}

std::vector<SimTrace> run_batch(const std::vector<Scenario>& scenarios,
                                ExecPolicy exec) {
  std::vector<SimTrace> out(scenarios.size());
  const auto count = static_cast<std::ptrdiff_t>(scenarios.size());
  if (exec == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] = run(scenarios[i]);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] = run(scenarios[i]);
    }
  }
  return out;
}

}  // namespace ringflow::sim
