#include "pivoting/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pivoting {

void ActuationConfig::validate() const {
  auto in_unit = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!in_unit(friction_noise_frac) || !in_unit(delay_frac_max) ||
      !in_unit(ramp_noise_frac) || !in_unit(finger_step_noise_frac))
    throw std::invalid_argument("actuation fractions must lie in [0, 1]");
}

namespace actuation {

namespace {

int substep_count(double dt, double control_period) {
  if (!(dt > 0.0) || control_period < dt)
    throw std::invalid_argument("control_period must be >= dt > 0");
  const double ratio = control_period / dt;
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) > 1e-9 * ratio)
    throw std::invalid_argument("control_period must be a multiple of dt");
  return static_cast<int>(rounded);
}

// fraction of substep i that lies past the delay
double active_fraction(int i, double dt, double delay) {
  const double t0 = i * dt;
  const double active = std::min(dt, t0 + dt - delay);
  return std::clamp(active / dt, 0.0, 1.0);
}

}  // namespace

ToolParams perturb_tool_params(const ToolParams& tool, double frac, Rng& rng) {
  if (!(frac >= 0.0 && frac <= 1.0))
    throw std::invalid_argument("perturbation fraction must lie in [0, 1]");
  ToolParams out = tool;
  out.static_coeff = tool.static_coeff * rng.uniform(1.0 - frac, 1.0 + frac);
  out.coulomb_coeff = tool.coulomb_coeff * rng.uniform(1.0 - frac, 1.0 + frac);
  out.viscous_coeff = tool.viscous_coeff * rng.uniform(1.0 - frac, 1.0 + frac);
  // independent draws can invert the static/kinetic ordering
  out.static_coeff = std::max(out.static_coeff, out.coulomb_coeff);
  out.validate();
  return out;
}

std::vector<double> arm_response(double cmd, ActuatorState& actuator,
                                 const ActuationConfig& config, double dt,
                                 double control_period) {
  const int n = substep_count(dt, control_period);
  std::vector<double> trace(static_cast<size_t>(n));
  if (config.idealized) {
    std::fill(trace.begin(), trace.end(), cmd);
    actuator.pending_arm_accel = cmd;
    actuator.arm_delay_remaining = 0.0;
    return trace;
  }
  actuator.pending_arm_accel = cmd;
  const double delay =
      actuator.rng.uniform(0.0, config.delay_frac_max * control_period);
  for (int i = 0; i < n; ++i) {
    const double noise =
        actuator.rng.uniform(1.0 - config.ramp_noise_frac, 1.0 + config.ramp_noise_frac);
    trace[static_cast<size_t>(i)] = cmd * noise * active_fraction(i, dt, delay);
  }
  actuator.arm_delay_remaining = std::max(0.0, delay - control_period);
  return trace;
}

std::vector<double> finger_response(int dir, double start_distance,
                                    ActuatorState& actuator,
                                    const ActuationConfig& config,
                                    const GripperParams& gripper, double dt,
                                    double control_period) {
  if (dir < -1 || dir > 1)
    throw std::invalid_argument("finger direction must be -1, 0 or +1");
  const int n = substep_count(dt, control_period);
  std::vector<double> values(static_cast<size_t>(n));
  double d = std::clamp(start_distance, gripper.finger_min, gripper.finger_max);

  if (config.idealized) {
    for (int i = 0; i < n; ++i) {
      d = std::clamp(d + dir * gripper.finger_speed * dt, gripper.finger_min,
                     gripper.finger_max);
      values[static_cast<size_t>(i)] = d;
    }
    actuator.pending_finger_dir = dir;
    actuator.finger_delay_remaining = 0.0;
    return values;
  }

  actuator.pending_finger_dir = dir;
  const double delay =
      actuator.rng.uniform(0.0, config.delay_frac_max * control_period);
  for (int i = 0; i < n; ++i) {
    const double noise = actuator.rng.uniform(1.0 - config.finger_step_noise_frac,
                                              1.0 + config.finger_step_noise_frac);
    const double move = dir * gripper.finger_speed * dt * noise *
                        active_fraction(i, dt, delay);
    d = std::clamp(d + move, gripper.finger_min, gripper.finger_max);
    values[static_cast<size_t>(i)] = d;
  }
  actuator.finger_delay_remaining = std::max(0.0, delay - control_period);
  return values;
}

}  // namespace actuation
}  // namespace pivoting
