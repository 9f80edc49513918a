#pragma once

#include <vector>

#include "pivoting/dynamics.hpp"
#include "pivoting/rng.hpp"

namespace pivoting {

// Non-ideal command execution: commands engage after a random delay and
// run with multiplicative noise. The idealized flag turns every effect
// off, leaving exact pass-through control.
struct ActuationConfig {
  double friction_noise_frac = 0.10;     // per-episode friction perturbation
  double delay_frac_max = 0.10;          // delay, as a fraction of a control period
  double ramp_noise_frac = 0.10;         // arm acceleration noise
  double finger_step_noise_frac = 0.10;  // finger step noise
  bool idealized = false;

  void validate() const;
};

// Per-episode execution state of the two actuators. Each instance owns a
// private random stream; equal seeds and command sequences evolve
// identically.
struct ActuatorState {
  double pending_arm_accel = 0.0;
  double arm_delay_remaining = 0.0;  // s
  int pending_finger_dir = 0;
  double finger_delay_remaining = 0.0;  // s
  Rng rng;

  explicit ActuatorState(uint64_t seed = 0) : rng(seed) {}
};

namespace actuation {

// Scale the friction coefficients by independent uniform factors in
// [1-frac, 1+frac]; mass and geometry stay put. Drawn once per episode.
ToolParams perturb_tool_params(const ToolParams& tool, double frac, Rng& rng);

// Execute one arm acceleration command over a control period, returning
// the effective acceleration per physics substep. The command engages
// after a fresh uniform delay in [0, delay_frac_max*period]; afterwards
// each substep applies cmd scaled by noise in [1-ramp_noise_frac,
// 1+ramp_noise_frac]. A substep straddling the delay contributes its
// active fraction only.
std::vector<double> arm_response(double cmd, ActuatorState& actuator,
                                 const ActuationConfig& config, double dt,
                                 double control_period);

// Execute one finger direction command over a control period, returning
// the finger distance after each physics substep, starting from
// start_distance. Same delay scheme as the arm; each active substep
// moves the fingers by dir*finger_speed*dt scaled by noise in
// [1-finger_step_noise_frac, 1+finger_step_noise_frac]. Values are
// clamped to the finger range.
std::vector<double> finger_response(int dir, double start_distance,
                                    ActuatorState& actuator,
                                    const ActuationConfig& config,
                                    const GripperParams& gripper, double dt,
                                    double control_period);

}  // namespace actuation
}  // namespace pivoting
