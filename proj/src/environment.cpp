#include "pivoting/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pivoting {

double wrap_angle(double a) {
  double w = std::fmod(a + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

void TaskConfig::validate() const {
  if (!(angle_lo <= angle_hi))
    throw std::invalid_argument("angle_lo must be <= angle_hi");
  if (!(angle_norm > 0.0)) throw std::invalid_argument("angle_norm must be > 0");
  if (!(success_angle > 0.0) || !(success_rate > 0.0))
    throw std::invalid_argument("success thresholds must be > 0");
  if (!(horizon > 0)) throw std::invalid_argument("horizon must be > 0");
  if (!(arm_accel_limit > 0.0))
    throw std::invalid_argument("arm_accel_limit must be > 0");
  substeps_per_control();  // throws unless period is a multiple of dt
}

int TaskConfig::substeps_per_control() const {
  if (!(physics_dt > 0.0) || control_period < physics_dt)
    throw std::invalid_argument("control_period must be >= physics_dt > 0");
  const double ratio = control_period / physics_dt;
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) > 1e-9 * ratio)
    throw std::invalid_argument(
        "control_period must be an integer multiple of physics_dt");
  return static_cast<int>(rounded);
}

double reward(const PivotState& state, double target_angle,
              const TaskConfig& config) {
  const double err = wrap_angle(state.tool_angle - target_angle);
  const double distance_term = -std::fabs(err) / config.angle_norm;
  return distance_term + (is_success(state, target_angle, config) ? 1.0 : 0.0);
}

bool is_success(const PivotState& state, double target_angle,
                const TaskConfig& config) {
  const double err = wrap_angle(state.tool_angle - target_angle);
  return std::fabs(err) <= config.success_angle &&
         std::fabs(state.tool_rate) <= config.success_rate;
}

PivotEnv::PivotEnv(const TaskConfig& task, const ToolParams& tool,
                   const ArmParams& arm, const GripperParams& gripper,
                   const ActuationConfig& actuation)
    : task_(task),
      tool_nominal_(tool),
      tool_episode_(tool),
      arm_(arm),
      gripper_(gripper),
      actuation_(actuation) {
  task_.validate();
  tool_nominal_.validate();
  arm_.validate();
  gripper_.validate();
  actuation_.validate();
}

Eigen::VectorXd PivotEnv::reset(uint64_t seed) {
  Rng rng(mix_seed(seed, 0));
  const double initial = rng.uniform(task_.angle_lo, task_.angle_hi);
  const double target = rng.uniform(task_.angle_lo, task_.angle_hi);
  start_episode(initial, target, seed);
  return observation();
}

Eigen::VectorXd PivotEnv::reset_to(double initial_angle, double target_angle,
                                   uint64_t seed) {
  start_episode(initial_angle, target_angle, seed);
  return observation();
}

void PivotEnv::start_episode(double initial_angle, double target_angle,
                             uint64_t seed) {
  target_angle_ = target_angle;
  state_ = PivotState{};
  state_.tool_angle = initial_angle;
  // holding grasp: midway between closed and contact, so the squeeze force
  // starts positive and the tool starts stuck
  state_.finger_distance = 0.5 * (gripper_.finger_min + gripper_.contact_distance);
  state_.contact = ContactMode::kStuck;

  if (actuation_.idealized || actuation_.friction_noise_frac == 0.0) {
    tool_episode_ = tool_nominal_;
  } else {
    Rng rng(mix_seed(seed, 1));
    tool_episode_ = actuation::perturb_tool_params(
        tool_nominal_, actuation_.friction_noise_frac, rng);
  }
  actuator_ = ActuatorState(mix_seed(seed, 2));
  steps_taken_ = 0;
  done_ = false;
}

Eigen::VectorXd PivotEnv::observation() const {
  Eigen::VectorXd obs(kObsDim);
  obs << wrap_angle(state_.tool_angle - target_angle_), state_.tool_rate,
      state_.grip_angle, state_.grip_rate, state_.finger_distance;
  return obs;
}

StepResult PivotEnv::step(const Action& action) {
  if (done_)
    throw std::logic_error("step() on a finished episode; call reset()");

  const double arm_cmd =
      std::clamp(action.arm, -1.0, 1.0) * task_.arm_accel_limit;
  const double finger_scalar = std::clamp(action.finger, -1.0, 1.0);
  int finger_dir = 0;
  if (std::fabs(finger_scalar) >= kFingerDeadZone)
    finger_dir = finger_scalar > 0.0 ? 1 : -1;

  const double dt = task_.physics_dt;
  const auto accel_trace = actuation::arm_response(arm_cmd, actuator_, actuation_,
                                                   dt, task_.control_period);
  const auto finger_trace = actuation::finger_response(
      finger_dir, state_.finger_distance, actuator_, actuation_, gripper_, dt,
      task_.control_period);

  for (size_t i = 0; i < accel_trace.size(); ++i) {
    state_.finger_distance = finger_trace[i];
    state_ = pivoting::step(tool_episode_, arm_, gripper_, state_,
                            accel_trace[i], dt);
  }

  ++steps_taken_;
  done_ = steps_taken_ >= task_.horizon;

  StepResult result;
  result.obs = observation();
  result.reward = reward(state_, target_angle_, task_);
  result.done = done_;
  result.info.success = is_success(state_, target_angle_, task_);
  result.info.state = state_;
  return result;
}

}  // namespace pivoting
