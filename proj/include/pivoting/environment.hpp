#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "pivoting/actuation.hpp"
#include "pivoting/dynamics.hpp"

namespace pivoting {

inline constexpr double kPi = 3.14159265358979323846;

// wrap an angle difference into (-pi, pi]
double wrap_angle(double a);

// Episode-level task parameters. The control loop runs at a coarse rate
// on top of the fixed physics timestep.
struct TaskConfig {
  double angle_lo = -kPi / 2;      // rad, initial/target angle range
  double angle_hi = kPi / 2;       // rad
  double angle_norm = kPi;         // rad, reward normalizer
  double success_angle = 0.05;     // rad
  double success_rate = 0.1;       // rad/s
  double control_period = 0.05;    // s
  double physics_dt = 1e-3;        // s
  int horizon = 200;               // control steps per episode
  double arm_accel_limit = 20.0;   // rad/s^2

  void validate() const;
  int substeps_per_control() const;
};

// Commanded pair: arm acceleration scale in [-1, 1] and a finger scalar
// whose sign picks the finger direction (|finger| < 0.1 holds).
struct Action {
  double arm = 0.0;
  double finger = 0.0;
};

struct StepInfo {
  bool success = false;
  PivotState state;
};

struct StepResult {
  Eigen::VectorXd obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// Per-step reward: negative normalized distance to the target angle,
// plus a bonus of 1 while the success condition holds.
double reward(const PivotState& state, double target_angle,
              const TaskConfig& config);

// Tool close to the target and (almost) stopped.
bool is_success(const PivotState& state, double target_angle,
                const TaskConfig& config);

// Episodic pivoting task: swing the grasped tool to a target angle by
// arm acceleration and grip modulation. Observations are
// [angle error, tool rate, grip angle, grip rate, finger distance].
class PivotEnv {
 public:
  static constexpr int kObsDim = 5;
  static constexpr int kActDim = 2;
  static constexpr double kFingerDeadZone = 0.1;

  PivotEnv(const TaskConfig& task, const ToolParams& tool,
           const ArmParams& arm, const GripperParams& gripper,
           const ActuationConfig& actuation);

  // Start a new episode; initial and target angles drawn uniformly from
  // the configured range, friction re-perturbed, gripper at rest with a
  // holding grasp.
  Eigen::VectorXd reset(uint64_t seed);

  // Like reset() but with the two angles pinned (diagnostics, scripted
  // rollouts).
  Eigen::VectorXd reset_to(double initial_angle, double target_angle,
                           uint64_t seed);

  StepResult step(const Action& action);

  Eigen::VectorXd observation() const;
  const PivotState& state() const { return state_; }
  double target_angle() const { return target_angle_; }
  const ToolParams& episode_tool() const { return tool_episode_; }
  const TaskConfig& task() const { return task_; }
  const GripperParams& gripper() const { return gripper_; }
  int steps_taken() const { return steps_taken_; }
  bool done() const { return done_; }

 private:
  void start_episode(double initial_angle, double target_angle, uint64_t seed);

  TaskConfig task_;
  ToolParams tool_nominal_;
  ToolParams tool_episode_;
  ArmParams arm_;
  GripperParams gripper_;
  ActuationConfig actuation_;
  ActuatorState actuator_;
  PivotState state_;
  double target_angle_ = 0.0;
  int steps_taken_ = 0;
  bool done_ = true;
};

}  // namespace pivoting
