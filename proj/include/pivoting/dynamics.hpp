#pragma once

#include <stdexcept>

namespace pivoting {

// Physical constants of the pivoted tool. The tool hangs between the
// gripper fingers and rotates about the contact axis; friction there is
// the only torque the gripper can transmit to it.
struct ToolParams {
  double mass = 0.1;            // kg
  double inertia = 0.01;        // kg*m^2, about the tool's center of mass
  double com_distance = 0.1;    // m, center of mass to pivot
  double static_coeff = 0.02;   // m, stiction torque per unit normal force
  double coulomb_coeff = 0.01;  // m, kinetic torque per unit normal force
  double viscous_coeff = 0.02;  // N*m*s/rad

  ToolParams() = default;
  ToolParams(double m, double inertia_com, double r, double static_c,
             double coulomb_c, double viscous_c);

  void validate() const;
};

enum class MotionPlane { kHorizontal, kVertical };

struct ArmParams {
  double link_length = 0.3;  // m
  double gravity = 9.81;     // m/s^2
  MotionPlane plane = MotionPlane::kHorizontal;

  ArmParams() = default;
  ArmParams(double l, double g, MotionPlane p);

  void validate() const;

  // gravity entering the dynamics; zero when the arm moves horizontally
  double effective_gravity() const {
    return plane == MotionPlane::kVertical ? gravity : 0.0;
  }
};

// Parallel-jaw gripper with a linear squeeze model: closing the fingers
// past the contact distance presses on the tool proportionally.
struct GripperParams {
  double stiffness = 1000.0;      // N/m
  double contact_distance = 0.03; // m, finger gap at first contact
  double finger_min = 0.02;       // m
  double finger_max = 0.06;       // m
  double finger_speed = 0.05;     // m/s

  GripperParams() = default;
  GripperParams(double k, double d0, double dmin, double dmax, double speed);

  void validate() const;
};

enum class ContactMode { kStuck, kSlipping };

// Full state of the gripper link + tool system. tool_angle is measured
// relative to the gripper link; the absolute tool angle is
// grip_angle + tool_angle. While stuck, tool_rate is exactly zero.
struct PivotState {
  double grip_angle = 0.0;      // rad
  double grip_rate = 0.0;       // rad/s
  double tool_angle = 0.0;      // rad, relative to the gripper link
  double tool_rate = 0.0;       // rad/s, relative
  double finger_distance = 0.0; // m
  ContactMode contact = ContactMode::kStuck;
};

// Velocity below which a slipping tool may be captured by stiction.
inline constexpr double kStickCaptureRate = 1e-3;  // rad/s

// Squeeze force from the linear deformation model, clamped at zero once
// the fingers lose contact.
double normal_force(const GripperParams& gripper, double finger_distance);

// Friction torque while the tool slides relative to the gripper:
// viscous term plus Coulomb term, both opposing the relative rate.
// Rejects tool_rate == 0; the static branch owns that case.
double kinetic_friction_torque(const ToolParams& tool, double normal,
                               double tool_rate);

// Largest torque stiction can transmit for a given squeeze force.
double static_friction_bound(const ToolParams& tool, double normal);

// Torque the contact must transmit for the tool to track the gripper
// exactly (zero relative acceleration) under the commanded arm motion.
double stick_torque_required(const ToolParams& tool, const ArmParams& arm,
                             const PivotState& state, double grip_accel);

// Relative angular acceleration of the tool given the friction torque
// actually transmitted at the contact.
double tool_acceleration(const ToolParams& tool, const ArmParams& arm,
                         const PivotState& state, double grip_accel,
                         double friction_torque);

// Advance the coupled system by one fixed timestep (semi-implicit Euler:
// rates first, then angles). Resolves the stick/slip mode switch:
//  - stuck holds while the required torque stays inside the static bound
//  - otherwise the tool slides under kinetic friction
//  - a slow slide (|rate| < kStickCaptureRate) re-sticks when the static
//    bound can hold it
// Friction alone never reverses the slide direction within a step; a
// crossing is clamped to zero rate so stiction can capture it.
PivotState step(const ToolParams& tool, const ArmParams& arm,
                const GripperParams& gripper, const PivotState& state,
                double grip_accel, double dt);

}  // namespace pivoting
