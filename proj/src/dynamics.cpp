#include "pivoting/dynamics.hpp"

#include <cmath>

namespace pivoting {

namespace {

bool all_finite(const PivotState& s) {
  return std::isfinite(s.grip_angle) && std::isfinite(s.grip_rate) &&
         std::isfinite(s.tool_angle) && std::isfinite(s.tool_rate) &&
         std::isfinite(s.finger_distance);
}

}  // namespace

ToolParams::ToolParams(double m, double inertia_com, double r, double static_c,
                       double coulomb_c, double viscous_c)
    : mass(m),
      inertia(inertia_com),
      com_distance(r),
      static_coeff(static_c),
      coulomb_coeff(coulomb_c),
      viscous_coeff(viscous_c) {
  validate();
}

void ToolParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("tool mass must be > 0");
  if (!(inertia > 0.0)) throw std::invalid_argument("tool inertia must be > 0");
  if (!(com_distance >= 0.0))
    throw std::invalid_argument("tool com_distance must be >= 0");
  if (!(static_coeff >= 0.0) || !(coulomb_coeff >= 0.0) ||
      !(viscous_coeff >= 0.0))
    throw std::invalid_argument("friction coefficients must be >= 0");
  if (static_coeff < coulomb_coeff)
    throw std::invalid_argument(
        "static_coeff must be >= coulomb_coeff (stiction may not release "
        "into a stronger kinetic torque)");
}

ArmParams::ArmParams(double l, double g, MotionPlane p)
    : link_length(l), gravity(g), plane(p) {
  validate();
}

void ArmParams::validate() const {
  if (!(link_length > 0.0))
    throw std::invalid_argument("link_length must be > 0");
  if (!(gravity >= 0.0)) throw std::invalid_argument("gravity must be >= 0");
}

GripperParams::GripperParams(double k, double d0, double dmin, double dmax,
                             double speed)
    : stiffness(k),
      contact_distance(d0),
      finger_min(dmin),
      finger_max(dmax),
      finger_speed(speed) {
  validate();
}

void GripperParams::validate() const {
  if (!(stiffness > 0.0)) throw std::invalid_argument("stiffness must be > 0");
  if (!(finger_min >= 0.0) || !(finger_min < contact_distance) ||
      !(contact_distance <= finger_max))
    throw std::invalid_argument(
        "finger range must satisfy 0 <= finger_min < contact_distance <= "
        "finger_max");
  if (!(finger_speed > 0.0))
    throw std::invalid_argument("finger_speed must be > 0");
}

double normal_force(const GripperParams& gripper, double finger_distance) {
  const double f = gripper.stiffness * (gripper.contact_distance - finger_distance);
  return f > 0.0 ? f : 0.0;
}

double kinetic_friction_torque(const ToolParams& tool, double normal,
                               double tool_rate) {
  if (tool_rate == 0.0)
    throw std::invalid_argument(
        "kinetic friction is undefined at zero relative rate; use the static "
        "branch");
  const double sign = tool_rate > 0.0 ? 1.0 : -1.0;
  return -tool.viscous_coeff * tool_rate - tool.coulomb_coeff * normal * sign;
}

double static_friction_bound(const ToolParams& tool, double normal) {
  return tool.static_coeff * normal;
}

double stick_torque_required(const ToolParams& tool, const ArmParams& arm,
                             const PivotState& state, double grip_accel) {
  const double mr = tool.mass * tool.com_distance;
  const double mlr = mr * arm.link_length;
  const double inertia_pivot = tool.inertia + mr * tool.com_distance;
  return (inertia_pivot + mlr * std::cos(state.tool_angle)) * grip_accel +
         mlr * std::sin(state.tool_angle) * state.grip_rate * state.grip_rate +
         tool.mass * arm.effective_gravity() * tool.com_distance *
             std::cos(state.grip_angle + state.tool_angle);
}

double tool_acceleration(const ToolParams& tool, const ArmParams& arm,
                         const PivotState& state, double grip_accel,
                         double friction_torque) {
  const double inertia_pivot =
      tool.inertia + tool.mass * tool.com_distance * tool.com_distance;
  return (friction_torque - stick_torque_required(tool, arm, state, grip_accel)) /
         inertia_pivot;
}

PivotState step(const ToolParams& tool, const ArmParams& arm,
                const GripperParams& gripper, const PivotState& state,
                double grip_accel, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!all_finite(state) || !std::isfinite(grip_accel))
    throw std::invalid_argument("non-finite state or command");

  const double normal = normal_force(gripper, state.finger_distance);
  const double bound = static_friction_bound(tool, normal);
  const double required = stick_torque_required(tool, arm, state, grip_accel);

  PivotState next = state;
  next.grip_rate = state.grip_rate + grip_accel * dt;
  next.grip_angle = state.grip_angle + next.grip_rate * dt;

  if (state.contact == ContactMode::kStuck && std::fabs(required) <= bound) {
    // tool rides with the gripper; relative coordinates frozen
    next.tool_rate = 0.0;
    next.tool_angle = state.tool_angle;
    next.contact = ContactMode::kStuck;
    return next;
  }

  const double rate = state.tool_rate;
  double friction;
  if (rate != 0.0) {
    friction = kinetic_friction_torque(tool, normal, rate);
  } else {
    // breakaway: |required| > bound >= coulomb_coeff*normal here, so the
    // slide starts against the Coulomb torque in the driven direction
    const double sign = required > 0.0 ? 1.0 : -1.0;
    friction = tool.coulomb_coeff * normal * sign;
  }

  const double accel = tool_acceleration(tool, arm, state, grip_accel, friction);
  double new_rate = rate + accel * dt;

  if (rate != 0.0 && new_rate * rate < 0.0) {
    // only clamp a reversal that friction itself produced
    const double free_accel = tool_acceleration(tool, arm, state, grip_accel, 0.0);
    if ((rate + free_accel * dt) * rate >= 0.0) new_rate = 0.0;
  }

  next.tool_rate = new_rate;
  next.tool_angle = state.tool_angle + new_rate * dt;
  next.contact = ContactMode::kSlipping;

  if (std::fabs(new_rate) < kStickCaptureRate) {
    const double required_next = stick_torque_required(tool, arm, next, grip_accel);
    if (std::fabs(required_next) <= bound) {
      next.tool_rate = 0.0;
      next.contact = ContactMode::kStuck;
    }
  }
  return next;
}

}  // namespace pivoting
