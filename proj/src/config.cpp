#include "pivoting/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pivoting {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, const std::string& origin, int line) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(origin, line, "expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& v, const std::string& origin, int line) {
  try {
    size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(d);
  } catch (const std::exception&) {
    fail(origin, line, "expected an integer, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& v, const std::string& origin, int line) {
  try {
    size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<uint64_t>(d);
  } catch (const std::exception&) {
    fail(origin, line, "expected an unsigned integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& origin, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(origin, line, "expected a boolean, got '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_iterations < 1) throw std::invalid_argument("n_iterations must be >= 1");
  if (eval_trials < 1) throw std::invalid_argument("eval_trials must be >= 1");
  task.validate();
  tool.validate();
  arm.validate();
  gripper.validate();
  actuation.validate();
  trpo.validate();
}

PivotEnv ExperimentConfig::make_env() const {
  return PivotEnv(task, tool, arm, gripper, actuation);
}

std::string ExperimentConfig::canonical_string() const {
  std::ostringstream os;
  os << "seed=" << seed << "\nn_iterations=" << n_iterations
     << "\neval_trials=" << eval_trials << "\nout_dir=" << out_dir << "\n";
  os << "[task]\nangle_lo=" << fmt_double(task.angle_lo)
     << "\nangle_hi=" << fmt_double(task.angle_hi)
     << "\nangle_norm=" << fmt_double(task.angle_norm)
     << "\nsuccess_angle=" << fmt_double(task.success_angle)
     << "\nsuccess_rate=" << fmt_double(task.success_rate)
     << "\ncontrol_period=" << fmt_double(task.control_period)
     << "\nphysics_dt=" << fmt_double(task.physics_dt)
     << "\nhorizon=" << task.horizon
     << "\narm_accel_limit=" << fmt_double(task.arm_accel_limit) << "\n";
  os << "[tool]\nmass=" << fmt_double(tool.mass)
     << "\ninertia=" << fmt_double(tool.inertia)
     << "\ncom_distance=" << fmt_double(tool.com_distance)
     << "\nstatic_coeff=" << fmt_double(tool.static_coeff)
     << "\ncoulomb_coeff=" << fmt_double(tool.coulomb_coeff)
     << "\nviscous_coeff=" << fmt_double(tool.viscous_coeff) << "\n";
  os << "[arm]\nlink_length=" << fmt_double(arm.link_length)
     << "\ngravity=" << fmt_double(arm.gravity) << "\nplane="
     << (arm.plane == MotionPlane::kVertical ? "vertical" : "horizontal")
     << "\n";
  os << "[gripper]\nstiffness=" << fmt_double(gripper.stiffness)
     << "\ncontact_distance=" << fmt_double(gripper.contact_distance)
     << "\nfinger_min=" << fmt_double(gripper.finger_min)
     << "\nfinger_max=" << fmt_double(gripper.finger_max)
     << "\nfinger_speed=" << fmt_double(gripper.finger_speed) << "\n";
  os << "[actuation]\nfriction_noise_frac=" << fmt_double(actuation.friction_noise_frac)
     << "\ndelay_frac_max=" << fmt_double(actuation.delay_frac_max)
     << "\nramp_noise_frac=" << fmt_double(actuation.ramp_noise_frac)
     << "\nfinger_step_noise_frac=" << fmt_double(actuation.finger_step_noise_frac)
     << "\nidealized=" << (actuation.idealized ? "true" : "false") << "\n";
  os << "[trpo]\nmax_kl=" << fmt_double(trpo.max_kl)
     << "\ncg_iters=" << trpo.cg_iters
     << "\ncg_damping=" << fmt_double(trpo.cg_damping)
     << "\nbacktrack_ratio=" << fmt_double(trpo.backtrack_ratio)
     << "\nmax_backtracks=" << trpo.max_backtracks
     << "\ndiscount=" << fmt_double(trpo.discount)
     << "\ngae_lambda=" << fmt_double(trpo.gae_lambda)
     << "\nepisodes_per_iter=" << trpo.episodes_per_iter
     << "\nvalue_epochs=" << trpo.value_epochs
     << "\nvalue_step=" << fmt_double(trpo.value_step) << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const {
  const std::string s = canonical_string();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str(), path);
}

ExperimentConfig parse_config(const std::string& text,
                              const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int line_no = 0;

  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    const size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "task" && section != "tool" && section != "arm" &&
          section != "gripper" && section != "actuation" && section != "trpo")
        fail(origin, line_no, "unknown section [" + section + "]");
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");

    auto num = [&] { return parse_double(value, origin, line_no); };
    auto integer = [&] { return parse_int(value, origin, line_no); };

    if (section.empty()) {
      if (key == "seed") cfg.seed = parse_u64(value, origin, line_no);
      else if (key == "n_iterations") cfg.n_iterations = integer();
      else if (key == "eval_trials") cfg.eval_trials = integer();
      else if (key == "out_dir") cfg.out_dir = value;
      else fail(origin, line_no, "unknown key '" + key + "'");
    } else if (section == "task") {
      if (key == "angle_lo") cfg.task.angle_lo = num();
      else if (key == "angle_hi") cfg.task.angle_hi = num();
      else if (key == "angle_norm") cfg.task.angle_norm = num();
      else if (key == "success_angle") cfg.task.success_angle = num();
      else if (key == "success_rate") cfg.task.success_rate = num();
      else if (key == "control_period") cfg.task.control_period = num();
      else if (key == "physics_dt") cfg.task.physics_dt = num();
      else if (key == "horizon") cfg.task.horizon = integer();
      else if (key == "arm_accel_limit") cfg.task.arm_accel_limit = num();
      else fail(origin, line_no, "unknown key '" + key + "' in [task]");
    } else if (section == "tool") {
      if (key == "mass") cfg.tool.mass = num();
      else if (key == "inertia") cfg.tool.inertia = num();
      else if (key == "com_distance") cfg.tool.com_distance = num();
      else if (key == "static_coeff") cfg.tool.static_coeff = num();
      else if (key == "coulomb_coeff") cfg.tool.coulomb_coeff = num();
      else if (key == "viscous_coeff") cfg.tool.viscous_coeff = num();
      else fail(origin, line_no, "unknown key '" + key + "' in [tool]");
    } else if (section == "arm") {
      if (key == "link_length") cfg.arm.link_length = num();
      else if (key == "gravity") cfg.arm.gravity = num();
      else if (key == "plane") {
        if (value == "horizontal") cfg.arm.plane = MotionPlane::kHorizontal;
        else if (value == "vertical") cfg.arm.plane = MotionPlane::kVertical;
        else fail(origin, line_no, "plane must be 'horizontal' or 'vertical'");
      } else fail(origin, line_no, "unknown key '" + key + "' in [arm]");
    } else if (section == "gripper") {
      if (key == "stiffness") cfg.gripper.stiffness = num();
      else if (key == "contact_distance") cfg.gripper.contact_distance = num();
      else if (key == "finger_min") cfg.gripper.finger_min = num();
      else if (key == "finger_max") cfg.gripper.finger_max = num();
      else if (key == "finger_speed") cfg.gripper.finger_speed = num();
      else fail(origin, line_no, "unknown key '" + key + "' in [gripper]");
    } else if (section == "actuation") {
      if (key == "friction_noise_frac") cfg.actuation.friction_noise_frac = num();
      else if (key == "delay_frac_max") cfg.actuation.delay_frac_max = num();
      else if (key == "ramp_noise_frac") cfg.actuation.ramp_noise_frac = num();
      else if (key == "finger_step_noise_frac")
        cfg.actuation.finger_step_noise_frac = num();
      else if (key == "idealized")
        cfg.actuation.idealized = parse_bool(value, origin, line_no);
      else fail(origin, line_no, "unknown key '" + key + "' in [actuation]");
    } else if (section == "trpo") {
      if (key == "max_kl") cfg.trpo.max_kl = num();
      else if (key == "cg_iters") cfg.trpo.cg_iters = integer();
      else if (key == "cg_damping") cfg.trpo.cg_damping = num();
      else if (key == "backtrack_ratio") cfg.trpo.backtrack_ratio = num();
      else if (key == "max_backtracks") cfg.trpo.max_backtracks = integer();
      else if (key == "discount") cfg.trpo.discount = num();
      else if (key == "gae_lambda") cfg.trpo.gae_lambda = num();
      else if (key == "episodes_per_iter") cfg.trpo.episodes_per_iter = integer();
      else if (key == "value_epochs") cfg.trpo.value_epochs = integer();
      else if (key == "value_step") cfg.trpo.value_step = num();
      else fail(origin, line_no, "unknown key '" + key + "' in [trpo]");
    }
  }

  cfg.validate();
  return cfg;
}

Eigen::VectorXd default_obs_scale(const TaskConfig& task,
                                  const GripperParams& gripper) {
  Eigen::VectorXd scale(PivotEnv::kObsDim);
  const double rate_scale = 1.0 / 5.0;
  scale << 1.0 / kPi, rate_scale, 1.0 / 10.0, rate_scale,
      1.0 / (gripper.finger_max - gripper.finger_min);
  (void)task;
  return scale;
}

}  // namespace pivoting
