// Python bindings for the pivoting simulator and trainer.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pivoting/experiments.hpp"

namespace py = pybind11;
using namespace pivoting;

PYBIND11_MODULE(_pivoting, m) {
  m.doc() = "In-gripper tool pivoting: stick-slip simulator, Gaussian-policy "
            "TRPO trainer and experiment harness";

  py::class_<ToolParams>(m, "ToolParams")
      .def(py::init<>())
      .def(py::init<double, double, double, double, double, double>(),
           py::arg("mass"), py::arg("inertia"), py::arg("com_distance"),
           py::arg("static_coeff"), py::arg("coulomb_coeff"),
           py::arg("viscous_coeff"))
      .def_readwrite("mass", &ToolParams::mass)
      .def_readwrite("inertia", &ToolParams::inertia)
      .def_readwrite("com_distance", &ToolParams::com_distance)
      .def_readwrite("static_coeff", &ToolParams::static_coeff)
      .def_readwrite("coulomb_coeff", &ToolParams::coulomb_coeff)
      .def_readwrite("viscous_coeff", &ToolParams::viscous_coeff)
      .def("validate", &ToolParams::validate);

  py::enum_<MotionPlane>(m, "MotionPlane")
      .value("HORIZONTAL", MotionPlane::kHorizontal)
      .value("VERTICAL", MotionPlane::kVertical);

  py::class_<ArmParams>(m, "ArmParams")
      .def(py::init<>())
      .def(py::init<double, double, MotionPlane>(), py::arg("link_length"),
           py::arg("gravity"), py::arg("plane"))
      .def_readwrite("link_length", &ArmParams::link_length)
      .def_readwrite("gravity", &ArmParams::gravity)
      .def_readwrite("plane", &ArmParams::plane)
      .def("effective_gravity", &ArmParams::effective_gravity);

  py::class_<GripperParams>(m, "GripperParams")
      .def(py::init<>())
      .def(py::init<double, double, double, double, double>(),
           py::arg("stiffness"), py::arg("contact_distance"),
           py::arg("finger_min"), py::arg("finger_max"), py::arg("finger_speed"))
      .def_readwrite("stiffness", &GripperParams::stiffness)
      .def_readwrite("contact_distance", &GripperParams::contact_distance)
      .def_readwrite("finger_min", &GripperParams::finger_min)
      .def_readwrite("finger_max", &GripperParams::finger_max)
      .def_readwrite("finger_speed", &GripperParams::finger_speed);

  py::enum_<ContactMode>(m, "ContactMode")
      .value("STUCK", ContactMode::kStuck)
      .value("SLIPPING", ContactMode::kSlipping);

  py::class_<PivotState>(m, "PivotState")
      .def(py::init<>())
      .def_readwrite("grip_angle", &PivotState::grip_angle)
      .def_readwrite("grip_rate", &PivotState::grip_rate)
      .def_readwrite("tool_angle", &PivotState::tool_angle)
      .def_readwrite("tool_rate", &PivotState::tool_rate)
      .def_readwrite("finger_distance", &PivotState::finger_distance)
      .def_readwrite("contact", &PivotState::contact);

  m.def("normal_force", &normal_force, py::arg("gripper"),
        py::arg("finger_distance"));
  m.def("kinetic_friction_torque", &kinetic_friction_torque, py::arg("tool"),
        py::arg("normal"), py::arg("tool_rate"));
  m.def("static_friction_bound", &static_friction_bound, py::arg("tool"),
        py::arg("normal"));
  m.def("stick_torque_required", &stick_torque_required, py::arg("tool"),
        py::arg("arm"), py::arg("state"), py::arg("grip_accel"));
  m.def("tool_acceleration", &tool_acceleration, py::arg("tool"), py::arg("arm"),
        py::arg("state"), py::arg("grip_accel"), py::arg("friction_torque"));
  m.def("dynamics_step", &step, py::arg("tool"), py::arg("arm"),
        py::arg("gripper"), py::arg("state"), py::arg("grip_accel"),
        py::arg("dt"));
  m.def("wrap_angle", &wrap_angle);

  py::class_<TaskConfig>(m, "TaskConfig")
      .def(py::init<>())
      .def_readwrite("angle_lo", &TaskConfig::angle_lo)
      .def_readwrite("angle_hi", &TaskConfig::angle_hi)
      .def_readwrite("angle_norm", &TaskConfig::angle_norm)
      .def_readwrite("success_angle", &TaskConfig::success_angle)
      .def_readwrite("success_rate", &TaskConfig::success_rate)
      .def_readwrite("control_period", &TaskConfig::control_period)
      .def_readwrite("physics_dt", &TaskConfig::physics_dt)
      .def_readwrite("horizon", &TaskConfig::horizon)
      .def_readwrite("arm_accel_limit", &TaskConfig::arm_accel_limit);

  py::class_<ActuationConfig>(m, "ActuationConfig")
      .def(py::init<>())
      .def_readwrite("friction_noise_frac", &ActuationConfig::friction_noise_frac)
      .def_readwrite("delay_frac_max", &ActuationConfig::delay_frac_max)
      .def_readwrite("ramp_noise_frac", &ActuationConfig::ramp_noise_frac)
      .def_readwrite("finger_step_noise_frac",
                     &ActuationConfig::finger_step_noise_frac)
      .def_readwrite("idealized", &ActuationConfig::idealized);

  py::class_<PivotEnv>(m, "PivotEnv")
      .def(py::init<const TaskConfig&, const ToolParams&, const ArmParams&,
                    const GripperParams&, const ActuationConfig&>(),
           py::arg("task") = TaskConfig{}, py::arg("tool") = ToolParams{},
           py::arg("arm") = ArmParams{}, py::arg("gripper") = GripperParams{},
           py::arg("actuation") = ActuationConfig{})
      .def_readonly_static("OBS_DIM", &PivotEnv::kObsDim)
      .def_readonly_static("ACT_DIM", &PivotEnv::kActDim)
      .def("reset", &PivotEnv::reset, py::arg("seed"))
      .def("reset_to", &PivotEnv::reset_to, py::arg("initial_angle"),
           py::arg("target_angle"), py::arg("seed"))
      .def(
          "step",
          [](PivotEnv& env, double arm, double finger) {
            const StepResult r = env.step(Action{arm, finger});
            return py::make_tuple(
                r.obs, r.reward, r.done,
                py::dict(py::arg("success") = r.info.success,
                         py::arg("state") = r.info.state));
          },
          py::arg("arm"), py::arg("finger"),
          "advance one control step; returns (obs, reward, done, info)")
      .def_property_readonly("target_angle", &PivotEnv::target_angle)
      .def_property_readonly("state", &PivotEnv::state)
      .def_property_readonly("done", &PivotEnv::done)
      .def("observation", &PivotEnv::observation);

  py::class_<GaussianPolicy>(m, "GaussianPolicy")
      .def("mean",
           [](const GaussianPolicy& p, const Eigen::VectorXd& obs) {
             return p.mean(obs);
           })
      .def("sample",
           [](const GaussianPolicy& p, const Eigen::VectorXd& obs,
              uint64_t seed) {
             Rng rng(seed);
             return p.sample_action(obs, rng);
           })
      .def("log_prob",
           [](const GaussianPolicy& p, const Eigen::VectorXd& obs,
              const Eigen::VectorXd& act) { return p.log_prob(obs, act); })
      .def_property_readonly("param_count", &GaussianPolicy::param_count)
      .def("params", &GaussianPolicy::params);

  py::class_<ValueNet>(m, "ValueNet")
      .def("value", &ValueNet::value)
      .def("params", &ValueNet::params);

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_readwrite("policy", &Checkpoint::policy)
      .def_readwrite("value", &Checkpoint::value);

  m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("checkpoint"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  py::class_<TrpoConfig>(m, "TrpoConfig")
      .def(py::init<>())
      .def_readwrite("max_kl", &TrpoConfig::max_kl)
      .def_readwrite("cg_iters", &TrpoConfig::cg_iters)
      .def_readwrite("cg_damping", &TrpoConfig::cg_damping)
      .def_readwrite("backtrack_ratio", &TrpoConfig::backtrack_ratio)
      .def_readwrite("max_backtracks", &TrpoConfig::max_backtracks)
      .def_readwrite("discount", &TrpoConfig::discount)
      .def_readwrite("gae_lambda", &TrpoConfig::gae_lambda)
      .def_readwrite("episodes_per_iter", &TrpoConfig::episodes_per_iter)
      .def_readwrite("value_epochs", &TrpoConfig::value_epochs)
      .def_readwrite("value_step", &TrpoConfig::value_step);

  py::class_<IterationStats>(m, "IterationStats")
      .def_readonly("mean_return", &IterationStats::mean_return)
      .def_readonly("success_rate", &IterationStats::success_rate)
      .def_readonly("kl", &IterationStats::kl)
      .def_readonly("surrogate_improvement", &IterationStats::surrogate_improvement)
      .def_readonly("accepted", &IterationStats::accepted)
      .def_readonly("wall_time_s", &IterationStats::wall_time_s);

  m.def("trpo_iteration", &trpo_iteration, py::arg("env"), py::arg("policy"),
        py::arg("value"), py::arg("config"), py::arg("master_seed"),
        py::arg("iteration"),
        "one TRPO round: collect rollouts, update the policy, refit the baseline");

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("n_iterations", &ExperimentConfig::n_iterations)
      .def_readwrite("eval_trials", &ExperimentConfig::eval_trials)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("task", &ExperimentConfig::task)
      .def_readwrite("tool", &ExperimentConfig::tool)
      .def_readwrite("arm", &ExperimentConfig::arm)
      .def_readwrite("gripper", &ExperimentConfig::gripper)
      .def_readwrite("actuation", &ExperimentConfig::actuation)
      .def_readwrite("trpo", &ExperimentConfig::trpo)
      .def("validate", &ExperimentConfig::validate)
      .def("hash", &ExperimentConfig::hash)
      .def("make_env", &ExperimentConfig::make_env);

  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("text"),
        py::arg("origin") = "<string>");
  m.def("make_initial_checkpoint", &make_initial_checkpoint, py::arg("config"));
  m.def("eval_seed", &eval_seed, py::arg("config"));

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("n_trials", &EvalResult::n_trials)
      .def_readonly("n_success", &EvalResult::n_success)
      .def_readonly("success_rate", &EvalResult::success_rate)
      .def_readonly("mean_final_abs_error", &EvalResult::mean_final_abs_error);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("iterations_run", &TrainResult::iterations_run)
      .def_readonly("curve_path", &TrainResult::curve_path)
      .def_readonly("checkpoint_path", &TrainResult::checkpoint_path);

  m.def(
      "train",
      [](const ExperimentConfig& cfg) { return train(cfg); },
      py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "evaluate",
      [](const Checkpoint& ck, const ExperimentConfig& cfg, int n_trials,
         uint64_t seed, const std::string& trace_csv) {
        return evaluate(ck, cfg, n_trials, seed, trace_csv);
      },
      py::arg("checkpoint"), py::arg("config"), py::arg("n_trials"),
      py::arg("seed"), py::arg("trace_csv") = std::string(),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "friction_sweep",
      [](const Checkpoint& ck, const ExperimentConfig& cfg,
         const std::vector<double>& multipliers, const std::string& csv) {
        std::vector<std::pair<double, EvalResult>> out;
        for (const auto& row : friction_sweep(ck, cfg, multipliers, csv))
          out.emplace_back(row.multiplier, row.eval);
        return out;
      },
      py::arg("checkpoint"), py::arg("config"), py::arg("multipliers"),
      py::arg("csv_path") = std::string(),
      py::call_guard<py::gil_scoped_release>());
}
