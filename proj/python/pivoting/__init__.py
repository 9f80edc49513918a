"""In-gripper tool pivoting: stick-slip simulator, TRPO trainer and
experiment harness (C++ core with python bindings)."""

from ._pivoting import (
    ActuationConfig,
    ArmParams,
    Checkpoint,
    ContactMode,
    EvalResult,
    ExperimentConfig,
    GaussianPolicy,
    GripperParams,
    IterationStats,
    MotionPlane,
    PivotEnv,
    PivotState,
    TaskConfig,
    ToolParams,
    TrainResult,
    TrpoConfig,
    ValueNet,
    dynamics_step,
    eval_seed,
    evaluate,
    friction_sweep,
    kinetic_friction_torque,
    load_checkpoint,
    load_config,
    make_initial_checkpoint,
    normal_force,
    parse_config,
    save_checkpoint,
    static_friction_bound,
    stick_torque_required,
    tool_acceleration,
    train,
    trpo_iteration,
    wrap_angle,
)

__all__ = [
    "ActuationConfig",
    "ArmParams",
    "Checkpoint",
    "ContactMode",
    "EvalResult",
    "ExperimentConfig",
    "GaussianPolicy",
    "GripperParams",
    "IterationStats",
    "MotionPlane",
    "PivotEnv",
    "PivotState",
    "TaskConfig",
    "ToolParams",
    "TrainResult",
    "TrpoConfig",
    "ValueNet",
    "dynamics_step",
    "eval_seed",
    "evaluate",
    "friction_sweep",
    "kinetic_friction_torque",
    "load_checkpoint",
    "load_config",
    "make_initial_checkpoint",
    "normal_force",
    "parse_config",
    "save_checkpoint",
    "static_friction_bound",
    "stick_torque_required",
    "tool_acceleration",
    "train",
    "trpo_iteration",
    "wrap_angle",
]
