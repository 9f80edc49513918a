#pragma once

#include <cstdint>
#include <string>

#include "pivoting/environment.hpp"
#include "pivoting/trpo.hpp"

namespace pivoting {

// Everything a run needs, in one place. Loadable from a sectioned
// key=value text file (see README for the schema); unknown sections or
// keys are errors.
struct ExperimentConfig {
  uint64_t seed = 1;
  int n_iterations = 300;
  int eval_trials = 30;
  std::string out_dir = "runs/out";

  TaskConfig task;
  ToolParams tool;
  ArmParams arm;
  GripperParams gripper;
  ActuationConfig actuation;
  TrpoConfig trpo;

  void validate() const;

  PivotEnv make_env() const;

  // key=value dump in a fixed order; basis of the config hash
  std::string canonical_string() const;
  // FNV-1a over the canonical string, as fixed-width hex
  std::string hash() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text,
                              const std::string& origin = "<string>");

// fixed per-feature observation scaling used by freshly created nets
Eigen::VectorXd default_obs_scale(const TaskConfig& task,
                                  const GripperParams& gripper);

}  // namespace pivoting
