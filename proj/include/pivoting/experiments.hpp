#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pivoting/config.hpp"
#include "pivoting/csv.hpp"
#include "pivoting/policy.hpp"
#include "pivoting/trpo.hpp"

namespace pivoting {

// freshly initialized (untrained) policy + baseline for a config
Checkpoint make_initial_checkpoint(const ExperimentConfig& config);

// deterministic seed used by evaluation-style commands
uint64_t eval_seed(const ExperimentConfig& config);

// config transforms used by the sweep and transfer studies
ExperimentConfig with_idealized(ExperimentConfig config, bool idealized);
ExperimentConfig with_friction_multiplier(ExperimentConfig config,
                                          double multiplier);
// harsher stand-in for the real system: modeled actuation with shifted
// friction
ExperimentConfig proxy_config(ExperimentConfig config);

struct TrainOptions {
  // called after every iteration; return false to stop the run early
  std::function<bool(int iteration, const IterationStats& stats,
                     const GaussianPolicy& policy, const ValueNet& value)>
      on_iteration;
};

struct TrainResult {
  std::vector<IterationStats> curve;
  int iterations_run = 0;
  std::string curve_path;
  std::string checkpoint_path;
};

// Full training run: writes <out_dir>/learning_curve.csv and
// <out_dir>/checkpoint.bin, deterministic for a fixed config.
TrainResult train(const ExperimentConfig& config,
                  const TrainOptions& options = {});

struct EvalResult {
  int n_trials = 0;
  int n_success = 0;
  double success_rate = 0.0;
  double mean_final_abs_error = 0.0;
};

// Deterministic evaluation with mean actions (no exploration noise).
// When trace_csv_path is non-empty, writes per-step |angle error| rows
// (trial, step, abs_angle_error).
EvalResult evaluate(const Checkpoint& checkpoint,
                    const ExperimentConfig& config, int n_trials,
                    uint64_t seed, const std::string& trace_csv_path = "");

struct SweepRow {
  double multiplier = 1.0;
  EvalResult eval;
};

// Evaluate one fixed policy across environments whose static/Coulomb
// friction is scaled by each multiplier.
std::vector<SweepRow> friction_sweep(const Checkpoint& checkpoint,
                                     const ExperimentConfig& config,
                                     const std::vector<double>& multipliers,
                                     const std::string& csv_path = "");

struct TransferResult {
  EvalResult idealized_on_idealized;
  EvalResult idealized_on_proxy;
  EvalResult modeled_on_idealized;
  EvalResult modeled_on_proxy;
  std::string idealized_checkpoint;
  std::string modeled_checkpoint;
};

// Train once with idealized control and once with modeled control, then
// evaluate both policies on the idealized environment and on the real
// proxy. Writes <out_dir>/transfer_matrix.csv.
TransferResult transfer_study(const ExperimentConfig& config,
                              const TrainOptions& options = {});

namespace plot {

// Summaries/plots for the two CSV kinds the harness emits. render()
// picks the table kind from the header and the output format from the
// file extension (.svg renders a chart, anything else a summary CSV).
void render(const std::string& csv_path, const std::string& out_path);

void write_learning_curve_summary(const CsvTable& table,
                                  const std::string& out_csv, int window = 10);
void write_error_vs_time_summary(const CsvTable& table,
                                 const std::string& out_csv);
void write_learning_curve_svg(const CsvTable& table,
                              const std::string& out_svg);
void write_error_vs_time_svg(const CsvTable& table,
                             const std::string& out_svg);

}  // namespace plot
}  // namespace pivoting
