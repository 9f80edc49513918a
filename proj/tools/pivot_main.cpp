// Command-line front end for the pivoting simulator and trainer.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "pivoting/experiments.hpp"

namespace fs = std::filesystem;
using namespace pivoting;

namespace {

ExperimentConfig load_with_overrides(const std::string& config_path,
                                     const uint64_t* seed,
                                     const std::string* out_dir) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out_dir && !out_dir->empty()) cfg.out_dir = *out_dir;
  cfg.validate();
  return cfg;
}

void print_eval(const char* tag, const EvalResult& e) {
  std::printf("%s: success %d/%d (%.1f%%), mean final |angle error| %.4f rad\n",
              tag, e.n_success, e.n_trials, 100.0 * e.success_rate,
              e.mean_final_abs_error);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"In-gripper tool pivoting: simulator, TRPO trainer and "
               "experiment harness"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, out_dir, csv_path, out_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  std::vector<double> multipliers{1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0};

  auto* train_cmd = app.add_subcommand("train", "train a policy with TRPO");
  train_cmd->add_option("--config", config_path, "experiment config file")
      ->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "master seed (overrides the config)")
      ->each([&](const std::string&) { seed_set = true; });
  train_cmd->add_option("--out", out_dir, "output directory (overrides the config)");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--config", config_path, "experiment config file")
      ->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--trials", trials, "number of evaluation episodes");
  eval_cmd->add_option("--seed", seed, "evaluation seed (overrides the config)")
      ->each([&](const std::string&) { seed_set = true; });
  eval_cmd->add_option("--out", out_dir, "directory for trace/summary CSVs");

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "evaluate one checkpoint across friction multipliers");
  sweep_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--config", config_path, "experiment config file")
      ->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--multipliers", multipliers,
                        "friction multipliers to test");
  sweep_cmd->add_option("--seed", seed, "evaluation seed (overrides the config)")
      ->each([&](const std::string&) { seed_set = true; });
  sweep_cmd->add_option("--out", out_dir, "directory for the sweep CSV");

  auto* transfer_cmd = app.add_subcommand(
      "transfer", "idealized-control vs modeled-control transfer study");
  transfer_cmd->add_option("--config", config_path, "experiment config file")
      ->required()->check(CLI::ExistingFile);
  transfer_cmd->add_option("--seed", seed, "master seed (overrides the config)")
      ->each([&](const std::string&) { seed_set = true; });
  transfer_cmd->add_option("--out", out_dir, "output directory (overrides the config)");

  auto* plot_cmd = app.add_subcommand(
      "plot", "summarize a harness CSV (learning curve or eval traces)");
  plot_cmd->add_option("--csv", csv_path, "input CSV")
      ->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", out_path,
                       "output file (.svg chart, otherwise summary CSV)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const ExperimentConfig cfg = load_with_overrides(
          config_path, seed_set ? &seed : nullptr, &out_dir);
      TrainOptions opts;
      opts.on_iteration = [&](int iter, const IterationStats& st,
                              const GaussianPolicy&, const ValueNet&) {
        std::printf("iter %4d  return %8.3f  success %5.1f%%  kl %.5f\n", iter,
                    st.mean_return, 100.0 * st.success_rate, st.kl);
        std::fflush(stdout);
        return true;
      };
      const TrainResult res = train(cfg, opts);
      std::printf("wrote %s and %s\n", res.curve_path.c_str(),
                  res.checkpoint_path.c_str());
    } else if (*eval_cmd) {
      const ExperimentConfig cfg =
          load_with_overrides(config_path, nullptr, nullptr);
      const Checkpoint ck = load_checkpoint(checkpoint_path);
      const int n = trials > 0 ? trials : cfg.eval_trials;
      const uint64_t s = seed_set ? seed : eval_seed(cfg);
      const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
      fs::create_directories(dir);
      const std::string trace_path = (dir / "eval_traces.csv").string();
      const EvalResult res = evaluate(ck, cfg, n, s, trace_path);
      CsvWriter summary((dir / "eval_summary.csv").string(),
                        "config_hash=" + cfg.hash() + " seed=" + std::to_string(s),
                        {"n_trials", "n_success", "success_rate",
                         "mean_final_abs_error"});
      summary.write_row({CsvWriter::fmt(res.n_trials), CsvWriter::fmt(res.n_success),
                         CsvWriter::fmt(res.success_rate),
                         CsvWriter::fmt(res.mean_final_abs_error)});
      print_eval("eval", res);
      std::printf("wrote %s\n", trace_path.c_str());
    } else if (*sweep_cmd) {
      ExperimentConfig cfg = load_with_overrides(config_path, nullptr, nullptr);
      if (seed_set) cfg.seed = seed;
      const Checkpoint ck = load_checkpoint(checkpoint_path);
      const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
      fs::create_directories(dir);
      const std::string path = (dir / "friction_sweep.csv").string();
      const auto rows = friction_sweep(ck, cfg, multipliers, path);
      for (const auto& row : rows)
        std::printf("multiplier %4.2f: success %5.1f%% (%d/%d)\n", row.multiplier,
                    100.0 * row.eval.success_rate, row.eval.n_success,
                    row.eval.n_trials);
      std::printf("wrote %s\n", path.c_str());
    } else if (*transfer_cmd) {
      const ExperimentConfig cfg = load_with_overrides(
          config_path, seed_set ? &seed : nullptr, &out_dir);
      TrainOptions opts;
      opts.on_iteration = [&](int iter, const IterationStats& st,
                              const GaussianPolicy&, const ValueNet&) {
        if (iter % 10 == 0)
          std::printf("  iter %4d  return %8.3f  success %5.1f%%\n", iter,
                      st.mean_return, 100.0 * st.success_rate);
        std::fflush(stdout);
        return true;
      };
      const TransferResult res = transfer_study(cfg, opts);
      print_eval("idealized policy on idealized env", res.idealized_on_idealized);
      print_eval("idealized policy on real proxy   ", res.idealized_on_proxy);
      print_eval("modeled   policy on idealized env", res.modeled_on_idealized);
      print_eval("modeled   policy on real proxy   ", res.modeled_on_proxy);
    } else if (*plot_cmd) {
      plot::render(csv_path, out_path);
      std::printf("wrote %s\n", out_path.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
