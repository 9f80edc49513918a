#include "pivoting/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>

namespace pivoting {

namespace fs = std::filesystem;

Checkpoint make_initial_checkpoint(const ExperimentConfig& config) {
  const Eigen::VectorXd obs_scale = default_obs_scale(config.task, config.gripper);
  Rng rng(mix_seed(config.seed, 0x1417));
  Checkpoint ck;
  ck.policy = GaussianPolicy::randomized({PivotEnv::kObsDim, 32, 16, PivotEnv::kActDim},
                                         obs_scale, std::log(0.5), rng);
  ck.value = ValueNet::randomized({PivotEnv::kObsDim, 32, 16, 1}, obs_scale, rng);
  return ck;
}

uint64_t eval_seed(const ExperimentConfig& config) {
  return mix_seed(config.seed, 0xe7a1);
}

ExperimentConfig with_idealized(ExperimentConfig config, bool idealized) {
  config.actuation.idealized = idealized;
  return config;
}

ExperimentConfig with_friction_multiplier(ExperimentConfig config,
                                          double multiplier) {
  if (!(multiplier > 0.0))
    throw std::invalid_argument("friction multiplier must be > 0");
  config.tool.static_coeff *= multiplier;
  config.tool.coulomb_coeff *= multiplier;
  config.tool.validate();
  return config;
}

ExperimentConfig proxy_config(ExperimentConfig config) {
  config = with_idealized(std::move(config), false);
  return with_friction_multiplier(std::move(config), 1.3);
}

TrainResult train(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  fs::create_directories(config.out_dir);

  PivotEnv env = config.make_env();
  Checkpoint agent = make_initial_checkpoint(config);

  TrainResult result;
  result.curve_path = (fs::path(config.out_dir) / "learning_curve.csv").string();
  result.checkpoint_path = (fs::path(config.out_dir) / "checkpoint.bin").string();

  CsvWriter csv(result.curve_path,
                "config_hash=" + config.hash() + " seed=" + std::to_string(config.seed),
                {"iteration", "mean_return", "success_rate", "kl",
                 "surrogate_improvement", "wall_time"});

  for (int iter = 0; iter < config.n_iterations; ++iter) {
    const IterationStats stats = trpo_iteration(
        env, agent.policy, agent.value, config.trpo, config.seed, iter);
    result.curve.push_back(stats);
    result.iterations_run = iter + 1;
    csv.write_row({CsvWriter::fmt(iter), CsvWriter::fmt(stats.mean_return),
                   CsvWriter::fmt(stats.success_rate), CsvWriter::fmt(stats.kl),
                   CsvWriter::fmt(stats.surrogate_improvement),
                   CsvWriter::fmt(stats.wall_time_s)});
    if (options.on_iteration &&
        !options.on_iteration(iter, stats, agent.policy, agent.value))
      break;
  }

  save_checkpoint(result.checkpoint_path, agent);
  return result;
}

EvalResult evaluate(const Checkpoint& checkpoint,
                    const ExperimentConfig& config, int n_trials,
                    uint64_t seed, const std::string& trace_csv_path) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (checkpoint.policy.obs_dim() != PivotEnv::kObsDim ||
      checkpoint.policy.act_dim() != PivotEnv::kActDim)
    throw std::invalid_argument("checkpoint does not match this task");

  PivotEnv env = config.make_env();
  std::unique_ptr<CsvWriter> trace;
  if (!trace_csv_path.empty())
    trace = std::make_unique<CsvWriter>(
        trace_csv_path,
        "config_hash=" + config.hash() + " seed=" + std::to_string(seed),
        std::vector<std::string>{"trial", "step", "abs_angle_error"});

  EvalResult result;
  result.n_trials = n_trials;
  double err_acc = 0.0;
  for (int trial = 0; trial < n_trials; ++trial) {
    Eigen::VectorXd obs = env.reset(mix_seed(seed, static_cast<uint64_t>(trial)));
    bool success = false;
    double final_err = 0.0;
    for (int t = 0; t < config.task.horizon; ++t) {
      const Eigen::VectorXd a = checkpoint.policy.mean(obs);
      const StepResult r = env.step(Action{a[0], a[1]});
      obs = r.obs;
      final_err = std::fabs(r.obs[0]);
      success = r.info.success;
      if (trace)
        trace->write_row({CsvWriter::fmt(trial), CsvWriter::fmt(t),
                          CsvWriter::fmt(final_err)});
    }
    result.n_success += success ? 1 : 0;
    err_acc += final_err;
  }
  result.success_rate =
      static_cast<double>(result.n_success) / static_cast<double>(n_trials);
  result.mean_final_abs_error = err_acc / static_cast<double>(n_trials);
  return result;
}

std::vector<SweepRow> friction_sweep(const Checkpoint& checkpoint,
                                     const ExperimentConfig& config,
                                     const std::vector<double>& multipliers,
                                     const std::string& csv_path) {
  if (multipliers.empty())
    throw std::invalid_argument("sweep needs at least one multiplier");
  std::vector<SweepRow> rows;
  rows.reserve(multipliers.size());
  for (double m : multipliers) {
    const ExperimentConfig scaled = with_friction_multiplier(config, m);
    SweepRow row;
    row.multiplier = m;
    row.eval = evaluate(checkpoint, scaled, config.eval_trials, eval_seed(config));
    rows.push_back(row);
  }
  if (!csv_path.empty()) {
    CsvWriter csv(csv_path,
                  "config_hash=" + config.hash() + " seed=" + std::to_string(config.seed),
                  {"multiplier", "success_rate", "n_trials"});
    for (const auto& row : rows)
      csv.write_row({CsvWriter::fmt(row.multiplier),
                     CsvWriter::fmt(row.eval.success_rate),
                     CsvWriter::fmt(row.eval.n_trials)});
  }
  return rows;
}

TransferResult transfer_study(const ExperimentConfig& config,
                              const TrainOptions& options) {
  config.validate();
  fs::create_directories(config.out_dir);

  ExperimentConfig cfg_ideal = with_idealized(config, true);
  cfg_ideal.out_dir = (fs::path(config.out_dir) / "idealized").string();
  ExperimentConfig cfg_model = with_idealized(config, false);
  cfg_model.out_dir = (fs::path(config.out_dir) / "modeled").string();

  const TrainResult run_ideal = train(cfg_ideal, options);
  const TrainResult run_model = train(cfg_model, options);
  const Checkpoint pol_ideal = load_checkpoint(run_ideal.checkpoint_path);
  const Checkpoint pol_model = load_checkpoint(run_model.checkpoint_path);

  const ExperimentConfig env_ideal = cfg_ideal;
  const ExperimentConfig env_proxy = proxy_config(config);
  const uint64_t seed = eval_seed(config);
  const int trials = config.eval_trials;

  TransferResult result;
  result.idealized_checkpoint = run_ideal.checkpoint_path;
  result.modeled_checkpoint = run_model.checkpoint_path;
  result.idealized_on_idealized = evaluate(pol_ideal, env_ideal, trials, seed);
  result.idealized_on_proxy = evaluate(pol_ideal, env_proxy, trials, seed);
  result.modeled_on_idealized = evaluate(pol_model, env_ideal, trials, seed);
  result.modeled_on_proxy = evaluate(pol_model, env_proxy, trials, seed);

  CsvWriter csv((fs::path(config.out_dir) / "transfer_matrix.csv").string(),
                "config_hash=" + config.hash() + " seed=" + std::to_string(config.seed),
                {"policy", "environment", "success_rate", "n_trials"});
  auto emit = [&](const char* pol, const char* envname, const EvalResult& e) {
    csv.write_row({pol, envname, CsvWriter::fmt(e.success_rate),
                   CsvWriter::fmt(e.n_trials)});
  };
  emit("idealized", "idealized", result.idealized_on_idealized);
  emit("idealized", "real_proxy", result.idealized_on_proxy);
  emit("modeled", "idealized", result.modeled_on_idealized);
  emit("modeled", "real_proxy", result.modeled_on_proxy);
  return result;
}

// ---------------------------------------------------------------------------
// plot helpers

namespace plot {

namespace {

double to_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::runtime_error("CSV cell is not numeric: '" + s + "'");
  }
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

void write_svg(const std::vector<Series>& series, const std::string& path,
               const std::string& title, const std::string& x_label,
               const std::string& y_label) {
  const double width = 800, height = 500;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        x_min = x_max = s.x[i];
        y_min = y_max = s.y[i];
        first = false;
      }
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  auto px = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open SVG for writing: " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << svg_escape(title) << "</text>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
     << width - mr << "\" y2=\"" << height - mb
     << "\" stroke=\"black\"/>\n<line x1=\"" << ml << "\" y1=\"" << mt
     << "\" x2=\"" << ml << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  char buf[64];
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    std::snprintf(buf, sizeof(buf), "%.3g", xv);
    os << "<text x=\"" << px(xv) << "\" y=\"" << height - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", yv);
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << buf << "</text>\n";
  }
  os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << svg_escape(x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        "transform=\"rotate(-90 18 " << (mt + height - mb) / 2 << ")\">"
     << svg_escape(y_label) << "</text>\n";

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    if (s.x.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << colors[si % 4]
       << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << width - mr - 6 << "\" y=\"" << mt + 16 * (si + 1)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
          "fill=\"" << colors[si % 4] << "\">" << svg_escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

std::vector<double> moving_average(const std::vector<double>& v, int window) {
  std::vector<double> out(v.size());
  double acc = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (i >= static_cast<size_t>(window)) acc -= v[i - static_cast<size_t>(window)];
    const size_t n = std::min(i + 1, static_cast<size_t>(window));
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

struct CurveData {
  std::vector<double> iteration, mean_return, success_rate;
};

CurveData curve_data(const CsvTable& table) {
  const int ci = table.column("iteration");
  const int cr = table.column("mean_return");
  const int cs = table.column("success_rate");
  if (ci < 0 || cr < 0 || cs < 0)
    throw std::runtime_error("not a learning-curve CSV");
  CurveData d;
  for (const auto& row : table.rows) {
    d.iteration.push_back(to_double(row[static_cast<size_t>(ci)]));
    d.mean_return.push_back(to_double(row[static_cast<size_t>(cr)]));
    d.success_rate.push_back(to_double(row[static_cast<size_t>(cs)]));
  }
  return d;
}

struct TraceData {
  std::vector<double> step, mean_err;
};

TraceData trace_data(const CsvTable& table) {
  const int ct = table.column("trial");
  const int cs = table.column("step");
  const int ce = table.column("abs_angle_error");
  if (ct < 0 || cs < 0 || ce < 0)
    throw std::runtime_error("not an evaluation-trace CSV");
  std::map<long, std::pair<double, long>> acc;  // step -> (sum, count)
  for (const auto& row : table.rows) {
    const long step = std::lround(to_double(row[static_cast<size_t>(cs)]));
    const double err = to_double(row[static_cast<size_t>(ce)]);
    auto& slot = acc[step];
    slot.first += err;
    slot.second += 1;
  }
  TraceData d;
  for (const auto& [step, slot] : acc) {
    d.step.push_back(static_cast<double>(step));
    d.mean_err.push_back(slot.first / static_cast<double>(slot.second));
  }
  return d;
}

}  // namespace

void write_learning_curve_summary(const CsvTable& table,
                                  const std::string& out_csv, int window) {
  const CurveData d = curve_data(table);
  const auto ret_ma = moving_average(d.mean_return, window);
  const auto suc_ma = moving_average(d.success_rate, window);
  CsvWriter csv(out_csv, "learning-curve summary, moving-average window=" +
                             std::to_string(window),
                {"iteration", "mean_return", "mean_return_ma", "success_rate",
                 "success_rate_ma"});
  for (size_t i = 0; i < d.iteration.size(); ++i)
    csv.write_row({CsvWriter::fmt(d.iteration[i]), CsvWriter::fmt(d.mean_return[i]),
                   CsvWriter::fmt(ret_ma[i]), CsvWriter::fmt(d.success_rate[i]),
                   CsvWriter::fmt(suc_ma[i])});
}

void write_error_vs_time_summary(const CsvTable& table,
                                 const std::string& out_csv) {
  const TraceData d = trace_data(table);
  CsvWriter csv(out_csv, "mean |angle error| per control step across trials",
                {"step", "mean_abs_angle_error"});
  for (size_t i = 0; i < d.step.size(); ++i)
    csv.write_row({CsvWriter::fmt(d.step[i]), CsvWriter::fmt(d.mean_err[i])});
}

void write_learning_curve_svg(const CsvTable& table,
                              const std::string& out_svg) {
  const CurveData d = curve_data(table);
  Series ret{"mean return", d.iteration, d.mean_return};
  Series suc{"success rate", d.iteration, d.success_rate};
  write_svg({ret, suc}, out_svg, "Training progress", "iteration", "value");
}

void write_error_vs_time_svg(const CsvTable& table,
                             const std::string& out_svg) {
  const TraceData d = trace_data(table);
  Series err{"mean |angle error|", d.step, d.mean_err};
  write_svg({err}, out_svg, "Distance to target vs time", "control step",
            "|angle error| (rad)");
}

void render(const std::string& csv_path, const std::string& out_path) {
  const CsvTable table = read_csv(csv_path);
  const bool is_curve = table.column("iteration") >= 0;
  const bool is_trace = table.column("trial") >= 0 && table.column("step") >= 0;
  const bool svg = out_path.size() > 4 &&
                   out_path.compare(out_path.size() - 4, 4, ".svg") == 0;
  if (is_curve) {
    if (svg) write_learning_curve_svg(table, out_path);
    else write_learning_curve_summary(table, out_path);
  } else if (is_trace) {
    if (svg) write_error_vs_time_svg(table, out_path);
    else write_error_vs_time_summary(table, out_path);
  } else {
    throw std::runtime_error("unrecognized CSV header in " + csv_path);
  }
}

}  // namespace plot
}  // namespace pivoting
