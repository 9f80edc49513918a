#include "pivoting/trpo.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace pivoting {

void TrpoConfig::validate() const {
  if (!(max_kl > 0.0)) throw std::invalid_argument("max_kl must be > 0");
  if (cg_iters < 1) throw std::invalid_argument("cg_iters must be >= 1");
  if (!(cg_damping >= 0.0)) throw std::invalid_argument("cg_damping must be >= 0");
  if (!(backtrack_ratio > 0.0 && backtrack_ratio < 1.0))
    throw std::invalid_argument("backtrack_ratio must lie in (0, 1)");
  if (max_backtracks < 1)
    throw std::invalid_argument("max_backtracks must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0))
    throw std::invalid_argument("discount must lie in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw std::invalid_argument("gae_lambda must lie in [0, 1]");
  if (episodes_per_iter < 1)
    throw std::invalid_argument("episodes_per_iter must be >= 1");
  if (value_epochs < 0) throw std::invalid_argument("value_epochs must be >= 0");
  if (!(value_step > 0.0)) throw std::invalid_argument("value_step must be > 0");
}

std::vector<double> RolloutBatch::episode_returns() const {
  std::vector<double> out(static_cast<size_t>(n_episodes), 0.0);
  for (Eigen::Index i = 0; i < size(); ++i)
    out[static_cast<size_t>(episode_ids[static_cast<size_t>(i)])] += rewards[i];
  return out;
}

std::vector<bool> RolloutBatch::episode_successes() const {
  std::vector<bool> out(static_cast<size_t>(n_episodes), false);
  for (Eigen::Index i = 0; i < size(); ++i)
    if (dones[static_cast<size_t>(i)])
      out[static_cast<size_t>(episode_ids[static_cast<size_t>(i)])] =
          successes[static_cast<size_t>(i)] != 0;
  return out;
}

RolloutBatch collect_rollouts(PivotEnv& env, const GaussianPolicy& policy,
                              int n_episodes, uint64_t master_seed) {
  if (n_episodes < 1) throw std::invalid_argument("n_episodes must be >= 1");
  const int horizon = env.task().horizon;
  const Eigen::Index total = static_cast<Eigen::Index>(n_episodes) * horizon;

  RolloutBatch batch;
  batch.obs.resize(PivotEnv::kObsDim, total);
  batch.actions.resize(PivotEnv::kActDim, total);
  batch.rewards.resize(total);
  batch.dones.assign(static_cast<size_t>(total), 0);
  batch.episode_ids.assign(static_cast<size_t>(total), 0);
  batch.successes.assign(static_cast<size_t>(total), 0);
  batch.n_episodes = n_episodes;

  Eigen::Index k = 0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    const uint64_t ep_base = mix_seed(master_seed, static_cast<uint64_t>(ep));
    Eigen::VectorXd obs = env.reset(mix_seed(ep_base, 0));
    Rng action_rng(mix_seed(ep_base, 1));
    for (int t = 0; t < horizon; ++t, ++k) {
      const Eigen::VectorXd action = policy.sample_action(obs, action_rng);
      batch.obs.col(k) = obs;
      batch.actions.col(k) = action;
      const StepResult r = env.step(Action{action[0], action[1]});
      batch.rewards[k] = r.reward;
      batch.dones[static_cast<size_t>(k)] = r.done ? 1 : 0;
      batch.episode_ids[static_cast<size_t>(k)] = ep;
      batch.successes[static_cast<size_t>(k)] = r.info.success ? 1 : 0;
      obs = r.obs;
    }
  }
  return batch;
}

void compute_advantages(RolloutBatch& batch, const ValueNet& value_net,
                        double discount, double gae_lambda) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("empty batch");
  batch.values = value_net.values(batch.obs);
  batch.advantages.resize(n);
  batch.returns.resize(n);

  double carry = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const bool terminal = batch.dones[static_cast<size_t>(t)] != 0;
    const double next_value =
        (terminal || t + 1 == n) ? 0.0 : batch.values[t + 1];
    if (terminal) carry = 0.0;
    const double delta =
        batch.rewards[t] + discount * next_value - batch.values[t];
    carry = delta + discount * gae_lambda * carry;
    batch.advantages[t] = carry;
    batch.returns[t] = carry + batch.values[t];
  }

  const double mean = batch.advantages.mean();
  batch.advantages.array() -= mean;
  const double sd = std::sqrt(batch.advantages.squaredNorm() /
                              static_cast<double>(n));
  if (sd > 1e-12) batch.advantages /= sd;
}

double surrogate_loss(const GaussianPolicy& policy,
                      const GaussianPolicy& old_policy,
                      const RolloutBatch& batch) {
  if (batch.advantages.size() != batch.size())
    throw std::logic_error("advantages not computed");
  const Eigen::VectorXd lp_new = policy.log_prob(batch.obs, batch.actions);
  const Eigen::VectorXd lp_old = old_policy.log_prob(batch.obs, batch.actions);
  return ((lp_new - lp_old).array().exp() * batch.advantages.array()).mean();
}

Eigen::VectorXd surrogate_gradient(const GaussianPolicy& policy,
                                   const RolloutBatch& batch) {
  if (batch.advantages.size() != batch.size())
    throw std::logic_error("advantages not computed");
  const Eigen::Index n = batch.size();
  const Eigen::MatrixXd scaled = policy.scale_obs(batch.obs);
  MlpNet::Trace trace;
  const Eigen::MatrixXd mu = policy.mean_net().forward(scaled, trace);
  const Eigen::VectorXd inv_var = (-2.0 * policy.log_std()).array().exp();

  // d log N(a; mu, sigma) / d mu = (a - mu) / sigma^2
  Eigen::MatrixXd diff = batch.actions - mu;
  Eigen::MatrixXd upstream =
      (inv_var.asDiagonal() * diff) * batch.advantages.asDiagonal();
  upstream /= static_cast<double>(n);

  Eigen::VectorXd grad(policy.param_count());
  grad.head(policy.mean_net().param_count()) =
      policy.mean_net().backward(trace, upstream);

  // d log N / d log_std_i = (a_i - mu_i)^2 / sigma_i^2 - 1
  Eigen::VectorXd g_ls = Eigen::VectorXd::Zero(policy.act_dim());
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::VectorXd term =
        diff.col(c).cwiseAbs2().cwiseProduct(inv_var).array() - 1.0;
    g_ls += batch.advantages[c] * term;
  }
  grad.tail(policy.act_dim()) = g_ls / static_cast<double>(n);
  return grad;
}

Eigen::VectorXd fisher_vector_product(const GaussianPolicy& policy,
                                      const Eigen::MatrixXd& obs_batch,
                                      const Eigen::VectorXd& v,
                                      double damping) {
  if (v.size() != policy.param_count())
    throw std::invalid_argument("vector length must match the parameter count");
  const Eigen::Index n = obs_batch.cols();
  if (n == 0) throw std::invalid_argument("empty observation batch");

  const int n_mean = policy.mean_net().param_count();
  const Eigen::VectorXd v_mean = v.head(n_mean);
  const Eigen::VectorXd inv_var = (-2.0 * policy.log_std()).array().exp();

  const Eigen::MatrixXd scaled = policy.scale_obs(obs_batch);
  MlpNet::Trace trace;
  policy.mean_net().forward(scaled, trace);
  const Eigen::MatrixXd tangent = policy.mean_net().param_jvp(trace, v_mean);
  const Eigen::MatrixXd upstream =
      (inv_var.asDiagonal() * tangent) / static_cast<double>(n);

  Eigen::VectorXd out(v.size());
  out.head(n_mean) = policy.mean_net().backward(trace, upstream);
  out.tail(policy.act_dim()) = 2.0 * v.tail(policy.act_dim());
  out += damping * v;
  return out;
}

Eigen::VectorXd conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec,
    const Eigen::VectorXd& b, int iters, double tol) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd p = b;
  double rs = r.squaredNorm();
  const double threshold = tol * std::sqrt(b.squaredNorm());
  if (std::sqrt(rs) <= threshold) return x;

  for (int i = 0; i < iters; ++i) {
    const Eigen::VectorXd ap = matvec(p);
    const double pap = p.dot(ap);
    if (!std::isfinite(pap) || pap <= 0.0)
      throw std::runtime_error("conjugate gradient: matvec is not positive definite");
    const double alpha = rs / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rs_next = r.squaredNorm();
    if (!std::isfinite(rs_next))
      throw std::runtime_error("conjugate gradient: non-finite iterate");
    if (std::sqrt(rs_next) <= threshold) break;
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  return x;
}

LineSearchResult line_search(GaussianPolicy& policy,
                             const GaussianPolicy& old_policy,
                             const RolloutBatch& batch,
                             const Eigen::VectorXd& full_step, double max_kl,
                             double backtrack_ratio, int max_backtracks) {
  const Eigen::VectorXd old_params = old_policy.params();
  const double base_loss = surrogate_loss(old_policy, old_policy, batch);

  double scale = 1.0;
  for (int k = 0; k < max_backtracks; ++k, scale *= backtrack_ratio) {
    policy.set_params(old_params + scale * full_step);
    const double kl = kl_divergence(old_policy, policy, batch.obs);
    const double improvement =
        surrogate_loss(policy, old_policy, batch) - base_loss;
    if (std::isfinite(kl) && std::isfinite(improvement) && kl <= max_kl &&
        improvement > 0.0) {
      LineSearchResult res;
      res.accepted = true;
      res.backtracks = k;
      res.kl = kl;
      res.improvement = improvement;
      return res;
    }
  }
  policy.set_params(old_params);
  return LineSearchResult{};
}

double fit_value_function(ValueNet& value_net, const RolloutBatch& batch,
                          int epochs, double step) {
  if (batch.returns.size() != batch.size())
    throw std::logic_error("returns not computed");
  const Eigen::Index n = batch.size();
  const Eigen::MatrixXd scaled = value_net.scale_obs(batch.obs);

  auto mse_of = [&](const MlpNet& net) {
    const Eigen::VectorXd pred = net.forward(scaled).row(0).transpose();
    return (pred - batch.returns).squaredNorm() / static_cast<double>(n);
  };

  MlpNet net = value_net.net();
  double mse = mse_of(net);

  Eigen::VectorXd m = Eigen::VectorXd::Zero(net.param_count());
  Eigen::VectorXd s = Eigen::VectorXd::Zero(net.param_count());
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr = step;

  for (int epoch = 1; epoch <= epochs && lr > 1e-12; ++epoch) {
    MlpNet::Trace trace;
    const Eigen::VectorXd pred = net.forward(scaled, trace).row(0).transpose();
    const Eigen::MatrixXd upstream =
        (2.0 / static_cast<double>(n)) * (pred - batch.returns).transpose();
    const Eigen::VectorXd grad = net.backward(trace, upstream);

    m = beta1 * m + (1.0 - beta1) * grad;
    s = beta2 * s + (1.0 - beta2) * grad.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(beta1, epoch);
    const double bc2 = 1.0 - std::pow(beta2, epoch);
    const Eigen::VectorXd direction =
        (m / bc1).cwiseQuotient(((s / bc2).cwiseSqrt().array() + eps).matrix());

    // keep the fit monotone: shrink the step until the MSE stops rising,
    // letting it recover on later epochs. A direction that cannot make
    // progress means the momentum went stale; drop it and retry from the
    // raw gradient next epoch.
    const Eigen::VectorXd params = net.params();
    bool committed = false;
    for (int tries = 0; tries < 20; ++tries) {
      net.set_params(params - lr * direction);
      const double candidate = mse_of(net);
      if (candidate <= mse) {
        mse = candidate;
        committed = true;
        break;
      }
      lr *= 0.5;
    }
    if (committed) {
      lr = std::min(step, lr * 1.5);
    } else {
      net.set_params(params);
      m.setZero();
      s.setZero();
    }
  }

  value_net.set_params(net.params());
  return mse;
}

UpdateStats trpo_update(GaussianPolicy& policy, const RolloutBatch& batch,
                        const TrpoConfig& config) {
  config.validate();
  const Eigen::VectorXd g = surrogate_gradient(policy, batch);
  if (g.lpNorm<Eigen::Infinity>() < 1e-12) return UpdateStats{};

  const GaussianPolicy old_policy = policy;
  auto matvec = [&](const Eigen::VectorXd& v) {
    return fisher_vector_product(old_policy, batch.obs, v, config.cg_damping);
  };
  const Eigen::VectorXd x = conjugate_gradient(matvec, g, config.cg_iters);
  const double xg = x.dot(g);
  if (!(xg > 0.0)) return UpdateStats{};

  const double quad = x.dot(matvec(x));
  if (!(quad > 0.0)) return UpdateStats{};
  const Eigen::VectorXd full_step = std::sqrt(2.0 * config.max_kl / quad) * x;

  const LineSearchResult ls =
      line_search(policy, old_policy, batch, full_step, config.max_kl,
                  config.backtrack_ratio, config.max_backtracks);
  UpdateStats stats;
  stats.accepted = ls.accepted;
  stats.backtracks = ls.backtracks;
  stats.kl = ls.kl;
  stats.surrogate_improvement = ls.improvement;
  return stats;
}

IterationStats trpo_iteration(PivotEnv& env, GaussianPolicy& policy,
                              ValueNet& value_net, const TrpoConfig& config,
                              uint64_t master_seed, int iteration) {
  const auto t0 = std::chrono::steady_clock::now();
  const uint64_t iter_seed =
      mix_seed(master_seed, 0x17e0 + static_cast<uint64_t>(iteration));

  RolloutBatch batch =
      collect_rollouts(env, policy, config.episodes_per_iter, iter_seed);
  compute_advantages(batch, value_net, config.discount, config.gae_lambda);
  const UpdateStats update = trpo_update(policy, batch, config);
  const double value_mse =
      fit_value_function(value_net, batch, config.value_epochs, config.value_step);

  IterationStats stats;
  const auto returns = batch.episode_returns();
  double acc = 0.0;
  for (double r : returns) acc += r;
  stats.mean_return = acc / static_cast<double>(returns.size());
  const auto wins = batch.episode_successes();
  int n_success = 0;
  for (bool w : wins) n_success += w ? 1 : 0;
  stats.success_rate = static_cast<double>(n_success) /
                       static_cast<double>(wins.size());
  stats.kl = update.kl;
  stats.surrogate_improvement = update.surrogate_improvement;
  stats.accepted = update.accepted;
  stats.value_mse = value_mse;
  stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return stats;
}

}  // namespace pivoting
