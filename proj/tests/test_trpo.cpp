#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pivoting/trpo.hpp"

using namespace pivoting;

namespace {

PivotEnv smoke_env(bool idealized = false, int horizon = 50) {
  TaskConfig task;
  task.horizon = horizon;
  ActuationConfig act;
  act.idealized = idealized;
  return PivotEnv(task, ToolParams(0.1, 0.01, 0.1, 0.02, 0.01, 0.02),
                  ArmParams(0.3, 9.81, MotionPlane::kHorizontal),
                  GripperParams(1000.0, 0.03, 0.02, 0.06, 0.05), act);
}

GaussianPolicy smoke_policy(uint64_t seed) {
  Rng rng(seed);
  return GaussianPolicy::randomized({5, 8, 6, 2}, Eigen::VectorXd::Ones(5),
                                    std::log(0.5), rng);
}

ValueNet smoke_value(uint64_t seed) {
  Rng rng(seed);
  return ValueNet::randomized({5, 8, 6, 1}, Eigen::VectorXd::Ones(5), rng);
}

// value net pinned to a constant prediction
ValueNet constant_value(int obs_dim, double c) {
  MlpNet net({obs_dim, 1});
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(obs_dim + 1);
  theta[obs_dim] = c;
  net.set_params(theta);
  return ValueNet(net, Eigen::VectorXd::Ones(obs_dim));
}

RolloutBatch tiny_batch(const Eigen::VectorXd& rewards,
                        const std::vector<uint8_t>& dones, int obs_dim = 5,
                        uint64_t seed = 7) {
  Rng rng(seed);
  const auto n = rewards.size();
  RolloutBatch b;
  b.obs.resize(obs_dim, n);
  b.actions.resize(2, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (int r = 0; r < obs_dim; ++r) b.obs(r, c) = rng.uniform(-1.0, 1.0);
    for (int r = 0; r < 2; ++r) b.actions(r, c) = rng.uniform(-1.0, 1.0);
  }
  b.rewards = rewards;
  b.dones = dones;
  b.episode_ids.assign(static_cast<size_t>(n), 0);
  b.successes.assign(static_cast<size_t>(n), 0);
  b.n_episodes = 1;
  int ep = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    b.episode_ids[static_cast<size_t>(i)] = ep;
    if (dones[static_cast<size_t>(i)]) ++ep;
  }
  b.n_episodes = std::max(ep, 1);
  return b;
}

// reference double-loop advantage computation
Eigen::VectorXd brute_force_gae(const Eigen::VectorXd& rewards,
                                const Eigen::VectorXd& values,
                                const std::vector<uint8_t>& dones,
                                double discount, double lambda) {
  const auto n = rewards.size();
  Eigen::VectorXd deltas(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double next_v =
        (dones[static_cast<size_t>(t)] || t + 1 == n) ? 0.0 : values[t + 1];
    deltas[t] = rewards[t] + discount * next_v - values[t];
  }
  Eigen::VectorXd adv = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    double weight = 1.0;
    for (Eigen::Index k = t; k < n; ++k) {
      adv[t] += weight * deltas[k];
      if (dones[static_cast<size_t>(k)]) break;
      weight *= discount * lambda;
    }
  }
  return adv;
}

void normalize(Eigen::VectorXd& v) {
  v.array() -= v.mean();
  const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
  if (sd > 1e-12) v /= sd;
}

}  // namespace

TEST_CASE("rollouts: exact length, determinism, bounded returns") {
  PivotEnv env = smoke_env(false, 200);
  const GaussianPolicy policy = smoke_policy(1);

  RolloutBatch one = collect_rollouts(env, policy, 1, 99);
  CHECK(one.size() == 200);
  CHECK(one.n_episodes == 1);
  CHECK(one.dones.back() == 1);

  RolloutBatch a = collect_rollouts(env, policy, 3, 123);
  RolloutBatch b = collect_rollouts(env, policy, 3, 123);
  CHECK(a.obs == b.obs);
  CHECK(a.actions == b.actions);
  CHECK(a.rewards == b.rewards);

  for (double ret : a.episode_returns()) {
    CHECK(ret >= -200.0);
    CHECK(ret <= 200.0);
  }
}

TEST_CASE("advantages: lambda=1 with zero baseline gives return-to-go") {
  Eigen::VectorXd rewards(4);
  rewards << 1.0, 2.0, 3.0, 4.0;
  RolloutBatch b = tiny_batch(rewards, {0, 0, 0, 1});
  compute_advantages(b, constant_value(5, 0.0), 0.9, 1.0);
  // returns keep the raw scale: discounted tail sums
  CHECK(b.returns[3] == doctest::Approx(4.0));
  CHECK(b.returns[2] == doctest::Approx(3.0 + 0.9 * 4.0));
  CHECK(b.returns[1] == doctest::Approx(2.0 + 0.9 * (3.0 + 0.9 * 4.0)));
  CHECK(b.returns[0] == doctest::Approx(1.0 + 0.9 * (2.0 + 0.9 * (3.0 + 0.9 * 4.0))));
}

TEST_CASE("advantages: lambda=0 reduces to one-step residuals") {
  Eigen::VectorXd rewards(3);
  rewards << 1.0, 0.0, 1.0;
  RolloutBatch b = tiny_batch(rewards, {0, 0, 1});
  const ValueNet v = constant_value(5, 0.5);
  compute_advantages(b, v, 0.9, 0.0);
  Eigen::VectorXd expected(3);
  expected << 1.0 + 0.9 * 0.5 - 0.5, 0.0 + 0.9 * 0.5 - 0.5, 1.0 - 0.5;
  normalize(expected);
  CHECK((b.advantages - expected).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("advantages match the brute-force double loop") {
  Eigen::VectorXd rewards(3);
  rewards << 1.0, 0.0, 1.0;
  RolloutBatch b = tiny_batch(rewards, {0, 0, 1});
  const ValueNet v = constant_value(5, 0.5);
  compute_advantages(b, v, 0.9, 0.8);

  Eigen::VectorXd expected = brute_force_gae(
      rewards, Eigen::VectorXd::Constant(3, 0.5), {0, 0, 1}, 0.9, 0.8);
  // returns are raw advantages plus the baseline
  for (int t = 0; t < 3; ++t)
    CHECK(b.returns[t] == doctest::Approx(expected[t] + 0.5).epsilon(1e-12));
  normalize(expected);
  CHECK((b.advantages - expected).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("advantages are normalized over multi-episode batches") {
  PivotEnv env = smoke_env();
  const GaussianPolicy policy = smoke_policy(3);
  RolloutBatch b = collect_rollouts(env, policy, 4, 7);
  compute_advantages(b, smoke_value(4), 0.99, 0.97);
  CHECK(std::fabs(b.advantages.mean()) < 1e-10);
  const double sd =
      std::sqrt(b.advantages.squaredNorm() / static_cast<double>(b.size()));
  CHECK(sd == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("surrogate: zero at the collection policy, factorizes over ratios") {
  PivotEnv env = smoke_env();
  const GaussianPolicy policy = smoke_policy(5);
  RolloutBatch b = collect_rollouts(env, policy, 2, 11);
  compute_advantages(b, smoke_value(6), 0.99, 0.97);
  CHECK(std::fabs(surrogate_loss(policy, policy, b)) < 1e-10);

  // unit advantages turn the loss into the mean importance ratio
  RolloutBatch ones = b;
  ones.advantages = Eigen::VectorXd::Ones(b.size());
  GaussianPolicy other = smoke_policy(55);
  const Eigen::VectorXd ratios =
      (other.log_prob(b.obs, b.actions) - policy.log_prob(b.obs, b.actions))
          .array()
          .exp();
  CHECK(surrogate_loss(other, policy, ones) ==
        doctest::Approx(ratios.mean()).epsilon(1e-12));
}

TEST_CASE("surrogate gradient matches finite differences") {
  PivotEnv env = smoke_env();
  const GaussianPolicy policy = smoke_policy(9);
  RolloutBatch b = collect_rollouts(env, policy, 2, 13);
  compute_advantages(b, smoke_value(10), 0.99, 0.97);

  const Eigen::VectorXd analytic = surrogate_gradient(policy, b);
  GaussianPolicy probe = policy;
  const Eigen::VectorXd theta = policy.params();
  Rng pick(14);
  const double h = 1e-5;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index i =
        static_cast<Eigen::Index>(pick.uniform() * static_cast<double>(theta.size()));
    Eigen::VectorXd tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    probe.set_params(tp);
    const double up = surrogate_loss(probe, policy, b);
    probe.set_params(tm);
    const double dn = surrogate_loss(probe, policy, b);
    const double fd = (up - dn) / (2.0 * h);
    CHECK(analytic[i] == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("conjugate gradient: identity solves in one iteration") {
  Eigen::VectorXd b(4);
  b << 1.0, -2.0, 3.0, 0.5;
  int calls = 0;
  auto matvec = [&](const Eigen::VectorXd& v) {
    ++calls;
    return v;
  };
  const Eigen::VectorXd x = conjugate_gradient(matvec, b, 10);
  CHECK((x - b).norm() < 1e-14);
  CHECK(calls == 1);
}

TEST_CASE("conjugate gradient: a 2x2 system solved exactly") {
  Eigen::Matrix2d A;
  A << 4.0, 1.0, 1.0, 3.0;
  Eigen::VectorXd b(2);
  b << 1.0, 2.0;
  const Eigen::VectorXd x = conjugate_gradient(
      [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return A * v; }, b, 10);
  CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-10));
  CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-10));
}

TEST_CASE("conjugate gradient matches a dense solve on random SPD systems") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd M(10, 10);
    for (int r = 0; r < 10; ++r)
      for (int c = 0; c < 10; ++c) M(r, c) = rng.uniform(-1.0, 1.0);
    const Eigen::MatrixXd A =
        M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(10, 10);
    Eigen::VectorXd b(10);
    for (int r = 0; r < 10; ++r) b[r] = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd x = conjugate_gradient(
        [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return A * v; }, b, 50,
        1e-12);
    const Eigen::VectorXd direct = A.ldlt().solve(b);
    CHECK((x - direct).norm() / direct.norm() < 1e-8);
  }
}

TEST_CASE("conjugate gradient flags non-finite systems") {
  Eigen::VectorXd b(2);
  b << 1.0, 1.0;
  auto bad = [](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return std::numeric_limits<double>::quiet_NaN() * v;
  };
  CHECK_THROWS_AS(conjugate_gradient(bad, b, 5), std::runtime_error);
}

TEST_CASE("fisher-vector product: linearity at zero and symmetry") {
  const GaussianPolicy policy = smoke_policy(17);
  PivotEnv env = smoke_env();
  const RolloutBatch b = collect_rollouts(env, policy, 1, 19);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(policy.param_count());
  CHECK(fisher_vector_product(policy, b.obs, zero, 0.1).norm() == 0.0);

  Rng rng(20);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd u(policy.param_count()), v(policy.param_count());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] = rng.uniform(-1.0, 1.0);
      v[i] = rng.uniform(-1.0, 1.0);
    }
    const double uhv = u.dot(fisher_vector_product(policy, b.obs, v, 0.0));
    const double vhu = v.dot(fisher_vector_product(policy, b.obs, u, 0.0));
    CHECK(uhv == doctest::Approx(vhu).epsilon(1e-8));
  }
}

TEST_CASE("fisher-vector product matches the finite-difference KL Hessian") {
  // two-parameter mean (weight, bias) plus one log-std
  MlpNet net({1, 1});
  Eigen::VectorXd theta(2);
  theta << 0.8, -0.3;
  net.set_params(theta);
  const GaussianPolicy policy(net, Eigen::VectorXd::Constant(1, -0.2),
                              Eigen::VectorXd::Ones(1));
  Eigen::MatrixXd X(1, 7);
  X << -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5;

  const int n = policy.param_count();
  auto kl_at = [&](const Eigen::VectorXd& p) {
    GaussianPolicy q = policy;
    q.set_params(p);
    return kl_divergence(policy, q, X);
  };
  const Eigen::VectorXd base = policy.params();
  const double h = 1e-3;
  Eigen::MatrixXd fd_hessian(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd pp = base, pm = base, mp = base, mm = base;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      fd_hessian(i, j) =
          (kl_at(pp) - kl_at(pm) - kl_at(mp) + kl_at(mm)) / (4.0 * h * h);
    }

  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd analytic =
        fisher_vector_product(policy, X, Eigen::VectorXd::Unit(n, j), 0.0);
    CHECK((analytic - fd_hessian.col(j)).norm() /
              std::max(1.0, fd_hessian.col(j).norm()) <
          1e-3);
  }
}

TEST_CASE("line search: a zero step is rejected and parameters restored") {
  PivotEnv env = smoke_env();
  GaussianPolicy policy = smoke_policy(21);
  RolloutBatch b = collect_rollouts(env, policy, 2, 23);
  compute_advantages(b, smoke_value(22), 0.99, 0.97);

  const Eigen::VectorXd before = policy.params();
  const GaussianPolicy old_policy = policy;
  const LineSearchResult res =
      line_search(policy, old_policy, b, Eigen::VectorXd::Zero(policy.param_count()),
                  0.01, 0.8, 15);
  CHECK_FALSE(res.accepted);
  CHECK(policy.params() == before);
}

TEST_CASE("line search accepts an ascent step and respects the KL cap") {
  PivotEnv env = smoke_env();
  GaussianPolicy policy = smoke_policy(25);
  RolloutBatch b = collect_rollouts(env, policy, 2, 27);
  compute_advantages(b, smoke_value(26), 0.99, 0.97);

  const GaussianPolicy old_policy = policy;
  const Eigen::VectorXd g = surrogate_gradient(policy, b);
  const LineSearchResult res =
      line_search(policy, old_policy, b, 0.05 * g / g.norm(), 0.01, 0.8, 15);
  REQUIRE(res.accepted);
  CHECK(res.improvement > 0.0);
  CHECK(res.kl <= 0.01);
  CHECK(surrogate_loss(policy, old_policy, b) == doctest::Approx(res.improvement));
}

TEST_CASE("value fitting: constant targets are learned to numerical noise") {
  Eigen::VectorXd rewards = Eigen::VectorXd::Zero(32);
  RolloutBatch b = tiny_batch(rewards, std::vector<uint8_t>(32, 0), 5, 31);
  b.dones.back() = 1;
  b.returns = Eigen::VectorXd::Constant(32, 3.7);
  b.values = Eigen::VectorXd::Zero(32);
  b.advantages = Eigen::VectorXd::Zero(32);

  ValueNet v = smoke_value(33);
  const double mse = fit_value_function(v, b, 800, 0.05);
  CHECK(mse < 1e-3);
  CHECK(v.value(b.obs.col(0)) == doctest::Approx(3.7).epsilon(0.05));
}

TEST_CASE("value fitting: zero epochs leave the net untouched") {
  Eigen::VectorXd rewards = Eigen::VectorXd::Zero(8);
  RolloutBatch b = tiny_batch(rewards, std::vector<uint8_t>(8, 0), 5, 35);
  b.returns = Eigen::VectorXd::Constant(8, 1.0);
  ValueNet v = smoke_value(36);
  const Eigen::VectorXd before = v.params();
  fit_value_function(v, b, 0, 0.05);
  CHECK(v.params() == before);
}

TEST_CASE("value fitting never increases the training MSE") {
  PivotEnv env = smoke_env();
  const GaussianPolicy policy = smoke_policy(37);
  RolloutBatch b = collect_rollouts(env, policy, 3, 39);
  ValueNet v = smoke_value(38);
  compute_advantages(b, v, 0.99, 0.97);

  auto mse_of = [&](const ValueNet& net) {
    return (net.values(b.obs) - b.returns).squaredNorm() /
           static_cast<double>(b.size());
  };
  double prev = mse_of(v);
  for (int round = 0; round < 5; ++round) {
    fit_value_function(v, b, 10, 0.01);
    const double cur = mse_of(v);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("zeroed advantages make the update a no-op") {
  PivotEnv env = smoke_env();
  GaussianPolicy policy = smoke_policy(41);
  RolloutBatch b = collect_rollouts(env, policy, 2, 43);
  compute_advantages(b, smoke_value(42), 0.99, 0.97);
  b.advantages.setZero();

  const Eigen::VectorXd before = policy.params();
  const UpdateStats stats = trpo_update(policy, b, TrpoConfig{});
  CHECK_FALSE(stats.accepted);
  CHECK(policy.params() == before);
}

TEST_CASE("natural gradient direction has positive overlap with the gradient") {
  PivotEnv env = smoke_env();
  GaussianPolicy policy = smoke_policy(45);
  RolloutBatch b = collect_rollouts(env, policy, 3, 47);
  compute_advantages(b, smoke_value(46), 0.99, 0.97);

  const Eigen::VectorXd g = surrogate_gradient(policy, b);
  const Eigen::VectorXd x = conjugate_gradient(
      [&](const Eigen::VectorXd& v) {
        return fisher_vector_product(policy, b.obs, v, 0.1);
      },
      g, 10);
  CHECK(x.dot(g) > 0.0);
}

TEST_CASE("smoke training run: KL cap, non-negative improvement, determinism") {
  TrpoConfig cfg;
  cfg.episodes_per_iter = 5;
  cfg.value_epochs = 10;

  auto run = [&](std::vector<IterationStats>& out) {
    PivotEnv env = smoke_env(false, 50);
    GaussianPolicy policy = smoke_policy(49);
    ValueNet value = smoke_value(50);
    for (int iter = 0; iter < 10; ++iter)
      out.push_back(trpo_iteration(env, policy, value, cfg, 2025, iter));
  };

  std::vector<IterationStats> a, b;
  run(a);
  run(b);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].accepted) {
      CHECK(a[i].kl <= cfg.max_kl * (1.0 + 1e-6));
      CHECK(a[i].surrogate_improvement >= 0.0);
    }
    CHECK(a[i].mean_return == b[i].mean_return);
    CHECK(a[i].kl == b[i].kl);
    CHECK(a[i].surrogate_improvement == b[i].surrogate_improvement);
    CHECK(a[i].success_rate == b[i].success_rate);
  }
}
