#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "pivoting/environment.hpp"
#include "pivoting/policy.hpp"

namespace pivoting {

struct TrpoConfig {
  double max_kl = 0.01;
  int cg_iters = 10;
  double cg_damping = 0.1;
  double backtrack_ratio = 0.8;
  int max_backtracks = 15;
  double discount = 0.99;
  double gae_lambda = 0.97;
  int episodes_per_iter = 50;
  int value_epochs = 30;
  double value_step = 0.01;

  void validate() const;
};

// On-policy trajectory batch, episodes stored contiguously. Observations
// and actions are column-wise; actions are the raw Gaussian samples
// (the environment clamps internally).
struct RolloutBatch {
  Eigen::MatrixXd obs;           // obs_dim x N
  Eigen::MatrixXd actions;       // act_dim x N
  Eigen::VectorXd rewards;       // N
  std::vector<uint8_t> dones;    // N
  std::vector<int> episode_ids;  // N
  std::vector<uint8_t> successes;  // N, per-step success flag

  // filled by compute_advantages
  Eigen::VectorXd values;
  Eigen::VectorXd returns;
  Eigen::VectorXd advantages;

  int n_episodes = 0;

  Eigen::Index size() const { return rewards.size(); }
  // undiscounted return per episode
  std::vector<double> episode_returns() const;
  // success flag at each episode's final step
  std::vector<bool> episode_successes() const;
};

// Roll the policy for n_episodes full-horizon episodes. Environment and
// action-noise seeds derive deterministically from master_seed and the
// episode index, so the batch does not depend on scheduling.
RolloutBatch collect_rollouts(PivotEnv& env, const GaussianPolicy& policy,
                              int n_episodes, uint64_t master_seed);

// Generalized advantage estimation followed by batch normalization of
// the advantages (returns keep the raw scale).
void compute_advantages(RolloutBatch& batch, const ValueNet& value_net,
                        double discount, double gae_lambda);

// Importance-weighted policy objective, zero at policy == old_policy
// once advantages are normalized.
double surrogate_loss(const GaussianPolicy& policy,
                      const GaussianPolicy& old_policy,
                      const RolloutBatch& batch);

// Gradient of the surrogate at the collection policy.
Eigen::VectorXd surrogate_gradient(const GaussianPolicy& policy,
                                   const RolloutBatch& batch);

// (H + damping*I) v, H the Hessian of the mean KL between the policy and
// a perturbed copy, evaluated at zero perturbation. For a diagonal
// Gaussian this is exactly J^T diag(1/sigma^2) J on the mean parameters
// (forward tangent then backward pass) and 2*I on the log-std block.
Eigen::VectorXd fisher_vector_product(const GaussianPolicy& policy,
                                      const Eigen::MatrixXd& obs_batch,
                                      const Eigen::VectorXd& v,
                                      double damping);

// Standard conjugate gradient on a symmetric positive definite matvec.
// Stops at ||Ax - b|| <= tol*||b|| or after iters rounds. Throws on
// non-finite iterates.
Eigen::VectorXd conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec,
    const Eigen::VectorXd& b, int iters, double tol = 1e-10);

struct LineSearchResult {
  bool accepted = false;
  int backtracks = 0;
  double kl = 0.0;
  double improvement = 0.0;
};

// Backtracking search along full_step: accept the first point whose
// measured KL stays within max_kl and whose surrogate improves; restore
// the old parameters when every candidate fails.
LineSearchResult line_search(GaussianPolicy& policy,
                             const GaussianPolicy& old_policy,
                             const RolloutBatch& batch,
                             const Eigen::VectorXd& full_step, double max_kl,
                             double backtrack_ratio, int max_backtracks);

// Monotone value regression: Adam steps with per-epoch backtracking so
// the training MSE never increases. Returns the final MSE.
double fit_value_function(ValueNet& value_net, const RolloutBatch& batch,
                          int epochs, double step);

struct UpdateStats {
  bool accepted = false;
  int backtracks = 0;
  double kl = 0.0;
  double surrogate_improvement = 0.0;
};

// Natural-gradient step with KL-constrained line search on a prepared
// batch (advantages already computed).
UpdateStats trpo_update(GaussianPolicy& policy, const RolloutBatch& batch,
                        const TrpoConfig& config);

struct IterationStats {
  double mean_return = 0.0;
  double success_rate = 0.0;
  double kl = 0.0;
  double surrogate_improvement = 0.0;
  bool accepted = false;
  double value_mse = 0.0;
  double wall_time_s = 0.0;
};

// One full optimization round: collect, estimate advantages, update the
// policy, refit the baseline.
IterationStats trpo_iteration(PivotEnv& env, GaussianPolicy& policy,
                              ValueNet& value_net, const TrpoConfig& config,
                              uint64_t master_seed, int iteration);

}  // namespace pivoting
