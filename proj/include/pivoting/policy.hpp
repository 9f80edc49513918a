#pragma once

#include <Eigen/Core>
#include <string>

#include "pivoting/mlp.hpp"
#include "pivoting/rng.hpp"

namespace pivoting {

// Diagonal-Gaussian policy: an MLP produces the action mean, the action
// log standard deviations are free state-independent parameters. A fixed
// (non-learned) per-feature input scale keeps observation magnitudes
// comparable; it is stored with checkpoints.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(MlpNet mean_net, Eigen::VectorXd log_std,
                 Eigen::VectorXd obs_scale);

  static GaussianPolicy randomized(const std::vector<int>& dims,
                                   const Eigen::VectorXd& obs_scale,
                                   double initial_log_std, Rng& rng);

  int obs_dim() const { return mean_net_.input_dim(); }
  int act_dim() const { return mean_net_.output_dim(); }

  Eigen::VectorXd mean(const Eigen::VectorXd& obs) const;
  Eigen::MatrixXd mean(const Eigen::MatrixXd& obs_batch) const;

  Eigen::VectorXd sample_action(const Eigen::VectorXd& obs, Rng& rng) const;

  double log_prob(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const;
  Eigen::VectorXd log_prob(const Eigen::MatrixXd& obs_batch,
                           const Eigen::MatrixXd& action_batch) const;

  // mean net parameters followed by log_std
  int param_count() const { return mean_net_.param_count() + static_cast<int>(log_std_.size()); }
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& flat);

  const MlpNet& mean_net() const { return mean_net_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }
  Eigen::VectorXd std_dev() const { return log_std_.array().exp(); }
  const Eigen::VectorXd& obs_scale() const { return obs_scale_; }
  Eigen::MatrixXd scale_obs(const Eigen::MatrixXd& obs_batch) const;

 private:
  MlpNet mean_net_;
  Eigen::VectorXd log_std_;
  Eigen::VectorXd obs_scale_;
};

// Mean over the batch of KL(old || new) between the two action
// distributions, in closed form.
double kl_divergence(const GaussianPolicy& policy_old,
                     const GaussianPolicy& policy_new,
                     const Eigen::MatrixXd& obs_batch);

// Gradient of kl_divergence wrt the new policy's parameters.
Eigen::VectorXd kl_gradient(const GaussianPolicy& policy_old,
                            const GaussianPolicy& policy_new,
                            const Eigen::MatrixXd& obs_batch);

// State-value MLP sharing the policy's input scaling.
class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(MlpNet net, Eigen::VectorXd obs_scale);

  static ValueNet randomized(const std::vector<int>& dims,
                             const Eigen::VectorXd& obs_scale, Rng& rng);

  double value(const Eigen::VectorXd& obs) const;
  Eigen::VectorXd values(const Eigen::MatrixXd& obs_batch) const;

  int param_count() const { return net_.param_count(); }
  Eigen::VectorXd params() const { return net_.params(); }
  void set_params(const Eigen::VectorXd& flat) { net_.set_params(flat); }

  const MlpNet& net() const { return net_; }
  const Eigen::VectorXd& obs_scale() const { return obs_scale_; }
  Eigen::MatrixXd scale_obs(const Eigen::MatrixXd& obs_batch) const;

 private:
  MlpNet net_;
  Eigen::VectorXd obs_scale_;
};

// Trained artifact: policy plus its value baseline. Serialized in a
// versioned little-endian binary layout (see docs/checkpoint_format.md).
struct Checkpoint {
  GaussianPolicy policy;
  ValueNet value;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pivoting
