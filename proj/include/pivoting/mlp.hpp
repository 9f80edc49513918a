#pragma once

#include <Eigen/Core>
#include <vector>

#include "pivoting/rng.hpp"

namespace pivoting {

// Small dense feed-forward net: tanh hidden layers, linear output.
// Parameters flatten to a single vector (per layer: weights row-major,
// then biases) so optimizers and serializers can treat the net as a
// point in R^n. Batches are column-wise.
class MlpNet {
 public:
  MlpNet() = default;
  explicit MlpNet(std::vector<int> dims);

  // uniform init scaled by 1/sqrt(fan-in); the output layer is further
  // scaled by out_scale
  static MlpNet randomized(std::vector<int> dims, Rng& rng,
                           double out_scale = 1.0);

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  const std::vector<int>& dims() const { return dims_; }

  int param_count() const;
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& flat);

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch) const;

  // Activations kept for the backward/tangent passes. activations[0] is
  // the input batch; the last entry is the (linear) output.
  struct Trace {
    std::vector<Eigen::MatrixXd> activations;
  };
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, Trace& trace) const;

  // Gradient wrt parameters of sum over the batch of upstream . output.
  Eigen::VectorXd backward(const Trace& trace,
                           const Eigen::MatrixXd& upstream) const;

  // Directional derivative of the output wrt parameters along tangent
  // (forward-mode pass reusing the trace of a prior forward()).
  Eigen::MatrixXd param_jvp(const Trace& trace,
                            const Eigen::VectorXd& tangent) const;

  const Eigen::MatrixXd& weight(int layer) const { return weights_[static_cast<size_t>(layer)]; }
  const Eigen::VectorXd& bias(int layer) const { return biases_[static_cast<size_t>(layer)]; }

 private:
  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;  // out x in
  std::vector<Eigen::VectorXd> biases_;
};

// Gradient wrt parameters of upstream . net(x) for a single input.
Eigen::VectorXd param_gradient(const MlpNet& net, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& upstream);

}  // namespace pivoting
