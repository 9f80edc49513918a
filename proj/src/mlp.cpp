#include "pivoting/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace pivoting {

MlpNet::MlpNet(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2)
    throw std::invalid_argument("net needs at least an input and output size");
  for (int d : dims_)
    if (d <= 0) throw std::invalid_argument("layer sizes must be positive");
  for (size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l]));
    biases_.emplace_back(Eigen::VectorXd::Zero(dims_[l + 1]));
  }
}

MlpNet MlpNet::randomized(std::vector<int> dims, Rng& rng, double out_scale) {
  MlpNet net(std::move(dims));
  for (size_t l = 0; l < net.weights_.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(net.dims_[l]));
    const double extra = (l + 1 == net.weights_.size()) ? out_scale : 1.0;
    for (Eigen::Index r = 0; r < net.weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < net.weights_[l].cols(); ++c)
        net.weights_[l](r, c) = rng.uniform(-scale, scale) * extra;
    // biases start at zero
  }
  return net;
}

int MlpNet::param_count() const {
  int n = 0;
  for (size_t l = 0; l < weights_.size(); ++l)
    n += static_cast<int>(weights_[l].size() + biases_[l].size());
  return n;
}

Eigen::VectorXd MlpNet::params() const {
  Eigen::VectorXd flat(param_count());
  Eigen::Index k = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    const auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat[k++] = w(r, c);
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r)
      flat[k++] = biases_[l][r];
  }
  return flat;
}

void MlpNet::set_params(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("parameter vector has the wrong length");
  Eigen::Index k = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    auto& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r)
      biases_[l][r] = flat[k++];
  }
}

Eigen::VectorXd MlpNet::forward(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd MlpNet::forward(const Eigen::MatrixXd& batch) const {
  Trace trace;
  return forward(batch, trace);
}

Eigen::MatrixXd MlpNet::forward(const Eigen::MatrixXd& batch,
                                Trace& trace) const {
  if (batch.rows() != input_dim())
    throw std::invalid_argument("input dimension mismatch");
  trace.activations.clear();
  trace.activations.reserve(weights_.size() + 1);
  trace.activations.push_back(batch);
  Eigen::MatrixXd a = batch;
  for (size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
    a = (l + 1 < weights_.size()) ? z.array().tanh().matrix() : z;
    trace.activations.push_back(a);
  }
  return a;
}

Eigen::VectorXd MlpNet::backward(const Trace& trace,
                                 const Eigen::MatrixXd& upstream) const {
  if (trace.activations.size() != weights_.size() + 1)
    throw std::invalid_argument("trace does not match this net");
  if (upstream.rows() != output_dim() ||
      upstream.cols() != trace.activations.front().cols())
    throw std::invalid_argument("upstream gradient shape mismatch");

  Eigen::VectorXd flat = Eigen::VectorXd::Zero(param_count());
  // flat offsets per layer
  std::vector<Eigen::Index> offsets(weights_.size());
  Eigen::Index off = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    offsets[l] = off;
    off += weights_[l].size() + biases_[l].size();
  }

  Eigen::MatrixXd delta = upstream;
  for (size_t li = weights_.size(); li-- > 0;) {
    const Eigen::MatrixXd& a_in = trace.activations[li];
    const Eigen::MatrixXd grad_w = delta * a_in.transpose();
    const Eigen::VectorXd grad_b = delta.rowwise().sum();
    Eigen::Index k = offsets[li];
    for (Eigen::Index r = 0; r < grad_w.rows(); ++r)
      for (Eigen::Index c = 0; c < grad_w.cols(); ++c) flat[k++] = grad_w(r, c);
    for (Eigen::Index r = 0; r < grad_b.size(); ++r) flat[k++] = grad_b[r];
    if (li > 0) {
      const Eigen::MatrixXd& a = trace.activations[li];  // tanh output
      delta = (weights_[li].transpose() * delta).array() *
              (1.0 - a.array().square());
    }
  }
  return flat;
}

Eigen::MatrixXd MlpNet::param_jvp(const Trace& trace,
                                  const Eigen::VectorXd& tangent) const {
  if (tangent.size() != param_count())
    throw std::invalid_argument("tangent vector has the wrong length");
  const Eigen::Index n = trace.activations.front().cols();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dims_[0], n);

  Eigen::Index k = 0;
  for (size_t l = 0; l < weights_.size(); ++l) {
    const auto& w = weights_[l];
    Eigen::MatrixXd dw(w.rows(), w.cols());
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) dw(r, c) = tangent[k++];
    Eigen::VectorXd db(w.rows());
    for (Eigen::Index r = 0; r < w.rows(); ++r) db[r] = tangent[k++];

    const Eigen::MatrixXd& a_in = trace.activations[l];
    Eigen::MatrixXd dz = ((dw * a_in) + (w * t)).colwise() + db;
    if (l + 1 < weights_.size()) {
      const Eigen::MatrixXd& a_out = trace.activations[l + 1];
      t = dz.array() * (1.0 - a_out.array().square());
    } else {
      t = dz;
    }
  }
  return t;
}

Eigen::VectorXd param_gradient(const MlpNet& net, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& upstream) {
  MlpNet::Trace trace;
  net.forward(Eigen::MatrixXd(x), trace);
  return net.backward(trace, Eigen::MatrixXd(upstream));
}

}  // namespace pivoting
