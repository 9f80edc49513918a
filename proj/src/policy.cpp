#include "pivoting/policy.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pivoting {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
}

GaussianPolicy::GaussianPolicy(MlpNet mean_net, Eigen::VectorXd log_std,
                               Eigen::VectorXd obs_scale)
    : mean_net_(std::move(mean_net)),
      log_std_(std::move(log_std)),
      obs_scale_(std::move(obs_scale)) {
  if (log_std_.size() != mean_net_.output_dim())
    throw std::invalid_argument("log_std size must match the action dimension");
  if (obs_scale_.size() != mean_net_.input_dim())
    throw std::invalid_argument("obs_scale size must match the input dimension");
  if (!log_std_.allFinite() || !obs_scale_.allFinite())
    throw std::invalid_argument("non-finite policy parameters");
}

GaussianPolicy GaussianPolicy::randomized(const std::vector<int>& dims,
                                          const Eigen::VectorXd& obs_scale,
                                          double initial_log_std, Rng& rng) {
  // small output weights keep the initial mean near zero
  MlpNet net = MlpNet::randomized(dims, rng, 0.01);
  Eigen::VectorXd log_std =
      Eigen::VectorXd::Constant(net.output_dim(), initial_log_std);
  return GaussianPolicy(std::move(net), std::move(log_std), obs_scale);
}

Eigen::MatrixXd GaussianPolicy::scale_obs(const Eigen::MatrixXd& obs_batch) const {
  return obs_scale_.asDiagonal() * obs_batch;
}

Eigen::VectorXd GaussianPolicy::mean(const Eigen::VectorXd& obs) const {
  return mean_net_.forward(Eigen::VectorXd(obs.cwiseProduct(obs_scale_)));
}

Eigen::MatrixXd GaussianPolicy::mean(const Eigen::MatrixXd& obs_batch) const {
  return mean_net_.forward(scale_obs(obs_batch));
}

Eigen::VectorXd GaussianPolicy::sample_action(const Eigen::VectorXd& obs,
                                              Rng& rng) const {
  Eigen::VectorXd a = mean(obs);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    a[i] += std::exp(log_std_[i]) * rng.normal();
  return a;
}

double GaussianPolicy::log_prob(const Eigen::VectorXd& obs,
                                const Eigen::VectorXd& action) const {
  return log_prob(Eigen::MatrixXd(obs), Eigen::MatrixXd(action))[0];
}

Eigen::VectorXd GaussianPolicy::log_prob(const Eigen::MatrixXd& obs_batch,
                                         const Eigen::MatrixXd& action_batch) const {
  if (action_batch.rows() != act_dim() ||
      action_batch.cols() != obs_batch.cols())
    throw std::invalid_argument("action batch shape mismatch");
  const Eigen::MatrixXd mu = mean(obs_batch);
  const Eigen::VectorXd inv_var = (-2.0 * log_std_).array().exp();
  const double log_norm = log_std_.sum() +
                          0.5 * kLogTwoPi * static_cast<double>(act_dim());
  Eigen::VectorXd out(obs_batch.cols());
  for (Eigen::Index c = 0; c < obs_batch.cols(); ++c) {
    const Eigen::VectorXd d = action_batch.col(c) - mu.col(c);
    out[c] = -0.5 * d.cwiseProduct(d).dot(inv_var) - log_norm;
  }
  return out;
}

Eigen::VectorXd GaussianPolicy::params() const {
  Eigen::VectorXd flat(param_count());
  flat.head(mean_net_.param_count()) = mean_net_.params();
  flat.tail(log_std_.size()) = log_std_;
  return flat;
}

void GaussianPolicy::set_params(const Eigen::VectorXd& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("parameter vector has the wrong length");
  mean_net_.set_params(flat.head(mean_net_.param_count()));
  log_std_ = flat.tail(log_std_.size());
}

double kl_divergence(const GaussianPolicy& policy_old,
                     const GaussianPolicy& policy_new,
                     const Eigen::MatrixXd& obs_batch) {
  if (obs_batch.cols() == 0)
    throw std::invalid_argument("kl_divergence needs a non-empty batch");
  const Eigen::MatrixXd mu_old = policy_old.mean(obs_batch);
  const Eigen::MatrixXd mu_new = policy_new.mean(obs_batch);
  const Eigen::VectorXd var_old = (2.0 * policy_old.log_std()).array().exp();
  const Eigen::VectorXd inv_var_new = (-2.0 * policy_new.log_std()).array().exp();
  const double log_std_term =
      (policy_new.log_std() - policy_old.log_std()).sum();

  double acc = 0.0;
  for (Eigen::Index c = 0; c < obs_batch.cols(); ++c) {
    const Eigen::VectorXd d = mu_old.col(c) - mu_new.col(c);
    acc += log_std_term +
           0.5 * (var_old + d.cwiseProduct(d)).dot(inv_var_new) -
           0.5 * static_cast<double>(policy_new.act_dim());
  }
  return acc / static_cast<double>(obs_batch.cols());
}

Eigen::VectorXd kl_gradient(const GaussianPolicy& policy_old,
                            const GaussianPolicy& policy_new,
                            const Eigen::MatrixXd& obs_batch) {
  const Eigen::Index n = obs_batch.cols();
  if (n == 0) throw std::invalid_argument("kl_gradient needs a non-empty batch");
  const Eigen::MatrixXd scaled = policy_new.scale_obs(obs_batch);
  MlpNet::Trace trace;
  const Eigen::MatrixXd mu_new = policy_new.mean_net().forward(scaled, trace);
  const Eigen::MatrixXd mu_old = policy_old.mean(obs_batch);
  const Eigen::VectorXd var_old = (2.0 * policy_old.log_std()).array().exp();
  const Eigen::VectorXd inv_var_new = (-2.0 * policy_new.log_std()).array().exp();

  // d KL / d mu_new = (mu_new - mu_old) / var_new, averaged over the batch
  Eigen::MatrixXd upstream = (mu_new - mu_old) / static_cast<double>(n);
  upstream = inv_var_new.asDiagonal() * upstream;

  Eigen::VectorXd grad(policy_new.param_count());
  grad.head(policy_new.mean_net().param_count()) =
      policy_new.mean_net().backward(trace, upstream);

  // d KL / d log_std_new_i = 1 - (var_old_i + mean((mu_old-mu_new)_i^2)) / var_new_i
  Eigen::VectorXd sq_diff = Eigen::VectorXd::Zero(policy_new.act_dim());
  for (Eigen::Index c = 0; c < n; ++c)
    sq_diff += (mu_old.col(c) - mu_new.col(c)).cwiseAbs2();
  sq_diff /= static_cast<double>(n);
  grad.tail(policy_new.act_dim()) =
      Eigen::VectorXd::Ones(policy_new.act_dim()) -
      (var_old + sq_diff).cwiseProduct(inv_var_new);
  return grad;
}

ValueNet::ValueNet(MlpNet net, Eigen::VectorXd obs_scale)
    : net_(std::move(net)), obs_scale_(std::move(obs_scale)) {
  if (net_.output_dim() != 1)
    throw std::invalid_argument("value net must have a scalar output");
  if (obs_scale_.size() != net_.input_dim())
    throw std::invalid_argument("obs_scale size must match the input dimension");
}

ValueNet ValueNet::randomized(const std::vector<int>& dims,
                              const Eigen::VectorXd& obs_scale, Rng& rng) {
  return ValueNet(MlpNet::randomized(dims, rng), obs_scale);
}

Eigen::MatrixXd ValueNet::scale_obs(const Eigen::MatrixXd& obs_batch) const {
  return obs_scale_.asDiagonal() * obs_batch;
}

double ValueNet::value(const Eigen::VectorXd& obs) const {
  return net_.forward(Eigen::VectorXd(obs.cwiseProduct(obs_scale_)))[0];
}

Eigen::VectorXd ValueNet::values(const Eigen::MatrixXd& obs_batch) const {
  return net_.forward(scale_obs(obs_batch)).row(0).transpose();
}

// ---------------------------------------------------------------------------
// checkpoint serialization (little-endian, see docs/checkpoint_format.md)

namespace {

constexpr char kMagic[8] = {'P', 'I', 'V', 'O', 'T', 'C', 'K', 'P'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void put_f64(std::ostream& os, double v) {
  const uint64_t u = std::bit_cast<uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  os.write(b, 8);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("truncated checkpoint file");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("truncated checkpoint file");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

void put_vec(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(os, v[i]);
}

void put_net(std::ostream& os, const MlpNet& net) {
  put_u32(os, static_cast<uint32_t>(net.dims().size()));
  for (int d : net.dims()) put_u32(os, static_cast<uint32_t>(d));
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(os, w(r, c));
    put_vec(os, net.bias(l));
  }
}

MlpNet get_net(std::istream& is) {
  const uint32_t ndims = get_u32(is);
  if (ndims < 2 || ndims > 64)
    throw std::runtime_error("checkpoint: implausible layer count");
  std::vector<int> dims(ndims);
  for (auto& d : dims) d = static_cast<int>(get_u32(is));
  MlpNet net(dims);
  Eigen::VectorXd flat(net.param_count());
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = get_f64(is);
  net.set_params(flat);
  return net;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, kVersion);

  const auto& policy = checkpoint.policy;
  put_u32(os, static_cast<uint32_t>(policy.obs_dim()));
  put_vec(os, policy.obs_scale());
  put_net(os, policy.mean_net());
  put_u32(os, static_cast<uint32_t>(policy.act_dim()));
  put_vec(os, policy.log_std());
  put_net(os, checkpoint.value.net());
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a pivoting checkpoint: " + path);
  const uint32_t version = get_u32(is);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));

  const uint32_t obs_dim = get_u32(is);
  Eigen::VectorXd obs_scale(obs_dim);
  for (auto i = 0u; i < obs_dim; ++i) obs_scale[i] = get_f64(is);
  MlpNet mean_net = get_net(is);
  if (mean_net.input_dim() != static_cast<int>(obs_dim))
    throw std::runtime_error("checkpoint: policy input dimension mismatch");
  const uint32_t act_dim = get_u32(is);
  if (static_cast<int>(act_dim) != mean_net.output_dim())
    throw std::runtime_error("checkpoint: action dimension mismatch");
  Eigen::VectorXd log_std(act_dim);
  for (auto i = 0u; i < act_dim; ++i) log_std[i] = get_f64(is);
  MlpNet value_net = get_net(is);
  if (value_net.input_dim() != static_cast<int>(obs_dim))
    throw std::runtime_error("checkpoint: value input dimension mismatch");

  Checkpoint ck;
  ck.policy = GaussianPolicy(std::move(mean_net), std::move(log_std), obs_scale);
  ck.value = ValueNet(std::move(value_net), obs_scale);
  return ck;
}

}  // namespace pivoting
