#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pivoting/mlp.hpp"

using namespace pivoting;

namespace {

// plain-loop reference forward pass, independent of the Eigen path
std::vector<double> reference_forward(const MlpNet& net,
                                      const std::vector<double>& x) {
  std::vector<double> a = x;
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto& w = net.weight(l);
    const auto& b = net.bias(l);
    std::vector<double> z(static_cast<size_t>(w.rows()), 0.0);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      double acc = b[r];
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        acc += w(r, c) * a[static_cast<size_t>(c)];
      z[static_cast<size_t>(r)] = acc;
    }
    if (l + 1 < net.layer_count())
      for (double& v : z) v = std::tanh(v);
    a = z;
  }
  return a;
}

// central finite differences of upstream . net(x) wrt parameters
Eigen::VectorXd fd_param_gradient(MlpNet net, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& upstream,
                                  double h = 1e-5) {
  Eigen::VectorXd theta = net.params();
  Eigen::VectorXd grad(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    net.set_params(tp);
    const double up = upstream.dot(net.forward(x));
    net.set_params(tm);
    const double dn = upstream.dot(net.forward(x));
    grad[i] = (up - dn) / (2.0 * h);
  }
  return grad;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

}  // namespace

TEST_CASE("all-zero parameters map everything to zero") {
  MlpNet net({4, 8, 3});
  Eigen::VectorXd x(4);
  x << 1.0, -2.0, 0.5, 3.0;
  CHECK(net.forward(x).norm() == 0.0);
}

TEST_CASE("single linear layer with unit weight is the identity") {
  MlpNet net({1, 1});
  Eigen::VectorXd theta(2);
  theta << 1.0, 0.0;  // weight 1, bias 0
  net.set_params(theta);
  Eigen::VectorXd x(1);
  x << -0.37;
  CHECK(net.forward(x)[0] == doctest::Approx(-0.37));
}

TEST_CASE("parameter count matches the layer arithmetic") {
  MlpNet net({5, 32, 16, 2});
  CHECK(net.param_count() == 5 * 32 + 32 + 32 * 16 + 16 + 16 * 2 + 2);
  const Eigen::VectorXd theta = net.params();
  CHECK(theta.size() == net.param_count());
}

TEST_CASE("params round-trip through the flat vector") {
  Rng rng(3);
  MlpNet net = MlpNet::randomized({5, 32, 16, 2}, rng);
  const Eigen::VectorXd theta = net.params();
  MlpNet copy({5, 32, 16, 2});
  copy.set_params(theta);
  CHECK(copy.params() == theta);
  Eigen::VectorXd x(5);
  x << 0.1, -0.2, 0.3, -0.4, 0.5;
  CHECK(copy.forward(x) == net.forward(x));
}

TEST_CASE("forward agrees with a loop-based reference implementation") {
  Rng rng(17);
  MlpNet net = MlpNet::randomized({5, 32, 16, 2}, rng);
  Rng xr(18);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(5);
    std::vector<double> xv(5);
    for (int i = 0; i < 5; ++i) {
      x[i] = xr.uniform(-2.0, 2.0);
      xv[static_cast<size_t>(i)] = x[i];
    }
    const Eigen::VectorXd out = net.forward(x);
    const std::vector<double> ref = reference_forward(net, xv);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == doctest::Approx(ref[0]).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(ref[1]).epsilon(1e-12));
  }
}

TEST_CASE("forward is pure") {
  Rng rng(23);
  MlpNet net = MlpNet::randomized({5, 32, 16, 2}, rng);
  Eigen::VectorXd x(5);
  x << 0.3, 1.0, -1.0, 0.0, 2.0;
  const Eigen::VectorXd a = net.forward(x);
  const Eigen::VectorXd b = net.forward(x);
  CHECK(a == b);
}

TEST_CASE("forward rejects mismatched input sizes") {
  MlpNet net({5, 8, 2});
  Eigen::VectorXd x(4);
  x.setZero();
  CHECK_THROWS_AS(net.forward(x), std::invalid_argument);
}

TEST_CASE("zero upstream gives a zero gradient") {
  Rng rng(29);
  MlpNet net = MlpNet::randomized({3, 8, 2}, rng);
  Eigen::VectorXd x(3);
  x << 0.5, -0.5, 1.0;
  CHECK(param_gradient(net, x, Eigen::VectorXd::Zero(2)).norm() == 0.0);
}

TEST_CASE("linear layer gradients are the textbook ones") {
  MlpNet net({3, 1});
  Eigen::VectorXd theta(4);
  theta << 0.2, -0.4, 0.6, 0.1;
  net.set_params(theta);
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  Eigen::VectorXd upstream(1);
  upstream << 1.0;
  const Eigen::VectorXd grad = param_gradient(net, x, upstream);
  // d out / d W = x, d out / d b = 1
  CHECK(grad[0] == doctest::Approx(1.0));
  CHECK(grad[1] == doctest::Approx(2.0));
  CHECK(grad[2] == doctest::Approx(3.0));
  CHECK(grad[3] == doctest::Approx(1.0));
}

TEST_CASE("backprop matches central finite differences on random nets") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    MlpNet net = MlpNet::randomized({4, 6, 5, 2}, rng);
    Eigen::VectorXd x(4), upstream(2);
    for (int i = 0; i < 4; ++i) x[i] = rng.uniform(-1.5, 1.5);
    for (int i = 0; i < 2; ++i) upstream[i] = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd analytic = param_gradient(net, x, upstream);
    const Eigen::VectorXd fd = fd_param_gradient(net, x, upstream);
    CHECK(rel_err(analytic, fd) < 1e-4);
  }
}

TEST_CASE("batched backward equals the sum of per-sample gradients") {
  Rng rng(37);
  MlpNet net = MlpNet::randomized({3, 7, 2}, rng);
  const int n = 9;
  Eigen::MatrixXd X(3, n), U(2, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < 3; ++r) X(r, c) = rng.uniform(-1.0, 1.0);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < 2; ++r) U(r, c) = rng.uniform(-1.0, 1.0);

  MlpNet::Trace trace;
  net.forward(X, trace);
  const Eigen::VectorXd batched = net.backward(trace, U);

  Eigen::VectorXd summed = Eigen::VectorXd::Zero(net.param_count());
  for (int c = 0; c < n; ++c)
    summed += param_gradient(net, X.col(c), U.col(c));
  CHECK(rel_err(batched, summed) < 1e-12);
}

TEST_CASE("tangent propagation matches finite-difference directional derivatives") {
  Rng rng(41);
  MlpNet net = MlpNet::randomized({4, 6, 3}, rng);
  Eigen::MatrixXd X(4, 5);
  for (int c = 0; c < 5; ++c)
    for (int r = 0; r < 4; ++r) X(r, c) = rng.uniform(-1.0, 1.0);

  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd v(net.param_count());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);

    MlpNet::Trace trace;
    net.forward(X, trace);
    const Eigen::MatrixXd jvp = net.param_jvp(trace, v);

    const double h = 1e-6;
    MlpNet shifted = net;
    shifted.set_params(net.params() + h * v);
    MlpNet shifted_m = net;
    shifted_m.set_params(net.params() - h * v);
    const Eigen::MatrixXd fd =
        (shifted.forward(X) - shifted_m.forward(X)) / (2.0 * h);
    CHECK((jvp - fd).norm() / std::max(1.0, fd.norm()) < 1e-6);
  }
}
