#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "core/rng.hpp"
#include "nn/adam.hpp"
#include "nn/gradcheck.hpp"
#include "nn/network.hpp"
#include "oracles.hpp"

using namespace deepsad;
using namespace deepsad::nn;

namespace {

Matrix random_matrix(size_t rows, size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

Network small_net(size_t input, const std::vector<size_t>& dims, uint64_t seed,
                  bool batchnorm = true) {
  Network net = Network::from_specs(mlp_specs(input, dims, batchnorm, 0.1));
  Rng rng(seed);
  net.init_glorot(rng);
  return net;
}

// quadratic loss 1/2 sum (o - t)^2: analytic gradient is exact
struct QuadraticLoss : OutputLoss {
  Matrix target;
  double eval(const Matrix& out, Matrix* grad) const override {
    double l = 0.0;
    if (grad) *grad = Matrix(out.rows(), out.cols());
    for (size_t i = 0; i < out.size(); ++i) {
      const double d = out.values()[i] - target.values()[i];
      l += 0.5 * d * d;
      if (grad) grad->values()[i] = d;
    }
    return l;
  }
};

struct SumLoss : OutputLoss {
  double eval(const Matrix& out, Matrix* grad) const override {
    double l = 0.0;
    for (double v : out.values()) l += v;
    if (grad) *grad = Matrix(out.rows(), out.cols(), 1.0);
    return l;
  }
};

}  // namespace

TEST_CASE("glorot bounds and determinism") {
  Rng rng(7);
  // fan 3x3: b = sqrt(6/6) = 1
  Matrix w = glorot_init(3, 3, rng);
  for (double v : w.values()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  Rng rng_a(42), rng_b(42);
  Matrix a = glorot_init(10, 4, rng_a);
  Matrix b = glorot_init(10, 4, rng_b);
  CHECK(a.values() == b.values());

  CHECK_THROWS_AS(glorot_init(0, 3, rng), Error);
}

TEST_CASE("glorot sample mean matches the uniform-moment bound") {
  Rng rng(123);
  Matrix w = glorot_init(600, 600, rng);
  const double b = std::sqrt(6.0 / 1200.0);
  const size_t n_draws = 100000;
  double mean = 0.0;
  for (size_t i = 0; i < n_draws; ++i) mean += w.values()[i];
  mean /= static_cast<double>(n_draws);
  // 3 sigma of the sample mean of U[-b,b]
  CHECK(std::abs(mean) < 3.0 * b / std::sqrt(3.0 * n_draws));
}

TEST_CASE("dense identity forward") {
  std::vector<LayerSpec> specs{{LayerKind::Dense, 2, 2, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  auto& d = std::get<DenseLayer>(net.layer(0));
  d.weights.at(0, 0) = 1.0;
  d.weights.at(1, 1) = 1.0;
  Matrix x(1, 2);
  x.at(0, 0) = 1.0;
  x.at(0, 1) = 2.0;
  Matrix y = net.infer(x);
  CHECK(y.at(0, 0) == doctest::Approx(1.0));
  CHECK(y.at(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("leaky relu uses the paper's leakiness") {
  std::vector<LayerSpec> specs{{LayerKind::Dense, 2, 2, false, 0.1, 0.1},
                               {LayerKind::LeakyRelu, 0, 0, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  auto& d = std::get<DenseLayer>(net.layer(0));
  d.weights.at(0, 0) = 1.0;
  d.weights.at(1, 1) = 1.0;
  Matrix x(1, 2);
  x.at(0, 0) = -2.0;
  x.at(0, 1) = 3.0;
  Matrix y = net.infer(x);
  CHECK(y.at(0, 0) == doctest::Approx(-0.2));
  CHECK(y.at(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("two-layer forward matches the naive matmul oracle") {
  Rng rng(5);
  std::vector<LayerSpec> specs{{LayerKind::Dense, 4, 3, false, 0.1, 0.1},
                               {LayerKind::Dense, 3, 2, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  net.init_glorot(rng);
  Matrix x = random_matrix(6, 4, rng);
  Matrix y = net.infer(x);

  // oracle: x * W1^T * W2^T with independent loops
  auto transpose = [](const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (size_t i = 0; i < m.rows(); ++i)
      for (size_t j = 0; j < m.cols(); ++j) t.at(j, i) = m.at(i, j);
    return t;
  };
  const auto& w1 = std::get<DenseLayer>(net.layer(0)).weights;
  const auto& w2 = std::get<DenseLayer>(net.layer(1)).weights;
  Matrix expected =
      oracles::naive_matmul(oracles::naive_matmul(x, transpose(w1)),
                            transpose(w2));
  for (size_t i = 0; i < y.size(); ++i)
    CHECK(y.values()[i] == doctest::Approx(expected.values()[i]).epsilon(1e-12));
}

TEST_CASE("forward rejects dimension mismatch and empty batches") {
  Network net = small_net(4, {3, 2}, 1);
  Matrix bad(2, 5, 0.5);
  CHECK_THROWS_AS(net.infer(bad), Error);
  Matrix empty;
  CHECK_THROWS_AS(net.infer(empty), Error);
}

TEST_CASE("backward: zero upstream gradient gives zero parameter gradients") {
  Network net = small_net(4, {3, 2}, 3);
  Rng rng(11);
  Matrix x = random_matrix(5, 4, rng);
  Tape tape;
  Matrix out = net.forward(x, Mode::Training, &tape);
  Matrix zero(out.rows(), out.cols());
  const auto grads = net.backward(tape, zero);
  for (const auto& g : grads)
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("backward: sum loss on a single dense layer") {
  // loss = sum of outputs => dW[j,k] = column-sum_k of inputs, db = batch size
  std::vector<LayerSpec> specs{{LayerKind::Dense, 3, 2, true, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  Rng rng(9);
  net.init_glorot(rng);
  Matrix x = random_matrix(4, 3, rng);
  Tape tape;
  Matrix out = net.forward(x, Mode::Training, &tape);
  Matrix ones(out.rows(), out.cols(), 1.0);
  const auto grads = net.backward(tape, ones);

  std::vector<double> colsum(3, 0.0);
  for (size_t i = 0; i < 4; ++i)
    for (size_t k = 0; k < 3; ++k) colsum[k] += x.at(i, k);
  // dW is fan_out x fan_in; every output row j sees the same column sums
  for (size_t j = 0; j < 2; ++j)
    for (size_t k = 0; k < 3; ++k)
      CHECK(grads[0][j * 3 + k] == doctest::Approx(colsum[k]).epsilon(1e-12));
  for (size_t j = 0; j < 2; ++j)
    CHECK(grads[1][j] == doctest::Approx(4.0));
}

TEST_CASE("backward rejects a stale tape") {
  Network net = small_net(4, {3, 2}, 3);
  Rng rng(13);
  Matrix x = random_matrix(5, 4, rng);
  Tape tape;
  Matrix out = net.forward(x, Mode::Training, &tape);
  net.bump_version();  // parameters "changed"
  Matrix g(out.rows(), out.cols(), 1.0);
  CHECK_THROWS_AS(net.backward(tape, g), Error);
}

TEST_CASE("gradient check: quadratic loss on a linear layer is near exact") {
  std::vector<LayerSpec> specs{{LayerKind::Dense, 4, 3, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  Rng rng(17);
  net.init_glorot(rng);
  Matrix x = random_matrix(6, 4, rng);
  QuadraticLoss loss;
  loss.target = random_matrix(6, 3, rng);
  const auto report = gradient_check(net, loss, x, 1e-5);
  CHECK(report.max_rel_err < 1e-9);
}

TEST_CASE("gradient check: full net with leaky relu and batch norm") {
  Network net = small_net(6, {8, 4}, 21);
  Rng rng(23);
  Matrix x = random_matrix(12, 6, rng);
  QuadraticLoss loss;
  loss.target = random_matrix(12, 4, rng);
  loss.lambda = 1e-4;  // exercise the weight-decay path too
  const auto report = gradient_check(net, loss, x, 1e-5);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("gradient check flags a corrupted gradient") {
  // doubling the analytic gradient must show up as relative error ~= 1
  struct DoubledSum : SumLoss {
    double eval(const Matrix& out, Matrix* grad) const override {
      const double l = SumLoss::eval(out, grad);
      if (grad)
        for (double& v : grad->values()) v *= 2.0;
      return l;
    }
  };
  std::vector<LayerSpec> specs{{LayerKind::Dense, 3, 2, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  Rng rng(29);
  net.init_glorot(rng);
  Matrix x = random_matrix(4, 3, rng, 0.5, 1.5);
  DoubledSum loss;
  const auto report = gradient_check(net, loss, x, 1e-5);
  CHECK(report.max_rel_err == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("adam: first step moves by ~lr in the gradient sign direction") {
  std::vector<double> theta{1.0, -2.0, 0.5};
  std::vector<double> theta_copy = theta;
  std::vector<ParamView> params{{"p", &theta, false}};
  Gradients grads{{0.3, -0.7, 0.01}};
  AdamState st;
  st.first_moment = {{0.0, 0.0, 0.0}};
  st.second_moment = {{0.0, 0.0, 0.0}};
  const double lr = 1e-3;
  adam_step(params, grads, st, lr, 0.0);
  CHECK(st.step_count == 1);
  // hand-evaluated recurrence at t=1: update = lr * g / (|g| + eps)
  for (size_t i = 0; i < theta.size(); ++i) {
    const double g = grads[0][i];
    const double expect = theta_copy[i] - lr * g / (std::abs(g) + 1e-8);
    CHECK(theta[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("adam: zero gradient with zero decay is the identity") {
  std::vector<double> theta{1.0, -2.0};
  std::vector<ParamView> params{{"p", &theta, true}};
  Gradients grads{{0.0, 0.0}};
  AdamState st;
  st.first_moment = {{0.0, 0.0}};
  st.second_moment = {{0.0, 0.0}};
  adam_step(params, grads, st, 0.1, 0.0);
  CHECK(theta[0] == 1.0);
  CHECK(theta[1] == -2.0);
  CHECK(st.step_count == 1);
}

TEST_CASE("adam: coupled L2 turns lambda*param into the effective gradient") {
  // lambda=1e-6, grad=0, param=1 -> effective gradient 1e-6 -> m = (1-b1)*1e-6
  std::vector<double> theta{1.0};
  std::vector<ParamView> params{{"p", &theta, true}};
  Gradients grads{{0.0}};
  AdamState st;
  st.first_moment = {{0.0}};
  st.second_moment = {{0.0}};
  adam_step(params, grads, st, 1e-3, 1e-6);
  CHECK(st.first_moment[0][0] == doctest::Approx(0.1 * 1e-6).epsilon(1e-12));
  CHECK(theta[0] < 1.0);  // decays toward zero
}

TEST_CASE("adam rejects non-finite gradients naming the parameter") {
  std::vector<double> theta{1.0};
  std::vector<ParamView> params{{"layer0.weights", &theta, true}};
  Gradients grads{{std::nan("")}};
  AdamState st;
  st.first_moment = {{0.0}};
  st.second_moment = {{0.0}};
  try {
    adam_step(params, grads, st, 1e-3, 0.0);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Numeric);
    CHECK(std::string(e.what()).find("layer0.weights") != std::string::npos);
  }
}

TEST_CASE("batch norm: training batch is normalized per feature") {
  std::vector<LayerSpec> specs{{LayerKind::Dense, 3, 3, false, 0.1, 0.1},
                               {LayerKind::BatchNorm, 0, 3, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  auto& d = std::get<DenseLayer>(net.layer(0));
  for (size_t j = 0; j < 3; ++j) d.weights.at(j, j) = 1.0;  // identity

  Rng rng(31);
  Matrix x = random_matrix(32, 3, rng, -2.0, 5.0);
  Tape tape;
  Matrix y = net.forward(x, Mode::Training, &tape);
  // scale is 1, so outputs are the normalized values: mean 0, variance ~1
  for (size_t j = 0; j < 3; ++j) {
    double mean = 0.0, var = 0.0;
    for (size_t i = 0; i < y.rows(); ++i) mean += y.at(i, j);
    mean /= static_cast<double>(y.rows());
    for (size_t i = 0; i < y.rows(); ++i) {
      const double c = y.at(i, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(y.rows());
    CHECK(std::abs(mean) < 1e-6);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // kEps shrinks it a bit
  }
}

TEST_CASE("batch norm: scale 1 maps variance 4 to variance ~1") {
  std::vector<LayerSpec> specs{{LayerKind::Dense, 1, 1, false, 0.1, 0.1},
                               {LayerKind::BatchNorm, 0, 1, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  std::get<DenseLayer>(net.layer(0)).weights.at(0, 0) = 1.0;
  // batch with variance exactly 4
  Matrix x(2, 1);
  x.at(0, 0) = 0.0;
  x.at(1, 0) = 4.0;  // mean 2, biased var 4
  Matrix y = net.forward(x, Mode::Training);
  double var = (y.at(0, 0) * y.at(0, 0) + y.at(1, 0) * y.at(1, 0)) / 2.0;
  CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("batch norm: inference uses running statistics") {
  std::vector<LayerSpec> specs{{LayerKind::Dense, 2, 2, false, 0.1, 0.1},
                               {LayerKind::BatchNorm, 0, 2, false, 0.1, 0.1}};
  Network net = Network::from_specs(specs);
  auto& d = std::get<DenseLayer>(net.layer(0));
  d.weights.at(0, 0) = 1.0;
  d.weights.at(1, 1) = 1.0;

  Rng rng(37);
  // independent running-stat recurrence oracle
  std::vector<double> run_mean(2, 0.0), run_var(2, 1.0);
  const double momentum = 0.1;
  for (int b = 0; b < 5; ++b) {
    Matrix batch = random_matrix(16, 2, rng, -1.0, 3.0);
    for (size_t j = 0; j < 2; ++j) {
      double mean = 0.0, var = 0.0;
      for (size_t i = 0; i < batch.rows(); ++i) mean += batch.at(i, j);
      mean /= static_cast<double>(batch.rows());
      for (size_t i = 0; i < batch.rows(); ++i) {
        const double c = batch.at(i, j) - mean;
        var += c * c;
      }
      var /= static_cast<double>(batch.rows());
      run_mean[j] = (1.0 - momentum) * run_mean[j] + momentum * mean;
      run_var[j] = (1.0 - momentum) * run_var[j] + momentum * var;
    }
    net.forward(batch, Mode::Training);
  }

  Matrix probe(2, 2);
  probe.at(0, 0) = 0.7;
  probe.at(0, 1) = -0.2;
  probe.at(1, 0) = 2.0;
  probe.at(1, 1) = 1.0;
  Matrix y = net.infer(probe);
  for (size_t i = 0; i < 2; ++i)
    for (size_t j = 0; j < 2; ++j) {
      const double expect = (probe.at(i, j) - run_mean[j]) /
                            std::sqrt(run_var[j] + BatchNormLayer::kEps);
      CHECK(y.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }

  // output independent of batch composition: single-row inference matches
  Matrix row = probe.take_rows({0});
  Matrix y_row = net.infer(row);
  CHECK(y_row.at(0, 0) == y.at(0, 0));
  CHECK(y_row.at(0, 1) == y.at(0, 1));
}

TEST_CASE("batch norm rejects training batches of one row") {
  Network net = small_net(3, {4, 2}, 41);
  Matrix x(1, 3, 0.5);
  CHECK_THROWS_AS(net.forward(x, Mode::Training), Error);
}

TEST_CASE("inference is a pure function (bitwise repeatable)") {
  Network net = small_net(5, {8, 3}, 43);
  Rng rng(47);
  Matrix x = random_matrix(7, 5, rng);
  Matrix y1 = net.infer(x);
  Matrix y2 = net.infer(x);
  CHECK(y1.values() == y2.values());
}

TEST_CASE("zero input through a bias-free stack without batch norm is zero") {
  Network net = small_net(4, {6, 3}, 51, /*batchnorm=*/false);
  Matrix x(3, 4, 0.0);
  Matrix y = net.infer(x);
  for (double v : y.values()) CHECK(v == 0.0);
}

TEST_CASE("fixed seed gives identical initialization") {
  Network a = small_net(6, {8, 4}, 99);
  Network b = small_net(6, {8, 4}, 99);
  const auto pa = a.parameter_values();
  const auto pb = b.parameter_values();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);
}

TEST_CASE("network serialization round-trips bit-exactly") {
  Network net = small_net(5, {7, 3}, 61);
  // move running stats off their init values
  Rng rng(67);
  net.forward(random_matrix(9, 5, rng), Mode::Training);

  std::stringstream ss;
  net.save(ss);
  Network back = Network::load(ss);
  const auto pa = net.parameter_values();
  const auto pb = back.parameter_values();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);

  Matrix x = random_matrix(4, 5, rng);
  CHECK(net.infer(x).values() == back.infer(x).values());
}

TEST_CASE("architecture spec parsing") {
  CHECK(parse_dims("32-16-8") == std::vector<size_t>{32, 16, 8});
  CHECK(parse_dims("8") == std::vector<size_t>{8});
  CHECK_THROWS_AS(parse_dims(""), Error);
  CHECK_THROWS_AS(parse_dims("32--8"), Error);
  CHECK_THROWS_AS(parse_dims("32-x"), Error);
}
