#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "proce/error.hpp"
#include "proce/matrix.hpp"
#include "proce/nn.hpp"
#include "proce/rng.hpp"

using namespace proce;

namespace {

// Logistic regression on the same data is the accuracy oracle for the blob
// task: if a linear model clears the bar, the MLP must as well.
double logistic_regression_accuracy(const Matrix& X, const Matrix& Y,
                                    int epochs, double lr) {
  std::vector<double> w(X.cols, 0.0);
  double b = 0.0;
  for (int e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < X.rows; ++i) {
      double z = b;
      for (std::size_t j = 0; j < X.cols; ++j) z += w[j] * X.at(i, j);
      const double p = sigmoid(z);
      const double g = p - Y.at(i, 0);
      for (std::size_t j = 0; j < X.cols; ++j) w[j] -= lr * g * X.at(i, j);
      b -= lr * g;
    }
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    double z = b;
    for (std::size_t j = 0; j < X.cols; ++j) z += w[j] * X.at(i, j);
    correct += ((sigmoid(z) >= 0.5 ? 1.0 : 0.0) == Y.at(i, 0)) ? 1 : 0;
  }
  return double(correct) / double(X.rows);
}

void make_blobs(Matrix& X, Matrix& Y, std::size_t n, Rng& rng) {
  X = Matrix(n, 2);
  Y = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const bool one = i % 2 == 0;
    X.at(i, 0) = rng.normal(one ? 0.75 : 0.25, 0.08);
    X.at(i, 1) = rng.normal(one ? 0.75 : 0.25, 0.08);
    Y.at(i, 0) = one ? 1.0 : 0.0;
  }
}

double network_accuracy(const MlpNetwork& net, const Matrix& X,
                        const Matrix& Y) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < X.rows; ++i) {
    std::vector<double> x(X.row(i), X.row(i) + X.cols);
    const double p = forward(net, x)[0];
    correct += ((p >= 0.5 ? 1.0 : 0.0) == Y.at(i, 0)) ? 1 : 0;
  }
  return double(correct) / double(X.rows);
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("sigmoid: analytic values, openness, monotonicity") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigmoid(-7.0) == doctest::Approx(9.110511944006454e-4).epsilon(1e-12));
  // Extreme inputs stay strictly inside (0,1).
  CHECK(sigmoid(1000.0) < 1.0);
  CHECK(sigmoid(-1000.0) > 0.0);
  double prev = sigmoid(-20.0);
  for (double z = -19.0; z <= 20.0; z += 1.0) {
    const double cur = sigmoid(z);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("cross_entropy analytic values and clamping") {
  CHECK(cross_entropy(0.5, 1) == doctest::Approx(0.6931471805599453));
  CHECK(cross_entropy(0.8, 0) == doctest::Approx(1.6094379124341003));
  // p -> 1 with y=1 approaches zero loss.
  CHECK(cross_entropy(1.0 - 1e-12, 1) == doctest::Approx(0.0).epsilon(1e-9));
  // The clamp caps the blowup at -ln(1e-12).
  CHECK(cross_entropy(1e-300, 1) == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS((void)cross_entropy(std::nan(""), 1), proce::DomainError);
}

TEST_CASE("forward: zero net with sigmoid head gives 0.5") {
  MlpNetwork net;
  net.layers.push_back(DenseLayer{Matrix(1, 3), {0.0}, Activation::kSigmoid,
                                  0.0});
  const std::vector<double> out = forward(net, {0.3, -2.0, 5.0});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(0.5));
}

TEST_CASE("forward: identity layer passes input through") {
  Matrix w(2, 2);
  w.at(0, 0) = 1.0;
  w.at(1, 1) = 1.0;
  MlpNetwork net;
  net.layers.push_back(DenseLayer{w, {0.0, 0.0}, Activation::kIdentity, 0.0});
  const std::vector<double> out = forward(net, {1.0, 2.0});
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(2.0));
}

TEST_CASE("forward: repeated calls agree; shape mismatch throws") {
  Rng rng(5);
  MlpNetwork net = make_mlp(4, {8, 8}, 2, Activation::kRelu,
                            Activation::kSigmoid, 0.0, rng);
  const std::vector<double> x{0.1, 0.9, -0.2, 0.4};
  CHECK(forward(net, x) == forward(net, x));
  CHECK_THROWS_AS((void)forward(net, {1.0, 2.0}), proce::ShapeError);
}

TEST_CASE("make_mlp: topology, Glorot bounds, relu nonnegativity") {
  Rng rng(21);
  MlpNetwork net = make_mlp(3, {64, 32, 16}, 1, Activation::kRelu,
                            Activation::kSigmoid, 0.1, rng);
  REQUIRE(net.layers.size() == 4);
  CHECK(net.input_dim() == 3);
  CHECK(net.output_dim() == 1);
  CHECK(net.layers[0].weights.rows == 64);
  CHECK(net.layers[0].weights.cols == 3);
  CHECK(net.layers[3].weights.rows == 1);
  CHECK(net.layers[3].weights.cols == 16);
  // Hidden layers carry dropout; the head never does.
  CHECK(net.layers[0].dropout_rate == doctest::Approx(0.1));
  CHECK(net.layers[3].dropout_rate == 0.0);
  for (const DenseLayer& layer : net.layers) {
    const double limit = std::sqrt(
        6.0 / double(layer.weights.cols + layer.weights.rows));
    for (double v : layer.weights.data) {
      CHECK(std::abs(v) <= limit);
    }
    for (double b : layer.bias) CHECK(b == 0.0);
  }
  // ReLU hidden outputs are nonnegative on random probes.
  Rng probe(22);
  MlpNetwork relu_only = make_mlp(3, {16}, 8, Activation::kRelu,
                                  Activation::kRelu, 0.0, probe);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x{probe.uniform(-3, 3), probe.uniform(-3, 3),
                          probe.uniform(-3, 3)};
    for (double v : forward(relu_only, x)) CHECK(v >= 0.0);
  }
}

TEST_CASE("grad_check: random nets stay under 1e-4") {
  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t in = 1 + rng.uniform_index(5);
    const std::size_t h1 = 2 + rng.uniform_index(8);
    const std::size_t h2 = 2 + rng.uniform_index(8);
    const bool bce = rng.bernoulli(0.5);
    MlpNetwork net = make_mlp(in, {h1, h2}, bce ? 1 : 3, Activation::kRelu,
                              bce ? Activation::kSigmoid
                                  : Activation::kIdentity,
                              0.0, rng);
    std::vector<double> x(in), target(bce ? 1 : 3);
    // Central differences stop being a gradient oracle when a rectified
    // pre-activation sits within the probe step of zero; redraw such points.
    for (int attempt = 0; attempt < 200; ++attempt) {
      for (double& v : x) v = rng.uniform(-1, 1);
      const ForwardTrace trace = forward_trace(net, x, nullptr);
      double closest = 1e300;
      for (std::size_t layer = 0; layer + 1 < net.layers.size(); ++layer) {
        for (double pre : trace.pre[layer]) {
          closest = std::min(closest, std::abs(pre));
        }
      }
      if (closest > 1e-3) break;
    }
    for (double& v : target) v = bce ? double(rng.bernoulli(0.5))
                                     : rng.uniform(-1, 1);
    const double err = grad_check(
        net, x, target,
        bce ? LossKind::kBinaryCrossEntropy : LossKind::kMeanSquaredError,
        1e-5);
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("grad_check: linear single layer is exact to near machine eps") {
  Rng rng(33);
  MlpNetwork net = make_mlp(3, {}, 2, Activation::kIdentity,
                            Activation::kIdentity, 0.0, rng);
  const double err = grad_check(net, {0.5, -0.25, 0.75}, {0.1, 0.9},
                                LossKind::kMeanSquaredError, 1e-5);
  CHECK(err < 1e-9);
}

TEST_CASE("dropout: training mode zeroes and rescales, inference is a no-op") {
  Matrix w(4, 4);
  for (std::size_t i = 0; i < 4; ++i) w.at(i, i) = 1.0;
  MlpNetwork net;
  net.layers.push_back(
      DenseLayer{w, {0.0, 0.0, 0.0, 0.0}, Activation::kIdentity, 0.5});
  const std::vector<double> x{1.0, 1.0, 1.0, 1.0};

  // Inference: dropout ignored entirely.
  CHECK(forward(net, x) == std::vector<double>{1.0, 1.0, 1.0, 1.0});

  // Training: surviving units are scaled by 1/(1-rate); dropped are zero.
  Rng rng(44);
  int dropped = 0, kept = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ForwardTrace trace = forward_trace(net, x, &rng);
    for (double v : trace.output()) {
      if (v == 0.0) {
        ++dropped;
      } else {
        CHECK(v == doctest::Approx(2.0));
        ++kept;
      }
    }
  }
  CHECK(dropped > 250);  // ~400 of 800 expected at rate 0.5
  CHECK(kept > 250);
}

TEST_CASE("train: separable blobs beat the logistic oracle bar") {
  Matrix X, Y;
  Rng data_rng(55);
  make_blobs(X, Y, 200, data_rng);
  const double oracle = logistic_regression_accuracy(X, Y, 50, 0.5);
  REQUIRE(oracle >= 0.95);

  Rng init(56);
  MlpNetwork net = make_mlp(2, {16, 8}, 1, Activation::kRelu,
                            Activation::kSigmoid, 0.0, init);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.seed = 57;
  const TrainResult result =
      train(net, X, Y, LossKind::kBinaryCrossEntropy, cfg);
  CHECK(result.loss_history.size() == 50);
  CHECK(result.loss_history.back() < result.loss_history.front());
  CHECK(network_accuracy(net, X, Y) >= 0.95);
}

TEST_CASE("train: deterministic loss history; zero epochs rejected") {
  Matrix X, Y;
  Rng data_rng(65);
  make_blobs(X, Y, 60, data_rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 66;

  Rng i1(67), i2(67);
  MlpNetwork a = make_mlp(2, {8}, 1, Activation::kRelu, Activation::kSigmoid,
                          0.1, i1);
  MlpNetwork b = make_mlp(2, {8}, 1, Activation::kRelu, Activation::kSigmoid,
                          0.1, i2);
  const TrainResult ra = train(a, X, Y, LossKind::kBinaryCrossEntropy, cfg);
  const TrainResult rb = train(b, X, Y, LossKind::kBinaryCrossEntropy, cfg);
  CHECK(ra.loss_history == rb.loss_history);
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    CHECK(a.layers[l].weights.data == b.layers[l].weights.data);
    CHECK(a.layers[l].bias == b.layers[l].bias);
  }

  TrainConfig bad;
  bad.epochs = 0;
  CHECK_THROWS_AS((void)train(a, X, Y, LossKind::kBinaryCrossEntropy, bad),
                  proce::ConfigError);
}

TEST_CASE("train: sgd also learns the blobs") {
  Matrix X, Y;
  Rng data_rng(75);
  make_blobs(X, Y, 200, data_rng);
  Rng init(76);
  MlpNetwork net = make_mlp(2, {16}, 1, Activation::kRelu,
                            Activation::kSigmoid, 0.0, init);
  TrainConfig cfg;
  cfg.epochs = 80;
  cfg.optimizer = OptimizerKind::kSgd;
  cfg.learning_rate = 0.5;
  cfg.seed = 77;
  (void)train(net, X, Y, LossKind::kBinaryCrossEntropy, cfg);
  CHECK(network_accuracy(net, X, Y) >= 0.95);
}

TEST_CASE("train: shape mismatches are rejected") {
  Rng rng(85);
  MlpNetwork net = make_mlp(2, {4}, 1, Activation::kRelu,
                            Activation::kSigmoid, 0.0, rng);
  Matrix X(10, 3), Y(10, 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS((void)train(net, X, Y, LossKind::kBinaryCrossEntropy, cfg),
                  proce::ShapeError);
  Matrix X2(10, 2), Y2(9, 1);
  CHECK_THROWS_AS((void)train(net, X2, Y2, LossKind::kBinaryCrossEntropy, cfg),
                  proce::ShapeError);
}

}  // TEST_SUITE
