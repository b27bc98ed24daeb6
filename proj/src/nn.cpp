#include "proce/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "proce/error.hpp"

namespace proce {

namespace {

constexpr double kProbClamp = 1e-12;

double activation_apply(Activation a, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kSigmoid:
      return sigmoid(z);
    case Activation::kIdentity:
      return z;
  }
  throw UsageError("unknown activation");
}

// Derivative of the activation at pre-activation z.
double activation_deriv(Activation a, double z) {
  switch (a) {
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kSigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
    case Activation::kIdentity:
      return 1.0;
  }
  throw UsageError("unknown activation");
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kIdentity:
      return "identity";
  }
  throw UsageError("unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "identity") return Activation::kIdentity;
  throw ParseError("unknown activation name: " + name);
}

std::size_t MlpNetwork::input_dim() const {
  if (layers.empty()) throw UsageError("network has no layers");
  return layers.front().in_dim();
}

std::size_t MlpNetwork::output_dim() const {
  if (layers.empty()) throw UsageError("network has no layers");
  return layers.back().out_dim();
}

void MlpNetwork::validate() const {
  if (layers.empty()) throw ShapeError("network must have at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (l.weights.rows == 0 || l.weights.cols == 0) {
      throw ShapeError("layer " + std::to_string(i) + " has empty weights");
    }
    if (l.bias.size() != l.out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " bias length " +
                       std::to_string(l.bias.size()) + " != out dim " +
                       std::to_string(l.out_dim()));
    }
    if (l.dropout_rate < 0.0 || l.dropout_rate >= 1.0) {
      throw ConfigError("layer " + std::to_string(i) +
                        " dropout rate must lie in [0, 1)");
    }
    if (i > 0 && l.in_dim() != layers[i - 1].out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " expects " +
                       std::to_string(l.in_dim()) + " inputs but layer " +
                       std::to_string(i - 1) + " produces " +
                       std::to_string(layers[i - 1].out_dim()));
    }
  }
}

DenseLayer make_dense_layer(std::size_t in_dim, std::size_t out_dim,
                            Activation activation, double dropout_rate,
                            Rng& rng) {
  if (in_dim == 0 || out_dim == 0) {
    throw ShapeError("layer dimensions must be positive");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  DenseLayer layer;
  layer.weights = Matrix(out_dim, in_dim);
  layer.bias.assign(out_dim, 0.0);
  layer.activation = activation;
  layer.dropout_rate = dropout_rate;
  const double limit =
      std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (double& w : layer.weights.data) w = rng.uniform(-limit, limit);
  return layer;
}

MlpNetwork make_mlp(std::size_t input_dim,
                    const std::vector<std::size_t>& hidden_dims,
                    std::size_t output_dim, Activation hidden_activation,
                    Activation output_activation, double hidden_dropout,
                    Rng& rng) {
  MlpNetwork net;
  std::size_t prev = input_dim;
  for (std::size_t h : hidden_dims) {
    net.layers.push_back(
        make_dense_layer(prev, h, hidden_activation, hidden_dropout, rng));
    prev = h;
  }
  net.layers.push_back(
      make_dense_layer(prev, output_dim, output_activation, 0.0, rng));
  net.validate();
  return net;
}

double sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  // Keep the output strictly inside (0, 1) even under exp under/overflow.
  if (s <= 0.0) return std::numeric_limits<double>::min();
  if (s >= 1.0) return std::nextafter(1.0, 0.0);
  return s;
}

double cross_entropy(double p, int y) {
  if (y != 0 && y != 1) throw UsageError("cross_entropy: label must be 0 or 1");
  if (!std::isfinite(p)) {
    throw DomainError("cross_entropy: probability must be finite");
  }
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

ForwardTrace forward_trace(const MlpNetwork& net, const std::vector<double>& x,
                           Rng* dropout_rng) {
  net.validate();
  if (x.size() != net.input_dim()) {
    throw ShapeError("forward: input length " + std::to_string(x.size()) +
                     " does not match network input dim " +
                     std::to_string(net.input_dim()));
  }
  ForwardTrace trace;
  std::vector<double> cur = x;
  for (const DenseLayer& layer : net.layers) {
    trace.inputs.push_back(cur);
    std::vector<double> z = matvec(layer.weights, cur);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += layer.bias[j];
    trace.pre.push_back(z);
    std::vector<double> out(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      out[j] = activation_apply(layer.activation, z[j]);
    }
    // Inverted dropout: drop units with probability `rate`, scale survivors
    // by 1/(1-rate) so inference needs no rescaling.
    std::vector<double> mask;
    if (dropout_rng != nullptr && layer.dropout_rate > 0.0) {
      const double keep = 1.0 - layer.dropout_rate;
      mask.resize(out.size());
      for (std::size_t j = 0; j < out.size(); ++j) {
        mask[j] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
        out[j] *= mask[j];
      }
    }
    trace.masks.push_back(std::move(mask));
    trace.outputs.push_back(out);
    cur = std::move(out);
  }
  return trace;
}

std::vector<double> forward(const MlpNetwork& net,
                            const std::vector<double>& x) {
  return forward_trace(net, x, nullptr).output();
}

std::vector<double> output_delta(const MlpNetwork& net,
                                 const std::vector<double>& output,
                                 const std::vector<double>& target,
                                 LossKind loss) {
  if (output.size() != target.size()) {
    throw ShapeError("output/target length mismatch");
  }
  const DenseLayer& head = net.layers.back();
  std::vector<double> delta(output.size());
  switch (loss) {
    case LossKind::kBinaryCrossEntropy:
      // The sigmoid folds into the loss: d(loss)/d(pre) = p - y.
      if (head.activation != Activation::kSigmoid) {
        throw UsageError(
            "binary cross-entropy requires a sigmoid output layer");
      }
      for (std::size_t j = 0; j < output.size(); ++j) {
        delta[j] = output[j] - target[j];
      }
      return delta;
    case LossKind::kMeanSquaredError:
      for (std::size_t j = 0; j < output.size(); ++j) {
        double d = 2.0 * (output[j] - target[j]);
        switch (head.activation) {
          case Activation::kIdentity:
            break;
          case Activation::kSigmoid:
            d *= output[j] * (1.0 - output[j]);
            break;
          case Activation::kRelu:
            d *= output[j] > 0.0 ? 1.0 : 0.0;
            break;
        }
        delta[j] = d;
      }
      return delta;
  }
  throw UsageError("unknown loss kind");
}

double loss_value(const std::vector<double>& output,
                  const std::vector<double>& target, LossKind loss) {
  if (output.size() != target.size()) {
    throw ShapeError("output/target length mismatch");
  }
  double total = 0.0;
  switch (loss) {
    case LossKind::kBinaryCrossEntropy:
      for (std::size_t j = 0; j < output.size(); ++j) {
        total += cross_entropy(output[j], target[j] >= 0.5 ? 1 : 0);
      }
      return total;
    case LossKind::kMeanSquaredError:
      for (std::size_t j = 0; j < output.size(); ++j) {
        const double d = output[j] - target[j];
        total += d * d;
      }
      return total;
  }
  throw UsageError("unknown loss kind");
}

Gradients backward(const MlpNetwork& net, const ForwardTrace& trace,
                   const std::vector<double>& d_output_pre) {
  const std::size_t n_layers = net.layers.size();
  if (trace.pre.size() != n_layers) {
    throw UsageError("trace does not match network");
  }
  Gradients grads;
  grads.layers.resize(n_layers);
  std::vector<double> delta = d_output_pre;  // d(loss)/d(pre) of current layer
  for (std::size_t li = n_layers; li-- > 0;) {
    const DenseLayer& layer = net.layers[li];
    if (delta.size() != layer.out_dim()) {
      throw ShapeError("backward: delta length mismatch at layer " +
                       std::to_string(li));
    }
    LayerGrads& lg = grads.layers[li];
    lg.d_weights = Matrix(layer.out_dim(), layer.in_dim());
    lg.d_bias.assign(layer.out_dim(), 0.0);
    const std::vector<double>& input = trace.inputs[li];
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      lg.d_bias[r] = delta[r];
      double* wrow = lg.d_weights.row(r);
      for (std::size_t c = 0; c < layer.in_dim(); ++c) {
        wrow[c] = delta[r] * input[c];
      }
    }
    // Push the gradient through to this layer's input.
    std::vector<double> d_input(layer.in_dim(), 0.0);
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      const double* wrow = layer.weights.row(r);
      for (std::size_t c = 0; c < layer.in_dim(); ++c) {
        d_input[c] += wrow[c] * delta[r];
      }
    }
    if (li == 0) {
      grads.d_input = std::move(d_input);
      break;
    }
    // Chain through the previous layer's dropout mask and activation.
    const std::size_t pi = li - 1;
    const std::vector<double>& mask = trace.masks[pi];
    std::vector<double>& prev_delta = d_input;
    for (std::size_t j = 0; j < prev_delta.size(); ++j) {
      double d = prev_delta[j];
      if (!mask.empty()) d *= mask[j];
      d *= activation_deriv(net.layers[pi].activation, trace.pre[pi][j]);
      prev_delta[j] = d;
    }
    delta = std::move(prev_delta);
  }
  return grads;
}

OptimizerState make_optimizer_state(const MlpNetwork& net) {
  OptimizerState state;
  state.m.resize(net.layers.size());
  state.v.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const DenseLayer& l = net.layers[i];
    state.m[i].d_weights = Matrix(l.out_dim(), l.in_dim());
    state.m[i].d_bias.assign(l.out_dim(), 0.0);
    state.v[i].d_weights = Matrix(l.out_dim(), l.in_dim());
    state.v[i].d_bias.assign(l.out_dim(), 0.0);
  }
  return state;
}

void accumulate(std::vector<LayerGrads>& acc, const Gradients& g) {
  if (acc.empty()) {
    acc.resize(g.layers.size());
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
      acc[i].d_weights = Matrix(g.layers[i].d_weights.rows,
                                g.layers[i].d_weights.cols);
      acc[i].d_bias.assign(g.layers[i].d_bias.size(), 0.0);
    }
  }
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    for (std::size_t k = 0; k < acc[i].d_weights.size(); ++k) {
      acc[i].d_weights.data[k] += g.layers[i].d_weights.data[k];
    }
    for (std::size_t k = 0; k < acc[i].d_bias.size(); ++k) {
      acc[i].d_bias[k] += g.layers[i].d_bias[k];
    }
  }
}

void scale_gradients(std::vector<LayerGrads>& acc, double factor) {
  for (LayerGrads& lg : acc) {
    for (double& v : lg.d_weights.data) v *= factor;
    for (double& v : lg.d_bias) v *= factor;
  }
}

void apply_gradients(MlpNetwork& net, const std::vector<LayerGrads>& grads,
                     OptimizerState& state, const TrainConfig& cfg) {
  if (grads.size() != net.layers.size()) {
    throw ShapeError("gradient/layer count mismatch");
  }
  if (cfg.optimizer == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      DenseLayer& l = net.layers[i];
      for (std::size_t k = 0; k < l.weights.size(); ++k) {
        l.weights.data[k] -= cfg.learning_rate * grads[i].d_weights.data[k];
      }
      for (std::size_t k = 0; k < l.bias.size(); ++k) {
        l.bias[k] -= cfg.learning_rate * grads[i].d_bias[k];
      }
    }
    return;
  }
  // Adam with bias-corrected moment estimates.
  state.step += 1;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto update = [&](double& param, double g, double& m, double& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    param -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
  };
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    DenseLayer& l = net.layers[i];
    for (std::size_t k = 0; k < l.weights.size(); ++k) {
      update(l.weights.data[k], grads[i].d_weights.data[k],
             state.m[i].d_weights.data[k], state.v[i].d_weights.data[k]);
    }
    for (std::size_t k = 0; k < l.bias.size(); ++k) {
      update(l.bias[k], grads[i].d_bias[k], state.m[i].d_bias[k],
             state.v[i].d_bias[k]);
    }
  }
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive and finite");
  }
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 ||
      adam_beta2 >= 1.0) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
}

TrainResult train(MlpNetwork& net, const Matrix& inputs, const Matrix& targets,
                  LossKind loss, const TrainConfig& cfg) {
  cfg.validate();
  net.validate();
  if (inputs.rows == 0) throw UsageError("train: no samples");
  if (inputs.rows != targets.rows) {
    throw ShapeError("train: input rows " + std::to_string(inputs.rows) +
                     " != target rows " + std::to_string(targets.rows));
  }
  if (inputs.cols != net.input_dim()) {
    throw ShapeError("train: input cols do not match network input dim");
  }
  if (targets.cols != net.output_dim()) {
    throw ShapeError("train: target cols do not match network output dim");
  }
  Rng rng(cfg.seed);
  OptimizerState state = make_optimizer_state(net);
  TrainResult result;
  std::vector<std::size_t> order(inputs.rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> x(inputs.cols), t(targets.cols);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates reshuffle per epoch.
    for (std::size_t i = order.size(); i-- > 1;) {
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<LayerGrads> batch_grads;
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t row = order[bi];
        x.assign(inputs.row(row), inputs.row(row) + inputs.cols);
        t.assign(targets.row(row), targets.row(row) + targets.cols);
        ForwardTrace trace = forward_trace(net, x, &rng);
        epoch_loss += loss_value(trace.output(), t, loss);
        const std::vector<double> delta =
            output_delta(net, trace.output(), t, loss);
        accumulate(batch_grads, backward(net, trace, delta));
      }
      scale_gradients(batch_grads, 1.0 / static_cast<double>(stop - start));
      apply_gradients(net, batch_grads, state, cfg);
    }
    epoch_loss /= static_cast<double>(inputs.rows);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError(
          "loss became non-finite at epoch " + std::to_string(epoch + 1) +
          " (learning rate " + std::to_string(cfg.learning_rate) +
          "); lower the learning rate or check the data scaling");
    }
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

double grad_check(const MlpNetwork& net, const std::vector<double>& x,
                  const std::vector<double>& target, LossKind loss,
                  double step) {
  if (!(step > 0.0)) throw UsageError("grad_check: step must be positive");
  MlpNetwork work = net;  // finite differences perturb a private copy
  const ForwardTrace trace = forward_trace(work, x, nullptr);
  const std::vector<double> delta =
      output_delta(work, trace.output(), target, loss);
  const Gradients analytic = backward(work, trace, delta);

  auto loss_at = [&]() {
    return loss_value(forward(work, x), target, loss);
  };
  double worst = 0.0;
  auto check_param = [&](double& param, double grad) {
    const double saved = param;
    param = saved + step;
    const double up = loss_at();
    param = saved - step;
    const double down = loss_at();
    param = saved;
    const double fd = (up - down) / (2.0 * step);
    const double rel =
        std::abs(grad - fd) / std::max(1.0, std::abs(grad) + std::abs(fd));
    worst = std::max(worst, rel);
  };
  for (std::size_t li = 0; li < work.layers.size(); ++li) {
    DenseLayer& layer = work.layers[li];
    for (std::size_t k = 0; k < layer.weights.size(); ++k) {
      check_param(layer.weights.data[k],
                  analytic.layers[li].d_weights.data[k]);
    }
    for (std::size_t k = 0; k < layer.bias.size(); ++k) {
      check_param(layer.bias[k], analytic.layers[li].d_bias[k]);
    }
  }
  return worst;
}

}  // namespace proce
