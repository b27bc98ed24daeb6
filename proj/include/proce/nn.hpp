#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proce/matrix.hpp"
#include "proce/rng.hpp"

namespace proce {

enum class Activation { kRelu, kSigmoid, kIdentity };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Fully connected layer: y = act(W x + b), with optional inverted dropout
// applied to the activation output during training only.
struct DenseLayer {
  Matrix weights;            // out x in
  std::vector<double> bias;  // out
  Activation activation = Activation::kIdentity;
  double dropout_rate = 0.0;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
};

struct MlpNetwork {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  void validate() const;  // throws on inter-layer dimension mismatch
};

// Glorot-uniform initialized layer over [-sqrt(6/(fan_in+fan_out)), +].
DenseLayer make_dense_layer(std::size_t in_dim, std::size_t out_dim,
                            Activation activation, double dropout_rate,
                            Rng& rng);

// Builds an MLP with the given hidden widths; hidden layers share one
// activation and dropout rate, the head gets its own activation and none.
MlpNetwork make_mlp(std::size_t input_dim,
                    const std::vector<std::size_t>& hidden_dims,
                    std::size_t output_dim, Activation hidden_activation,
                    Activation output_activation, double hidden_dropout,
                    Rng& rng);

// Inference-mode forward pass (dropout disabled).
std::vector<double> forward(const MlpNetwork& net, const std::vector<double>& x);

// Numerically stable logistic; output nudged into the open interval (0, 1).
double sigmoid(double z);

// Binary cross-entropy of predicted probability p against label y in {0,1};
// p is clamped into [1e-12, 1 - 1e-12] before the logs.
double cross_entropy(double p, int y);

enum class LossKind { kBinaryCrossEntropy, kMeanSquaredError };

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean per-sample loss per epoch
};

// Mini-batch training. `inputs` is n x d; `targets` is n x k (k = 1 with 0/1
// entries for binary cross-entropy). Samples are reshuffled every epoch.
// Throws if the loss goes non-finite.
TrainResult train(MlpNetwork& net, const Matrix& inputs, const Matrix& targets,
                  LossKind loss, const TrainConfig& cfg);

// Max relative error between backprop gradients and central finite
// differences over every weight and bias, evaluated in inference mode.
double grad_check(const MlpNetwork& net, const std::vector<double>& x,
                  const std::vector<double>& target, LossKind loss,
                  double step = 1e-5);

// --- training internals, exposed so other modules can drive custom loops ---

struct ForwardTrace {
  std::vector<std::vector<double>> inputs;   // input seen by each layer
  std::vector<std::vector<double>> pre;      // pre-activation per layer
  std::vector<std::vector<double>> outputs;  // post-activation (+dropout)
  std::vector<std::vector<double>> masks;    // dropout scale per unit (empty = off)

  const std::vector<double>& output() const { return outputs.back(); }
};

// Forward pass recording intermediates; draws dropout masks from `dropout_rng`
// when non-null, otherwise runs in inference mode.
ForwardTrace forward_trace(const MlpNetwork& net, const std::vector<double>& x,
                           Rng* dropout_rng);

struct LayerGrads {
  Matrix d_weights;
  std::vector<double> d_bias;
};

struct Gradients {
  std::vector<LayerGrads> layers;
  std::vector<double> d_input;  // loss gradient w.r.t. the network input
};

// Backpropagates from `d_output_pre`, the loss gradient w.r.t. the LAST
// layer's pre-activation (callers fold the head activation into the loss:
// sigmoid + cross-entropy gives p - y, identity + squared error 2(p - t)).
Gradients backward(const MlpNetwork& net, const ForwardTrace& trace,
                   const std::vector<double>& d_output_pre);

// Loss gradient w.r.t. the last layer's pre-activation for `loss`, given the
// traced output. Supports the activation/loss pairings used in this library.
std::vector<double> output_delta(const MlpNetwork& net,
                                 const std::vector<double>& output,
                                 const std::vector<double>& target,
                                 LossKind loss);

double loss_value(const std::vector<double>& output,
                  const std::vector<double>& target, LossKind loss);

struct OptimizerState {
  std::vector<LayerGrads> m;  // first moments (Adam)
  std::vector<LayerGrads> v;  // second moments (Adam)
  std::uint64_t step = 0;
};

OptimizerState make_optimizer_state(const MlpNetwork& net);

void accumulate(std::vector<LayerGrads>& acc, const Gradients& g);
void scale_gradients(std::vector<LayerGrads>& acc, double factor);

// One optimizer update from accumulated (already averaged) gradients.
void apply_gradients(MlpNetwork& net, const std::vector<LayerGrads>& grads,
                     OptimizerState& state, const TrainConfig& cfg);

}  // namespace proce
