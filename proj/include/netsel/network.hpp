#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "netsel/rng.hpp"
#include "netsel/tensor.hpp"

namespace netsel {

enum class FinalActivation { sigmoid, identity };
enum class LossKind { bce, mse, mae };

// Fixed structure: four valid (no padding) single-stride convolutions with
// ReLU, two stacked LSTM layers, three fully connected layers with ReLU
// between them. Dimensions are configurable; defaults follow the reference
// sizing (64/64/64/128 conv channels, hidden 128, head 64-32-1).
struct ModelArch {
  int input_features = 9;
  std::array<int, 4> conv_channels{64, 64, 64, 128};
  int kernel = 3;
  int lstm_hidden = 128;
  std::array<int, 2> fc_hidden{64, 32};
  FinalActivation final_activation = FinalActivation::sigmoid;

  // Each valid conv eats kernel-1 steps; at least one step must reach the
  // LSTM stack.
  int min_window() const { return 4 * (kernel - 1) + 1; }
  int conv_out_len(int window) const { return window - 4 * (kernel - 1); }
  void validate() const;
  bool operator==(const ModelArch&) const = default;
};

struct ConvLayer {
  Matrix w;  // C_out x (C_in * K), tap-major blocks of C_in columns
  Matrix b;  // C_out x 1
};

// Gate rows stacked [input; forget; cell; output], H rows each.
struct LstmLayer {
  Matrix wx;  // 4H x D
  Matrix wh;  // 4H x H
  Matrix b;   // 4H x 1
};

struct FcLayer {
  Matrix w;
  Matrix b;
};

struct ModelParams {
  ModelArch arch;
  std::vector<ConvLayer> conv;  // 4
  std::vector<LstmLayer> lstm;  // 2
  std::vector<FcLayer> fc;      // 3

  static ModelParams zeros(const ModelArch& arch);
  // Per-layer uniform fan-in init; LSTM forget bias starts at 1.
  static ModelParams init(const ModelArch& arch, std::uint64_t seed);

  // Fixed traversal order; serialization, the optimizer and averaging all
  // walk buffers through this.
  std::vector<Matrix*> buffers();
  std::vector<const Matrix*> buffers() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  bool same_shape(const ModelParams& other) const;
  bool bitwise_equal(const ModelParams& other) const;
};

// Gradients share the parameter layout.
using GradientSet = ModelParams;

// --- single-sample layer semantics ---

// Valid cross-correlation, stride 1, then ReLU. input (C_in x L) -> (C_out x L-K+1).
Tensor conv1d_forward(const Tensor& input, const ConvLayer& layer, int kernel);

struct LstmResult {
  Tensor hidden_sequence;  // L x H
  Vector final_hidden;
  Vector final_cell;
};

// Standard recurrence from a zero initial state. input (L x D), row per step.
LstmResult lstm_forward(const Tensor& sequence, const LstmLayer& layer);

// Three affine layers, ReLU between, final activation on the scalar output.
double fc_head_forward(const Vector& hidden, const std::vector<FcLayer>& layers,
                       FinalActivation activation);

double loss_value(double pred, double label, LossKind kind);
double loss_mean(std::span<const double> preds, std::span<const double> labels,
                 LossKind kind);

// --- composed model ---

// View of one input window inside a prepared trace matrix (F x duration):
// columns [end_col - window + 1, end_col].
struct WindowRef {
  const Matrix* features;
  int end_col;
};

// Reference composition of the single-sample ops. Slow; used for testing the
// batched path.
double model_forward_reference(const ModelParams& params, const Matrix& window_fxt);

// Batched prediction, window taken per ref with the given length. When
// `relu_mask_hash` is given it receives a hash of every relu on/off state,
// which lets finite-difference checks detect kink crossings.
std::vector<double> model_forward_batch(const ModelParams& params,
                                        std::span<const WindowRef> windows,
                                        int window_length,
                                        std::uint64_t* relu_mask_hash = nullptr);

double model_forward_single(const ModelParams& params, const Matrix& window_fxt);

// Exact gradient of the mean batch loss w.r.t. every parameter. Reverse mode
// through the head, both LSTM layers unrolled over time, and the conv stack;
// ReLU uses subgradient 0 at 0.
GradientSet model_backward(const ModelParams& params, std::span<const WindowRef> windows,
                           int window_length, std::span<const double> labels,
                           LossKind kind, double* mean_loss = nullptr);

// Unscaled variant: per-sample gradient sums and summed loss, so callers can
// accumulate across batches and divide once.
void model_backward_sum(const ModelParams& params, std::span<const WindowRef> windows,
                        int window_length, std::span<const double> labels, LossKind kind,
                        GradientSet& grad_accum, double& loss_sum);

// --- optimization ---

enum class OptimizerKind { adam, sgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  OptimizerConfig config;
  std::int64_t step_count = 0;
  ModelParams m;  // first moments (adam only)
  ModelParams v;  // second moments (adam only)

  static OptimizerState create(const OptimizerConfig& config, const ModelArch& arch);
};

void optimizer_step(ModelParams& params, const GradientSet& grads, OptimizerState& state);

// Element-wise mean per layer. Bitwise-identical inputs short-circuit to
// their common value, which is the exact mean and keeps N synchronized
// replicas byte-for-byte equal to a single instance.
GradientSet average_gradients(std::span<const GradientSet> sets);

}  // namespace netsel
