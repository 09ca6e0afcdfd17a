#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "avdelay/checkpoint.hpp"
#include "avdelay/optim.hpp"
#include "avdelay/parallel.hpp"
#include "avdelay/rng.hpp"
#include "avdelay/sequencing.hpp"

namespace avdelay::lstm {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

// One LSTM layer. The gate weights are stacked row-wise in the order forget,
// input, candidate, output; each acts on the concatenation [h_{t-1}, x_t],
// so the first `hidden` columns multiply the previous hidden state.
struct LstmLayerParams {
  std::size_t input = 0;
  std::size_t hidden = 0;
  Mat W;  // (4*hidden) x (hidden + input)
  Vec b;  // 4*hidden

  LstmLayerParams() = default;
  LstmLayerParams(std::size_t input, std::size_t hidden);

  auto W_f() const { return W.middleRows(0, static_cast<Eigen::Index>(hidden)); }
  auto W_i() const { return W.middleRows(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(hidden)); }
  auto W_C() const { return W.middleRows(static_cast<Eigen::Index>(2 * hidden), static_cast<Eigen::Index>(hidden)); }
  auto W_o() const { return W.middleRows(static_cast<Eigen::Index>(3 * hidden), static_cast<Eigen::Index>(hidden)); }
  auto b_f() const { return b.segment(0, static_cast<Eigen::Index>(hidden)); }
  auto b_i() const { return b.segment(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(hidden)); }
  auto b_C() const { return b.segment(static_cast<Eigen::Index>(2 * hidden), static_cast<Eigen::Index>(hidden)); }
  auto b_o() const { return b.segment(static_cast<Eigen::Index>(3 * hidden), static_cast<Eigen::Index>(hidden)); }
};

struct CellCache {
  Vec concat;  // [h_prev, x]
  Vec f, i, g, o;
  Vec c_prev, c, tanh_c;
};

struct CellOutput {
  Vec h;
  Vec c;
  CellCache cache;
};

// One step of the cell:
//   f = sigmoid(W_f [h,x] + b_f), i = sigmoid(W_i [h,x] + b_i),
//   g = tanh(W_C [h,x] + b_C),    c' = f*c + i*g,
//   o = sigmoid(W_o [h,x] + b_o), h' = o*tanh(c').
// Throws NumericError naming the offending tensor on non-finite input.
CellOutput lstm_cell_forward(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmLayerParams& p);

struct ModelConfig {
  std::size_t n = 1;  // sequence length
  std::size_t m = 1;  // features per step
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 64;
  double dropout_rate = 0.2;

  void validate() const;
};

// Inverted dropout mask applied to the layer-1 outputs: N x hidden1 entries of
// either 0 or 1/(1-rate).
using DropoutMask = Mat;

DropoutMask sample_mask(const ModelConfig& cfg, Rng& rng);

struct LayerCache {
  Mat Z;        // N x (hidden + input): concatenated [h_{t-1}, x_t]
  Mat gates;    // N x 4*hidden, post-activation f, i, g, o
  Mat c;        // N x hidden
  Mat tanh_c;   // N x hidden
  Mat h;        // N x hidden
};

struct ForwardCache {
  LayerCache l1;
  LayerCache l2;
  Mat l2_input;  // dropped layer-1 outputs
  std::optional<DropoutMask> mask;
  double prediction = 0.0;
};

// Two stacked LSTM layers with dropout in between; the FC head maps the
// concatenation of all N layer-2 outputs to one scalar. All parameters live
// in one flat vector: layer 1 (W, b), layer 2 (W, b), FC weights, FC bias.
class StackedLstm {
 public:
  StackedLstm() = default;
  explicit StackedLstm(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  std::size_t param_count() const { return static_cast<std::size_t>(theta_.size()); }
  Vec& params() { return theta_; }
  const Vec& params() const { return theta_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases except the
  // forget-gate bias, which starts at 1.
  void initialize(std::uint64_t seed);

  LstmLayerParams layer(int k) const;
  void set_layer(int k, const LstmLayerParams& p);
  Eigen::Map<const Vec> fc_weights() const;
  double fc_bias() const { return theta_[theta_.size() - 1]; }

  // Prediction in standardized target units. With a mask the layer-1 outputs
  // are multiplied by it; without one the pass is the inference pass.
  double forward(std::span<const double> sequence, const DropoutMask* mask, ForwardCache* cache = nullptr) const;

  // Convenience overload: samples a mask from `rng` when training.
  double forward(std::span<const double> sequence, bool training, Rng& rng, ForwardCache* cache = nullptr) const;

  // Accumulates d(loss)/d(theta) into `grad` given d(loss)/d(prediction).
  void backward(const ForwardCache& cache, double dpred, Eigen::Ref<Vec> grad) const;

  // Target de-standardization applied by predict().
  double target_mean = 0.0;
  double target_scale = 1.0;

 private:
  std::size_t l1_offset() const { return 0; }
  std::size_t l2_offset() const;
  std::size_t fc_offset() const;

  ModelConfig cfg_;
  Vec theta_;
};

double mse_loss(std::span<const double> pred, std::span<const double> truth);

struct BatchResult {
  double loss = 0.0;
  Vec grad;
};

// Mean squared error over the batch (targets already standardized) and its
// exact gradient. `masks` is empty for a dropout-free pass, otherwise one mask
// per sample. Serial and Parallel produce identical bits.
BatchResult batch_loss_gradient(const StackedLstm& model, const seq::SequenceDataset& ds,
                                std::span<const std::size_t> batch, std::span<const double> targets,
                                std::span<const DropoutMask> masks, Exec exec);

struct TrainResult {
  std::vector<double> epoch_loss;
};

// Fits target standardization from the training targets, then runs minibatch
// BPTT. The model must already be initialized.
TrainResult train(StackedLstm& model, const seq::SequenceDataset& train_ds, const optim::TrainConfig& cfg,
                  const optim::EpochFn& on_epoch = {});

// Inference predictions in minutes. Throws InvalidInput on an N/M mismatch.
std::vector<double> predict(const StackedLstm& model, const seq::SequenceDataset& ds, Exec exec = Exec::Parallel);

Checkpoint to_checkpoint(const StackedLstm& model);
StackedLstm from_checkpoint(const Checkpoint& ck);

}  // namespace avdelay::lstm
