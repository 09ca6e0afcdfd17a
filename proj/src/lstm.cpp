#include "avdelay/lstm.hpp"

#include <cmath>

#include "avdelay/error.hpp"

namespace avdelay::lstm {
namespace {

using Index = Eigen::Index;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

std::size_t layer_size(std::size_t input, std::size_t hidden) { return 4 * hidden * (hidden + input) + 4 * hidden; }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require_finite(const Vec& v, const char* name) {
  if (!v.allFinite()) throw NumericError(std::string("non-finite values in ") + name);
}

// Views of one layer's weights and bias inside a flat parameter block.
struct LayerView {
  ConstMatMap W;
  Eigen::Map<const Vec> b;
  std::size_t input, hidden;

  LayerView(const double* p, std::size_t input, std::size_t hidden)
      : W(p, static_cast<Index>(4 * hidden), static_cast<Index>(hidden + input)),
        b(p + 4 * hidden * (hidden + input), static_cast<Index>(4 * hidden)),
        input(input),
        hidden(hidden) {}
};

void layer_forward(const LayerView& p, const Mat& X, LayerCache& out) {
  const auto H = static_cast<Index>(p.hidden);
  const auto N = X.rows();
  const auto Wh = p.W.leftCols(H);
  const auto Wx = p.W.rightCols(static_cast<Index>(p.input));
  // Input contribution for every step in one product.
  Mat A = X * Wx.transpose();
  A.rowwise() += p.b.transpose();
  out.Z.resize(N, H + X.cols());
  out.Z.rightCols(X.cols()) = X;
  out.gates.resize(N, 4 * H);
  out.c.resize(N, H);
  out.tanh_c.resize(N, H);
  out.h.resize(N, H);
  Vec h = Vec::Zero(H), c = Vec::Zero(H);
  for (Index t = 0; t < N; ++t) {
    out.Z.row(t).head(H) = h.transpose();
    Vec a = A.row(t).transpose() + Wh * h;
    auto g = out.gates.row(t);
    for (Index j = 0; j < H; ++j) {
      g(j) = sigmoid(a(j));
      g(H + j) = sigmoid(a(H + j));
      g(2 * H + j) = std::tanh(a(2 * H + j));
      g(3 * H + j) = sigmoid(a(3 * H + j));
    }
    for (Index j = 0; j < H; ++j) {
      c(j) = g(j) * c(j) + g(H + j) * g(2 * H + j);
      const double tc = std::tanh(c(j));
      out.c(t, j) = c(j);
      out.tanh_c(t, j) = tc;
      h(j) = g(3 * H + j) * tc;
    }
    out.h.row(t) = h.transpose();
  }
}

// BPTT through one layer. dH holds d(loss)/d(h_t) from above; the parameter
// gradient is accumulated into `grad` (same layout as the layer block) and
// d(loss)/d(x_t) is returned.
Mat layer_backward(const LayerView& p, const LayerCache& cache, const Mat& dH, double* grad) {
  const auto H = static_cast<Index>(p.hidden);
  const auto N = cache.h.rows();
  const auto Wh = p.W.leftCols(H);
  Mat dA(N, 4 * H);
  Vec dh_next = Vec::Zero(H), dc_next = Vec::Zero(H);
  for (Index t = N - 1; t >= 0; --t) {
    const auto g = cache.gates.row(t);
    for (Index j = 0; j < H; ++j) {
      const double f = g(j), i = g(H + j), gg = g(2 * H + j), o = g(3 * H + j);
      const double tc = cache.tanh_c(t, j);
      const double c_prev = t > 0 ? cache.c(t - 1, j) : 0.0;
      const double dh = dH(t, j) + dh_next(j);
      const double dc = dc_next(j) + dh * o * (1.0 - tc * tc);
      dA(t, j) = dc * c_prev * f * (1.0 - f);
      dA(t, H + j) = dc * gg * i * (1.0 - i);
      dA(t, 2 * H + j) = dc * i * (1.0 - gg * gg);
      dA(t, 3 * H + j) = dh * tc * o * (1.0 - o);
      dc_next(j) = dc * f;
    }
    dh_next.noalias() = Wh.transpose() * dA.row(t).transpose();
  }
  MatMap dW(grad, 4 * H, static_cast<Index>(p.hidden + p.input));
  Eigen::Map<Vec> db(grad + 4 * p.hidden * (p.hidden + p.input), 4 * H);
  dW.noalias() += dA.transpose() * cache.Z;
  db += dA.colwise().sum().transpose();
  return dA * p.W.rightCols(static_cast<Index>(p.input));
}

}  // namespace

LstmLayerParams::LstmLayerParams(std::size_t input, std::size_t hidden)
    : input(input),
      hidden(hidden),
      W(Mat::Zero(static_cast<Index>(4 * hidden), static_cast<Index>(hidden + input))),
      b(Vec::Zero(static_cast<Index>(4 * hidden))) {}

CellOutput lstm_cell_forward(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmLayerParams& p) {
  const auto H = static_cast<Index>(p.hidden);
  if (x.size() != static_cast<Index>(p.input) || h_prev.size() != H || c_prev.size() != H ||
      p.W.rows() != 4 * H || p.W.cols() != H + static_cast<Index>(p.input) || p.b.size() != 4 * H) {
    throw InvalidInput("lstm_cell_forward: inconsistent shapes");
  }
  require_finite(x, "x_t");
  require_finite(h_prev, "h_prev");
  require_finite(c_prev, "c_prev");
  if (!p.W.allFinite()) throw NumericError("non-finite values in W");
  require_finite(p.b, "b");

  CellOutput out;
  auto& k = out.cache;
  k.concat.resize(H + x.size());
  k.concat << h_prev, x;
  const Vec a = p.W * k.concat + p.b;
  k.f = a.segment(0, H).unaryExpr([](double z) { return sigmoid(z); });
  k.i = a.segment(H, H).unaryExpr([](double z) { return sigmoid(z); });
  k.g = a.segment(2 * H, H).array().tanh();
  k.o = a.segment(3 * H, H).unaryExpr([](double z) { return sigmoid(z); });
  k.c_prev = c_prev;
  k.c = k.f.cwiseProduct(c_prev) + k.i.cwiseProduct(k.g);
  k.tanh_c = k.c.array().tanh();
  out.c = k.c;
  out.h = k.o.cwiseProduct(k.tanh_c);
  return out;
}

void ModelConfig::validate() const {
  if (n == 0 || m == 0) throw ConfigError("sequence length and feature count must be positive");
  if (hidden1 == 0 || hidden2 == 0) throw ConfigError("hidden sizes must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
}

DropoutMask sample_mask(const ModelConfig& cfg, Rng& rng) {
  DropoutMask mask(static_cast<Index>(cfg.n), static_cast<Index>(cfg.hidden1));
  const double keep = 1.0 - cfg.dropout_rate;
  for (Index r = 0; r < mask.rows(); ++r) {
    for (Index c = 0; c < mask.cols(); ++c) mask(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  }
  return mask;
}

StackedLstm::StackedLstm(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t total = layer_size(cfg_.m, cfg_.hidden1) + layer_size(cfg_.hidden1, cfg_.hidden2) +
                            cfg_.n * cfg_.hidden2 + 1;
  theta_ = Vec::Zero(static_cast<Index>(total));
}

std::size_t StackedLstm::l2_offset() const { return layer_size(cfg_.m, cfg_.hidden1); }
std::size_t StackedLstm::fc_offset() const { return l2_offset() + layer_size(cfg_.hidden1, cfg_.hidden2); }

void StackedLstm::initialize(std::uint64_t seed) {
  Rng rng = Rng(seed).split(0);
  auto init_layer = [&](std::size_t off, std::size_t input, std::size_t hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden + input));
    const std::size_t nw = 4 * hidden * (hidden + input);
    for (std::size_t k = 0; k < nw; ++k) theta_[static_cast<Index>(off + k)] = rng.uniform(-bound, bound);
    for (std::size_t k = 0; k < 4 * hidden; ++k) theta_[static_cast<Index>(off + nw + k)] = k < hidden ? 1.0 : 0.0;
  };
  init_layer(l1_offset(), cfg_.m, cfg_.hidden1);
  init_layer(l2_offset(), cfg_.hidden1, cfg_.hidden2);
  const std::size_t fan = cfg_.n * cfg_.hidden2;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan));
  for (std::size_t k = 0; k < fan; ++k) theta_[static_cast<Index>(fc_offset() + k)] = rng.uniform(-bound, bound);
  theta_[theta_.size() - 1] = 0.0;
}

LstmLayerParams StackedLstm::layer(int k) const {
  if (k != 1 && k != 2) throw InvalidInput("layer index must be 1 or 2");
  const std::size_t input = k == 1 ? cfg_.m : cfg_.hidden1;
  const std::size_t hidden = k == 1 ? cfg_.hidden1 : cfg_.hidden2;
  const LayerView v(theta_.data() + (k == 1 ? l1_offset() : l2_offset()), input, hidden);
  LstmLayerParams p(input, hidden);
  p.W = v.W;
  p.b = v.b;
  return p;
}

void StackedLstm::set_layer(int k, const LstmLayerParams& p) {
  if (k != 1 && k != 2) throw InvalidInput("layer index must be 1 or 2");
  const std::size_t input = k == 1 ? cfg_.m : cfg_.hidden1;
  const std::size_t hidden = k == 1 ? cfg_.hidden1 : cfg_.hidden2;
  if (p.input != input || p.hidden != hidden || p.W.rows() != static_cast<Index>(4 * hidden) ||
      p.W.cols() != static_cast<Index>(hidden + input) || p.b.size() != static_cast<Index>(4 * hidden)) {
    throw InvalidInput("layer shape does not match the model");
  }
  double* base = theta_.data() + (k == 1 ? l1_offset() : l2_offset());
  MatMap(base, p.W.rows(), p.W.cols()) = p.W;
  Eigen::Map<Vec>(base + p.W.size(), p.b.size()) = p.b;
}

Eigen::Map<const Vec> StackedLstm::fc_weights() const {
  return {theta_.data() + fc_offset(), static_cast<Index>(cfg_.n * cfg_.hidden2)};
}

double StackedLstm::forward(std::span<const double> sequence, const DropoutMask* mask, ForwardCache* cache) const {
  const auto N = static_cast<Index>(cfg_.n), M = static_cast<Index>(cfg_.m);
  if (sequence.size() != cfg_.n * cfg_.m) throw InvalidInput("sequence shape does not match the model");
  if (theta_.size() == 0) throw StateError("model has no parameters");
  const ConstMatMap X(sequence.data(), N, M);
  if (!X.allFinite()) throw NumericError("non-finite values in input sequence");
  if (mask && (mask->rows() != N || mask->cols() != static_cast<Index>(cfg_.hidden1))) {
    throw InvalidInput("dropout mask shape does not match the model");
  }

  ForwardCache local;
  ForwardCache& k = cache ? *cache : local;
  const LayerView p1(theta_.data() + l1_offset(), cfg_.m, cfg_.hidden1);
  const LayerView p2(theta_.data() + l2_offset(), cfg_.hidden1, cfg_.hidden2);
  layer_forward(p1, X, k.l1);
  if (mask) {
    k.l2_input = k.l1.h.cwiseProduct(*mask);
    k.mask = *mask;
  } else {
    k.l2_input = k.l1.h;
    k.mask.reset();
  }
  layer_forward(p2, k.l2_input, k.l2);
  const Eigen::Map<const Vec> flat(k.l2.h.data(), k.l2.h.size());
  k.prediction = fc_weights().dot(flat) + fc_bias();
  return k.prediction;
}

double StackedLstm::forward(std::span<const double> sequence, bool training, Rng& rng, ForwardCache* cache) const {
  if (training && cfg_.dropout_rate > 0.0) {
    const DropoutMask mask = sample_mask(cfg_, rng);
    return forward(sequence, &mask, cache);
  }
  return forward(sequence, nullptr, cache);
}

void StackedLstm::backward(const ForwardCache& cache, double dpred, Eigen::Ref<Vec> grad) const {
  if (cache.l2.h.size() == 0 || cache.l1.h.size() == 0) throw StateError("backward called without a forward cache");
  if (grad.size() != theta_.size()) throw InvalidInput("gradient buffer has the wrong size");
  const auto N = static_cast<Index>(cfg_.n);
  const auto H2 = static_cast<Index>(cfg_.hidden2);

  // FC head
  const Eigen::Map<const Vec> flat(cache.l2.h.data(), cache.l2.h.size());
  grad.segment(static_cast<Index>(fc_offset()), N * H2) += dpred * flat;
  grad[grad.size() - 1] += dpred;
  Mat dH2(N, H2);
  Eigen::Map<Vec>(dH2.data(), dH2.size()) = dpred * fc_weights();

  const LayerView p1(theta_.data() + l1_offset(), cfg_.m, cfg_.hidden1);
  const LayerView p2(theta_.data() + l2_offset(), cfg_.hidden1, cfg_.hidden2);
  Mat dH1 = layer_backward(p2, cache.l2, dH2, grad.data() + l2_offset());
  if (cache.mask) dH1 = dH1.cwiseProduct(*cache.mask);
  layer_backward(p1, cache.l1, dH1, grad.data() + l1_offset());
}

double mse_loss(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty()) throw InvalidInput("mse_loss: empty input");
  if (pred.size() != truth.size()) throw InvalidInput("mse_loss: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - truth[k];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

BatchResult batch_loss_gradient(const StackedLstm& model, const seq::SequenceDataset& ds,
                                std::span<const std::size_t> batch, std::span<const double> targets,
                                std::span<const DropoutMask> masks, Exec exec) {
  if (batch.empty()) throw InvalidInput("empty batch");
  if (!masks.empty() && masks.size() != batch.size()) throw InvalidInput("one dropout mask per sample required");
  const auto P = static_cast<Index>(model.param_count());
  const auto B = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<Vec> grads(batch.size());
  std::vector<double> sq(batch.size());
  const double scale = 2.0 / static_cast<double>(batch.size());
  auto work = [&](std::ptrdiff_t s) {
    const std::size_t idx = batch[static_cast<std::size_t>(s)];
    ForwardCache cache;
    const DropoutMask* mask = masks.empty() ? nullptr : &masks[static_cast<std::size_t>(s)];
    const double pred = model.forward(ds.sequence(idx), mask, &cache);
    const double err = pred - targets[idx];
    sq[static_cast<std::size_t>(s)] = err * err;
    grads[static_cast<std::size_t>(s)] = Vec::Zero(P);
    model.backward(cache, scale * err, grads[static_cast<std::size_t>(s)]);
  };
  if (exec == Exec::Parallel) {
    // Exceptions cannot cross the OpenMP region; capture the first one.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t s = 0; s < B; ++s) {
      try {
        work(s);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t s = 0; s < B; ++s) work(s);
  }
  BatchResult out;
  out.grad = Vec::Zero(P);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    out.loss += sq[s];
    out.grad += grads[s];
  }
  out.loss /= static_cast<double>(batch.size());
  return out;
}

TrainResult train(StackedLstm& model, const seq::SequenceDataset& train_ds, const optim::TrainConfig& cfg,
                  const optim::EpochFn& on_epoch) {
  cfg.validate();
  const auto& mc = model.config();
  if (train_ds.n != mc.n || train_ds.m != mc.m) throw InvalidInput("dataset shape does not match the model");
  if (train_ds.size() == 0) throw InvalidInput("training set is empty");
  if (model.param_count() == 0) throw StateError("model is not initialized");

  double mean = 0.0;
  for (double v : train_ds.y) mean += v;
  mean /= static_cast<double>(train_ds.size());
  double var = 0.0;
  for (double v : train_ds.y) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(train_ds.size()));
  model.target_mean = mean;
  model.target_scale = sd > 1e-12 ? sd : 1.0;
  std::vector<double> targets(train_ds.size());
  for (std::size_t k = 0; k < targets.size(); ++k) targets[k] = (train_ds.y[k] - mean) / model.target_scale;

  const bool use_dropout = mc.dropout_rate > 0.0;
  auto batch_fn = [&](std::span<const std::size_t> batch, Rng& rng) {
    std::vector<DropoutMask> masks;
    if (use_dropout) {
      masks.reserve(batch.size());
      for (std::size_t s = 0; s < batch.size(); ++s) masks.push_back(sample_mask(mc, rng));
    }
    BatchResult r = batch_loss_gradient(model, train_ds, batch, targets, masks, cfg.exec);
    return optim::BatchEval{r.loss, std::move(r.grad)};
  };
  TrainResult out;
  out.epoch_loss = optim::train_loop(model.params(), train_ds.size(), cfg, batch_fn, on_epoch);
  return out;
}

std::vector<double> predict(const StackedLstm& model, const seq::SequenceDataset& ds, Exec exec) {
  if (ds.n != model.config().n || ds.m != model.config().m) {
    throw InvalidInput("dataset shape (N=" + std::to_string(ds.n) + ", M=" + std::to_string(ds.m) +
                       ") does not match the model (N=" + std::to_string(model.config().n) +
                       ", M=" + std::to_string(model.config().m) + ")");
  }
  std::vector<double> out(ds.size());
  const auto S = static_cast<std::ptrdiff_t>(ds.size());
  auto work = [&](std::ptrdiff_t s) {
    const double z = model.forward(ds.sequence(static_cast<std::size_t>(s)), nullptr, nullptr);
    out[static_cast<std::size_t>(s)] = z * model.target_scale + model.target_mean;
  };
  if (exec == Exec::Parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < S; ++s) {
      try {
        work(s);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t s = 0; s < S; ++s) work(s);
  }
  return out;
}

Checkpoint to_checkpoint(const StackedLstm& model) {
  const auto& c = model.config();
  Checkpoint ck;
  ck.kind = "lstm";
  ck.params.assign(model.params().data(), model.params().data() + model.params().size());
  ck.config = {{"n", c.n},
               {"m", c.m},
               {"hidden1", c.hidden1},
               {"hidden2", c.hidden2},
               {"dropout_rate", c.dropout_rate},
               {"target_mean", model.target_mean},
               {"target_scale", model.target_scale}};
  return ck;
}

StackedLstm from_checkpoint(const Checkpoint& ck) {
  if (ck.kind != "lstm") throw SchemaError("checkpoint holds a '" + ck.kind + "' model, not an lstm");
  ModelConfig c;
  c.n = ck.config.at("n").get<std::size_t>();
  c.m = ck.config.at("m").get<std::size_t>();
  c.hidden1 = ck.config.at("hidden1").get<std::size_t>();
  c.hidden2 = ck.config.at("hidden2").get<std::size_t>();
  c.dropout_rate = ck.config.at("dropout_rate").get<double>();
  StackedLstm model(c);
  if (ck.params.size() != model.param_count()) throw SchemaError("checkpoint parameter count does not match its config");
  model.params() = Eigen::Map<const Vec>(ck.params.data(), static_cast<Index>(ck.params.size()));
  model.target_mean = ck.config.at("target_mean").get<double>();
  model.target_scale = ck.config.at("target_scale").get<double>();
  return model;
}

}  // namespace avdelay::lstm
