#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "avdelay/baselines.hpp"
#include "avdelay/lstm.hpp"
#include "oracles/finite_diff.hpp"
#include "oracles/lstm_reference.hpp"
#include "support/generators.hpp"

// Checks shared by the unit suite and the acceptance binary.
namespace checks {

// Central differences at h = 1e-5 carry ~1e-11 of roundoff, so coordinates
// whose gradient is below this magnitude are judged on absolute scale.
constexpr double kGradFloor = 1e-5;

using avdelay::lstm::LstmLayerParams;
using avdelay::lstm::StackedLstm;
using avdelay::seq::SequenceDataset;

inline SequenceDataset random_dataset(std::size_t s, std::size_t n, std::size_t m, gen::Engine& e) {
  SequenceDataset ds;
  ds.n = n;
  ds.m = m;
  for (std::size_t k = 0; k < s * n * m; ++k) ds.x.push_back(gen::uniform(e, -1.5, 1.5));
  for (std::size_t k = 0; k < s; ++k) {
    ds.y.push_back(gen::uniform(e, -2, 2));
    ds.last_ts.push_back(static_cast<std::int64_t>(k));
  }
  return ds;
}

// Initialized model with every parameter nudged so no coordinate sits at an
// exact zero.
inline StackedLstm random_lstm(std::size_t n, std::size_t m, std::size_t hidden, double dropout, gen::Engine& e) {
  StackedLstm model({n, m, hidden, hidden, dropout});
  model.initialize(e());
  for (auto& v : model.params()) v += gen::uniform(e, -0.3, 0.3);
  return model;
}

inline oracle::CellWeights to_oracle(const LstmLayerParams& p) {
  auto gate = [](const auto& w, const auto& b) {
    oracle::Gate g;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) g.w.push_back(w(r, c));
    for (Eigen::Index r = 0; r < b.size(); ++r) g.b.push_back(b[r]);
    return g;
  };
  return {p.input, p.hidden, gate(p.W_f(), p.b_f()), gate(p.W_i(), p.b_i()), gate(p.W_C(), p.b_C()),
          gate(p.W_o(), p.b_o())};
}

inline double oracle_forward(const StackedLstm& model, std::span<const double> seq,
                             const avdelay::lstm::DropoutMask* mask = nullptr) {
  const auto& c = model.config();
  std::vector<double> fc_w(model.fc_weights().begin(), model.fc_weights().end());
  std::vector<double> flat_mask;
  if (mask) flat_mask.assign(mask->data(), mask->data() + mask->size());
  return oracle::stacked_forward(to_oracle(model.layer(1)), to_oracle(model.layer(2)), fc_w, model.fc_bias(),
                                 std::vector<double>(seq.begin(), seq.end()), c.n, c.m,
                                 mask ? &flat_mask : nullptr);
}

// Max relative error between backprop and central differences over every
// LSTM parameter for one batch of two sequences.
inline double lstm_gradient_error(gen::Engine& e, bool with_dropout) {
  const std::size_t n = 5, m = 3;
  auto model = random_lstm(n, m, 4, with_dropout ? 0.3 : 0.0, e);
  const auto ds = random_dataset(2, n, m, e);
  const std::vector<std::size_t> batch{0, 1};
  std::vector<avdelay::lstm::DropoutMask> masks;
  if (with_dropout) {
    avdelay::Rng rng(e());
    for (int k = 0; k < 2; ++k) masks.push_back(avdelay::lstm::sample_mask(model.config(), rng));
  }
  const auto analytic =
      avdelay::lstm::batch_loss_gradient(model, ds, batch, ds.y, masks, avdelay::Exec::Serial).grad;
  auto loss = [&](const std::vector<double>& theta) {
    StackedLstm probe = model;
    probe.params() = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    return avdelay::lstm::batch_loss_gradient(probe, ds, batch, ds.y, masks, avdelay::Exec::Serial).loss;
  };
  const auto numeric =
      oracle::central_gradient(loss, std::vector<double>(model.params().begin(), model.params().end()), 1e-5);
  double worst = 0.0;
  for (std::size_t k = 0; k < numeric.size(); ++k)
    worst = std::max(worst, oracle::relative_error(analytic[static_cast<Eigen::Index>(k)], numeric[k], kGradFloor));
  return worst;
}

inline double mlp_gradient_error(gen::Engine& e) {
  using avdelay::baselines::Mat;
  avdelay::baselines::Mlp mlp({15, 4});
  mlp.initialize(e());
  for (auto& v : mlp.params()) v += gen::uniform(e, -0.3, 0.3);
  Mat x(2, 15);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = gen::uniform(e, -1.5, 1.5);
  const std::vector<double> y{gen::uniform(e, -2, 2), gen::uniform(e, -2, 2)};
  Eigen::VectorXd analytic;
  mlp.loss_gradient(x, y, &analytic);
  auto loss = [&](const std::vector<double>& theta) {
    auto probe = mlp;
    probe.params() = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    return probe.loss_gradient(x, y, nullptr);
  };
  const auto numeric =
      oracle::central_gradient(loss, std::vector<double>(mlp.params().begin(), mlp.params().end()), 1e-5);
  double worst = 0.0;
  for (std::size_t k = 0; k < numeric.size(); ++k)
    worst = std::max(worst, oracle::relative_error(analytic[static_cast<Eigen::Index>(k)], numeric[k], kGradFloor));
  return worst;
}

// Worst absolute gap between the library cell and the straight-line oracle
// over `cells` random cells (h and c both compared).
inline double cell_oracle_gap(gen::Engine& e, int cells) {
  double worst = 0.0;
  for (int k = 0; k < cells; ++k) {
    const auto input = static_cast<std::size_t>(gen::integer(e, 1, 6));
    const auto hidden = static_cast<std::size_t>(gen::integer(e, 1, 6));
    LstmLayerParams p(input, hidden);
    for (Eigen::Index i = 0; i < p.W.size(); ++i) p.W.data()[i] = gen::uniform(e, -2, 2);
    for (Eigen::Index i = 0; i < p.b.size(); ++i) p.b[i] = gen::uniform(e, -2, 2);
    Eigen::VectorXd x(input), h(hidden), c(hidden);
    for (auto& v : x) v = gen::uniform(e, -3, 3);
    for (auto& v : h) v = gen::uniform(e, -1, 1);
    for (auto& v : c) v = gen::uniform(e, -3, 3);
    const auto got = avdelay::lstm::lstm_cell_forward(x, h, c, p);
    const auto want = oracle::cell(to_oracle(p), std::vector<double>(x.begin(), x.end()),
                                   {std::vector<double>(h.begin(), h.end()), std::vector<double>(c.begin(), c.end())});
    for (std::size_t r = 0; r < hidden; ++r) {
      worst = std::max(worst, std::abs(got.h[static_cast<Eigen::Index>(r)] - want.h[r]));
      worst = std::max(worst, std::abs(got.c[static_cast<Eigen::Index>(r)] - want.c[r]));
    }
  }
  return worst;
}

struct OverfitResult {
  double mse_over_var = 0.0;
  int epochs_used = 0;
};

// Trains a dropout-free stack on 32 sequences whose target is a smooth
// function of the inputs; records the first epoch whose train MSE is below
// 1% of var(y).
inline OverfitResult overfit_run(std::uint64_t seed, int max_epochs = 500) {
  gen::Engine e(seed);
  const std::size_t n = 5, m = 3;
  auto ds = random_dataset(32, n, m, e);
  for (std::size_t s = 0; s < ds.size(); ++s) {
    const auto q = ds.sequence(s);
    ds.y[s] = 10.0 * std::sin(q[0] + q[n * m - 1]) + 5.0 * q[7];
  }
  double mean = 0.0, var = 0.0;
  for (double y : ds.y) mean += y / 32.0;
  for (double y : ds.y) var += (y - mean) * (y - mean) / 32.0;

  StackedLstm model({n, m, 16, 16, 0.0});
  model.initialize(seed);
  avdelay::optim::TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  cfg.dropout_rate = 0.0;
  cfg.seed = seed;
  cfg.exec = avdelay::Exec::Serial;
  cfg.epochs = max_epochs;
  OverfitResult out{1e300, 0};
  avdelay::lstm::train(model, ds, cfg, [&](int epoch, double) {
    if (out.mse_over_var < 0.01) return;
    const auto pred = avdelay::lstm::predict(model, ds, avdelay::Exec::Serial);
    out.mse_over_var = avdelay::lstm::mse_loss(pred, ds.y) / var;
    out.epochs_used = epoch;
  });
  return out;
}

}  // namespace checks
