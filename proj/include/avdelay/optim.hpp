#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "avdelay/parallel.hpp"
#include "avdelay/rng.hpp"

namespace avdelay::optim {

enum class Kind { Sgd, Adam };

Kind parse_kind(const std::string& name);
std::string to_string(Kind k);

struct TrainConfig {
  int epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  Kind optimizer = Kind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip_norm = 5.0;
  std::uint64_t seed = 1;
  double dropout_rate = 0.2;
  Exec exec = Exec::Parallel;

  void validate() const;
};

// Rescales `grad` in place so its L2 norm is at most `max_norm`; returns the
// norm before clipping.
double clip_global_norm(Eigen::Ref<Eigen::VectorXd> grad, double max_norm);

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, std::size_t n_params);
  void step(Eigen::Ref<Eigen::VectorXd> theta, const Eigen::VectorXd& grad);

 private:
  TrainConfig cfg_;
  Eigen::VectorXd m_, v_;
  std::int64_t t_ = 0;
};

struct BatchEval {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Computes the mean loss and its gradient for one minibatch of sample indices.
using BatchFn = std::function<BatchEval(std::span<const std::size_t> batch, Rng& rng)>;

// Called after every epoch with the 1-based epoch number and its mean loss.
using EpochFn = std::function<void(int epoch, double mean_loss)>;

// Minibatch loop shared by the neural models: per-epoch shuffled order,
// global-norm clipping, then an optimizer step. Returns the mean minibatch
// loss of every epoch. Throws DivergenceError on a non-finite loss.
std::vector<double> train_loop(Eigen::Ref<Eigen::VectorXd> theta, std::size_t n_samples, const TrainConfig& cfg,
                               const BatchFn& batch_fn, const EpochFn& on_epoch = {});

}  // namespace avdelay::optim
