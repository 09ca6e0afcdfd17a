#include "avdelay/optim.hpp"

#include <cmath>
#include <numeric>

#include "avdelay/error.hpp"

namespace avdelay::optim {

Kind parse_kind(const std::string& name) {
  if (name == "adam") return Kind::Adam;
  if (name == "sgd") return Kind::Sgd;
  throw ConfigError("unknown optimizer: " + name);
}

std::string to_string(Kind k) { return k == Kind::Adam ? "adam" : "sgd"; }

void TrainConfig::validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (!(grad_clip_norm > 0.0)) throw ConfigError("grad_clip_norm must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
}

double clip_global_norm(Eigen::Ref<Eigen::VectorXd> grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm) grad *= max_norm / norm;
  return norm;
}

Optimizer::Optimizer(const TrainConfig& cfg, std::size_t n_params) : cfg_(cfg) {
  if (cfg_.optimizer == Kind::Adam) {
    m_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_params));
    v_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_params));
  }
}

void Optimizer::step(Eigen::Ref<Eigen::VectorXd> theta, const Eigen::VectorXd& grad) {
  if (cfg_.optimizer == Kind::Sgd) {
    theta -= cfg_.learning_rate * grad;
    return;
  }
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double lr = cfg_.learning_rate;
  theta.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
}

std::vector<double> train_loop(Eigen::Ref<Eigen::VectorXd> theta, std::size_t n_samples, const TrainConfig& cfg,
                               const BatchFn& batch_fn, const EpochFn& on_epoch) {
  cfg.validate();
  if (n_samples == 0) throw InvalidInput("training set is empty");
  Optimizer opt(cfg, static_cast<std::size_t>(theta.size()));
  Rng order_rng = Rng(cfg.seed).split(1);
  Rng batch_rng = Rng(cfg.seed).split(2);
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n_samples; start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n_samples - start);
      BatchEval eval = batch_fn(std::span<const std::size_t>(order.data() + start, len), batch_rng);
      if (!std::isfinite(eval.loss) || !eval.grad.allFinite()) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1) + ", batch " +
                              std::to_string(batches + 1) + " (loss " + std::to_string(eval.loss) + ")");
      }
      clip_global_norm(eval.grad, cfg.grad_clip_norm);
      opt.step(theta, eval.grad);
      loss_sum += eval.loss;
      ++batches;
    }
    history.push_back(loss_sum / static_cast<double>(batches));
    if (on_epoch) on_epoch(epoch + 1, history.back());
  }
  return history;
}

}  // namespace avdelay::optim
