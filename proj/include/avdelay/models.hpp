#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avdelay/baselines.hpp"
#include "avdelay/checkpoint.hpp"
#include "avdelay/lstm.hpp"
#include "avdelay/sequencing.hpp"

// Uniform fit/predict over every model kind, keyed by checkpoint.
namespace avdelay::models {

enum class Kind { LR, RT, RF, MLP, LSTM };

Kind parse_kind(const std::string& name);  // case-insensitive
std::string to_string(Kind k);
std::string method_family(Kind k);  // Linear, Non-linear, Ensemble, Neural Network
bool is_stochastic(Kind k);         // depends on the seed

struct ModelParams {
  double ridge_lambda = 1e-8;
  baselines::TreeConfig tree{8, 5, 0};
  baselines::ForestConfig forest{};
  std::size_t mlp_hidden = 64;
  optim::TrainConfig mlp_train{};
  std::size_t lstm_hidden1 = 64;
  std::size_t lstm_hidden2 = 64;
  optim::TrainConfig lstm_train{};  // its dropout_rate is the model's
};

ModelParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelParams& p);
optim::TrainConfig train_config_from_json(const nlohmann::json& j, optim::TrainConfig base = {});
nlohmann::json to_json(const optim::TrainConfig& c);

// Row-major (S, N*M) view of the flattened windows.
Eigen::Map<const baselines::Mat> flattened(const seq::SequenceDataset& ds);

// Trains `kind` on the dataset. The seed drives initialization, data order,
// dropout and bagging. The checkpoint records the window shape.
Checkpoint fit(Kind kind, const seq::SequenceDataset& train, const ModelParams& params, std::uint64_t seed,
               Exec exec = Exec::Parallel, std::vector<double>* loss_history = nullptr);

// Predictions in minutes. Throws InvalidInput when the dataset's N or M
// differs from the checkpoint.
std::vector<double> predict(const Checkpoint& ck, const seq::SequenceDataset& ds, Exec exec = Exec::Parallel);

}  // namespace avdelay::models
