#include "avdelay/models.hpp"

#include <algorithm>
#include <cctype>

#include "avdelay/error.hpp"
#include "avdelay/json_keys.hpp"

namespace avdelay::models {

Kind parse_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "LR") return Kind::LR;
  if (s == "RT") return Kind::RT;
  if (s == "RF") return Kind::RF;
  if (s == "MLP") return Kind::MLP;
  if (s == "LSTM") return Kind::LSTM;
  throw ConfigError("unknown model kind: " + name + " (expected LR, RT, RF, MLP or LSTM)");
}

std::string to_string(Kind k) {
  switch (k) {
    case Kind::LR: return "LR";
    case Kind::RT: return "RT";
    case Kind::RF: return "RF";
    case Kind::MLP: return "MLP";
    case Kind::LSTM: return "LSTM";
  }
  return "?";
}

std::string method_family(Kind k) {
  switch (k) {
    case Kind::LR: return "Linear";
    case Kind::RT: return "Non-linear";
    case Kind::RF: return "Ensemble";
    default: return "Neural Network";
  }
}

bool is_stochastic(Kind k) { return k == Kind::RF || k == Kind::MLP || k == Kind::LSTM; }

optim::TrainConfig train_config_from_json(const nlohmann::json& j, optim::TrainConfig c) {
  if (j.is_null()) return c;
  // hidden sizes belong to the model sections that embed a training config
  require_known_keys(j,
                     {"epochs", "batch_size", "learning_rate", "optimizer", "beta1", "beta2", "epsilon",
                      "grad_clip_norm", "seed", "dropout_rate", "hidden", "hidden1", "hidden2"},
                     "training config");
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (j.contains("optimizer")) c.optimizer = optim::parse_kind(j["optimizer"].get<std::string>());
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
    c.seed = j.value("seed", c.seed);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad training config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const optim::TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"optimizer", optim::to_string(c.optimizer)},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"grad_clip_norm", c.grad_clip_norm},
          {"seed", c.seed},
          {"dropout_rate", c.dropout_rate}};
}

ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  if (j.is_null()) return p;
  require_known_keys(j, {"ridge_lambda", "tree", "forest", "mlp", "lstm"}, "model config");
  try {
    p.ridge_lambda = j.value("ridge_lambda", p.ridge_lambda);
    if (j.contains("tree")) {
      require_known_keys(j["tree"], {"max_depth", "min_leaf"}, "tree config");
      p.tree.max_depth = j["tree"].value("max_depth", p.tree.max_depth);
      p.tree.min_leaf = j["tree"].value("min_leaf", p.tree.min_leaf);
    }
    if (j.contains("forest")) {
      const auto& f = j["forest"];
      require_known_keys(f, {"n_trees", "max_depth", "min_leaf", "mtry", "bootstrap"}, "forest config");
      p.forest.n_trees = f.value("n_trees", p.forest.n_trees);
      p.forest.tree.max_depth = f.value("max_depth", p.forest.tree.max_depth);
      p.forest.tree.min_leaf = f.value("min_leaf", p.forest.tree.min_leaf);
      p.forest.tree.mtry = f.value("mtry", p.forest.tree.mtry);
      p.forest.bootstrap = f.value("bootstrap", p.forest.bootstrap);
    }
    if (j.contains("mlp")) {
      p.mlp_hidden = j["mlp"].value("hidden", p.mlp_hidden);
      p.mlp_train = train_config_from_json(j["mlp"], p.mlp_train);
    }
    if (j.contains("lstm")) {
      p.lstm_hidden1 = j["lstm"].value("hidden1", p.lstm_hidden1);
      p.lstm_hidden2 = j["lstm"].value("hidden2", p.lstm_hidden2);
      p.lstm_train = train_config_from_json(j["lstm"], p.lstm_train);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model config: ") + e.what());
  }
  if (!(p.ridge_lambda >= 0.0)) throw ConfigError("ridge_lambda must be nonnegative");
  return p;
}

nlohmann::json to_json(const ModelParams& p) {
  auto mlp = to_json(p.mlp_train);
  mlp["hidden"] = p.mlp_hidden;
  auto lstm = to_json(p.lstm_train);
  lstm["hidden1"] = p.lstm_hidden1;
  lstm["hidden2"] = p.lstm_hidden2;
  return {{"ridge_lambda", p.ridge_lambda},
          {"tree", {{"max_depth", p.tree.max_depth}, {"min_leaf", p.tree.min_leaf}}},
          {"forest",
           {{"n_trees", p.forest.n_trees},
            {"max_depth", p.forest.tree.max_depth},
            {"min_leaf", p.forest.tree.min_leaf},
            {"mtry", p.forest.tree.mtry},
            {"bootstrap", p.forest.bootstrap}}},
          {"mlp", mlp},
          {"lstm", lstm}};
}

Eigen::Map<const baselines::Mat> flattened(const seq::SequenceDataset& ds) {
  return {ds.x.data(), static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.n * ds.m)};
}

Checkpoint fit(Kind kind, const seq::SequenceDataset& train, const ModelParams& params, std::uint64_t seed, Exec exec,
               std::vector<double>* loss_history) {
  if (train.size() == 0) throw InvalidInput("training set is empty");
  const auto x = flattened(train);
  Checkpoint ck;
  switch (kind) {
    case Kind::LR:
      ck = baselines::to_checkpoint(baselines::linreg_fit(x, train.y, params.ridge_lambda));
      break;
    case Kind::RT:
      ck = baselines::to_checkpoint(baselines::tree_fit(x, train.y, params.tree));
      break;
    case Kind::RF: {
      auto fc = params.forest;
      fc.seed = seed;
      ck = baselines::to_checkpoint(baselines::forest_fit(x, train.y, fc, exec));
      break;
    }
    case Kind::MLP: {
      baselines::Mlp m({train.n * train.m, params.mlp_hidden});
      m.initialize(seed);
      auto tc = params.mlp_train;
      tc.seed = seed;
      tc.exec = exec;
      auto hist = baselines::mlp_fit(m, x, train.y, tc);
      if (loss_history) *loss_history = std::move(hist);
      ck = baselines::to_checkpoint(m);
      break;
    }
    case Kind::LSTM: {
      lstm::ModelConfig mc{train.n, train.m, params.lstm_hidden1, params.lstm_hidden2, params.lstm_train.dropout_rate};
      lstm::StackedLstm m(mc);
      m.initialize(seed);
      auto tc = params.lstm_train;
      tc.seed = seed;
      tc.exec = exec;
      auto r = lstm::train(m, train, tc);
      if (loss_history) *loss_history = std::move(r.epoch_loss);
      ck = lstm::to_checkpoint(m);
      break;
    }
  }
  ck.config["n"] = train.n;
  ck.config["m"] = train.m;
  ck.config["seed"] = seed;
  ck.config["standardization"] = {{"mean", train.standardization.mean}, {"scale", train.standardization.scale}};
  return ck;
}

std::vector<double> predict(const Checkpoint& ck, const seq::SequenceDataset& ds, Exec exec) {
  const auto n = ck.config.at("n").get<std::size_t>();
  const auto m = ck.config.at("m").get<std::size_t>();
  if (ds.n != n || ds.m != m) {
    throw InvalidInput("dataset shape (N=" + std::to_string(ds.n) + ", M=" + std::to_string(ds.m) +
                       ") does not match the model (N=" + std::to_string(n) + ", M=" + std::to_string(m) + ")");
  }
  if (ds.size() == 0) return {};
  const auto x = flattened(ds);
  if (ck.kind == "lr") return baselines::linear_from_checkpoint(ck).predict(x);
  if (ck.kind == "rt") return baselines::tree_from_checkpoint(ck).predict(x);
  if (ck.kind == "rf") return baselines::forest_from_checkpoint(ck).predict(x);
  if (ck.kind == "mlp") return baselines::mlp_from_checkpoint(ck).predict(x);
  if (ck.kind == "lstm") return lstm::predict(lstm::from_checkpoint(ck), ds, exec);
  throw SchemaError("unknown model kind in checkpoint: " + ck.kind);
}

}  // namespace avdelay::models
