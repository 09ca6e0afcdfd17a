#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avdelay/fusion.hpp"
#include "avdelay/models.hpp"

namespace avdelay::eval {

struct ExperimentConfig {
  std::vector<std::string> modes{"T", "ST"};
  std::vector<std::size_t> ns{30, 60, 90, 120};
  std::vector<models::Kind> models{models::Kind::LR, models::Kind::RT, models::Kind::RF, models::Kind::MLP,
                                   models::Kind::LSTM};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double train_frac = 0.8;
  models::ModelParams params;
  int workers = 0;  // concurrent cells; 0 uses the OpenMP default

  void validate() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct SeedResult {
  std::uint64_t seed = 0;
  std::optional<double> train_mse;
  std::optional<double> test_mse;
  std::string error;  // empty on success
  double wall_s = 0.0;
};

struct CellResult {
  std::string mode;
  std::size_t n = 0;
  models::Kind model = models::Kind::LR;
  std::size_t n_train = 0, n_test = 0, m = 0;
  std::vector<SeedResult> runs;
  std::optional<double> median_train_mse;
  std::optional<double> median_test_mse;
  // Test predictions and targets of the first successful seed.
  std::vector<double> trace_pred, trace_truth;

  std::string key() const;    // e.g. "ST_LSTM-120"
  std::string label() const;  // e.g. "LSTM-120"
};

// Constant predictor: the train target mean, scored on the test targets.
struct SanityRow {
  std::size_t n = 0;
  std::size_t n_test = 0;
  double train_mean = 0.0;
  double test_mse = 0.0;
};

struct MetricsReport {
  std::vector<CellResult> cells;
  std::vector<SanityRow> sanity;
  nlohmann::json config = nlohmann::json::object();
};

std::optional<double> median(std::vector<double> v);

// Every (mode, n, model) cell is trained once per seed and scored in
// minutes^2. A failing cell records its error and the grid continues.
// Checkpoints are written under `checkpoint_dir` when it is nonempty.
MetricsReport run_experiment(const fusion::FusedDataset& data, const ExperimentConfig& cfg,
                             const std::filesystem::path& checkpoint_dir = {});

// report.json content: deterministic, no wall-clock data.
nlohmann::json to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);
// Wall times per cell and seed.
nlohmann::json timing_json(const MetricsReport& r);

// Method | Model | Test MSE, grouped by feature set, then the sanity rows.
std::string mse_table_render(const MetricsReport& r);

// report.json, report.txt, timing.json and one trace_<key>.csv per cell.
void write_report(const std::filesystem::path& dir, const MetricsReport& r);

}  // namespace avdelay::eval
