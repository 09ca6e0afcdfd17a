#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avdelay/eval.hpp"
#include "avdelay/fusion.hpp"
#include "avdelay/models.hpp"
#include "avdelay/synth.hpp"

namespace avdelay::cli {

inline constexpr const char* kVersion = "0.1.0";

struct Paths {
  std::filesystem::path scenario_dir = "scenario";
  std::filesystem::path fused = "fused.csv";
  std::filesystem::path dataset_dir = "datasets";
  std::filesystem::path model = "model.ckpt";
  std::filesystem::path report_dir = "report";
  std::filesystem::path predictions = "predictions.csv";
  std::filesystem::path run_log = "run.log";
};

struct DatasetSection {
  std::string mode = "ST";
  std::size_t n = 120;
  double train_frac = 0.8;
};

// Every section falls back to its defaults, so an empty object is a complete
// configuration.
struct RunConfig {
  synth::ScenarioConfig scenario;
  fusion::PipelineConfig pipeline;
  int source_tz_offset_min = 0;
  DatasetSection dataset;
  models::Kind model_kind = models::Kind::LSTM;
  models::ModelParams model;
  std::uint64_t model_seed = 1;
  eval::ExperimentConfig experiment;
  Paths paths;
};

RunConfig run_config_from_json(const nlohmann::json& j);  // ConfigError on bad values
nlohmann::json to_json(const RunConfig& c);
fusion::PipelineConfig pipeline_from_json(const nlohmann::json& j);
nlohmann::json to_json(const fusion::PipelineConfig& c);

std::string sha256_hex(const std::string& bytes);

// File names written by `dataset` for a mode and window length.
std::filesystem::path train_dataset_path(const Paths& p, const std::string& mode, std::size_t n);
std::filesystem::path test_dataset_path(const Paths& p, const std::string& mode, std::size_t n);

int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace avdelay::cli
