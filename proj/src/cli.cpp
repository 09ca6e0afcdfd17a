#include "avdelay/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "avdelay/checkpoint.hpp"
#include "avdelay/csv.hpp"
#include "avdelay/error.hpp"
#include "avdelay/json_keys.hpp"
#include "avdelay/ingest.hpp"
#include "avdelay/sequencing.hpp"
#include "avdelay/time.hpp"

namespace avdelay::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json section(const json& j, const char* name) { return j.contains(name) ? j.at(name) : json::object(); }

}  // namespace

fusion::PipelineConfig pipeline_from_json(const json& j) {
  fusion::PipelineConfig c;
  try {
    require_known_keys(j,
                       {"tau_min", "target_window_min", "airport", "weather_join_tolerance_min",
                        "inflight_staleness_min", "grid", "terminal", "selection", "cardinality_thresh",
                        "train_frac"},
                       "pipeline");
    auto& f = c.fusion;
    f.tau_min = j.value("tau_min", f.tau_min);
    f.target_window_min = j.value("target_window_min", f.target_window_min);
    f.airport = j.value("airport", f.airport);
    f.weather_join_tolerance_min = j.value("weather_join_tolerance_min", f.weather_join_tolerance_min);
    f.inflight_staleness_min = j.value("inflight_staleness_min", f.inflight_staleness_min);
    const json g = section(j, "grid");
    require_known_keys(g, {"cell_lat_deg", "cell_lon_deg", "floor_alt_ft"}, "pipeline.grid");
    f.grid.cell_lat_deg = g.value("cell_lat_deg", f.grid.cell_lat_deg);
    f.grid.cell_lon_deg = g.value("cell_lon_deg", f.grid.cell_lon_deg);
    f.grid.floor_alt_ft = g.value("floor_alt_ft", f.grid.floor_alt_ft);
    const json t = section(j, "terminal");
    require_known_keys(t, {"max_dist_km", "min_alt_ft", "max_alt_ft"}, "pipeline.terminal");
    f.terminal.max_dist_km = t.value("max_dist_km", f.terminal.max_dist_km);
    f.terminal.min_alt_ft = t.value("min_alt_ft", f.terminal.min_alt_ft);
    f.terminal.max_alt_ft = t.value("max_alt_ft", f.terminal.max_alt_ft);
    const json s = section(j, "selection");
    require_known_keys(s, {"missing_thresh", "corr_thresh", "keep_list"}, "pipeline.selection");
    c.selection.missing_thresh = s.value("missing_thresh", c.selection.missing_thresh);
    c.selection.corr_thresh = s.value("corr_thresh", c.selection.corr_thresh);
    c.selection.keep_list = s.value("keep_list", c.selection.keep_list);
    c.cardinality_thresh = j.value("cardinality_thresh", c.cardinality_thresh);
    c.train_frac = j.value("train_frac", c.train_frac);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad pipeline config: ") + e.what());
  }
  c.fusion.validate();
  if (!(c.train_frac > 0.0 && c.train_frac < 1.0)) throw ConfigError("pipeline.train_frac must be in (0, 1)");
  if (c.cardinality_thresh < 1) throw ConfigError("pipeline.cardinality_thresh must be positive");
  return c;
}

json to_json(const fusion::PipelineConfig& c) {
  const auto& f = c.fusion;
  return {{"tau_min", f.tau_min},
          {"target_window_min", f.target_window_min},
          {"airport", f.airport},
          {"weather_join_tolerance_min", f.weather_join_tolerance_min},
          {"inflight_staleness_min", f.inflight_staleness_min},
          {"grid",
           {{"cell_lat_deg", f.grid.cell_lat_deg},
            {"cell_lon_deg", f.grid.cell_lon_deg},
            {"floor_alt_ft", f.grid.floor_alt_ft}}},
          {"terminal",
           {{"max_dist_km", f.terminal.max_dist_km},
            {"min_alt_ft", f.terminal.min_alt_ft},
            {"max_alt_ft", f.terminal.max_alt_ft}}},
          {"selection",
           {{"missing_thresh", c.selection.missing_thresh},
            {"corr_thresh", c.selection.corr_thresh},
            {"keep_list", c.selection.keep_list}}},
          {"cardinality_thresh", c.cardinality_thresh},
          {"train_frac", c.train_frac}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  require_known_keys(j, {"scenario", "ingest", "pipeline", "dataset", "model", "experiment", "paths"}, "config");
  c.scenario = synth::scenario_from_json(section(j, "scenario"));
  c.pipeline = pipeline_from_json(section(j, "pipeline"));
  try {
    const json in = section(j, "ingest");
    require_known_keys(in, {"source_tz_offset_min"}, "ingest");
    c.source_tz_offset_min = in.value("source_tz_offset_min", 0);

    const json d = section(j, "dataset");
    require_known_keys(d, {"mode", "n", "train_frac"}, "dataset");
    c.dataset.mode = d.value("mode", c.dataset.mode);
    c.dataset.n = d.value("n", c.dataset.n);
    c.dataset.train_frac = d.value("train_frac", c.dataset.train_frac);

    json m = section(j, "model");
    if (m.contains("kind")) c.model_kind = models::parse_kind(m.at("kind").get<std::string>());
    c.model_seed = m.value("seed", c.model_seed);
    m.erase("kind");
    m.erase("seed");
    c.model = models::params_from_json(m);

    c.experiment = eval::experiment_from_json(section(j, "experiment"));

    const json p = section(j, "paths");
    require_known_keys(
        p, {"scenario_dir", "fused", "dataset_dir", "model", "report_dir", "predictions", "run_log"}, "paths");
    auto path_of = [&](const char* key, fs::path& dst) {
      if (p.contains(key)) dst = p.at(key).get<std::string>();
    };
    path_of("scenario_dir", c.paths.scenario_dir);
    path_of("fused", c.paths.fused);
    path_of("dataset_dir", c.paths.dataset_dir);
    path_of("model", c.paths.model);
    path_of("report_dir", c.paths.report_dir);
    path_of("predictions", c.paths.predictions);
    path_of("run_log", c.paths.run_log);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  if (c.dataset.mode != "T" && c.dataset.mode != "ST") throw ConfigError("dataset.mode must be T or ST");
  if (c.dataset.n < 1) throw ConfigError("dataset.n must be positive");
  if (!(c.dataset.train_frac > 0.0 && c.dataset.train_frac < 1.0))
    throw ConfigError("dataset.train_frac must be in (0, 1)");
  if (c.source_tz_offset_min < -840 || c.source_tz_offset_min > 840)
    throw ConfigError("ingest.source_tz_offset_min must be in [-840, 840]");
  return c;
}

json to_json(const RunConfig& c) {
  json model = models::to_json(c.model);
  model["kind"] = models::to_string(c.model_kind);
  model["seed"] = c.model_seed;
  return {{"scenario", synth::to_json(c.scenario)},
          {"ingest", {{"source_tz_offset_min", c.source_tz_offset_min}}},
          {"pipeline", to_json(c.pipeline)},
          {"dataset", {{"mode", c.dataset.mode}, {"n", c.dataset.n}, {"train_frac", c.dataset.train_frac}}},
          {"model", model},
          {"experiment", eval::to_json(c.experiment)},
          {"paths",
           {{"scenario_dir", c.paths.scenario_dir.string()},
            {"fused", c.paths.fused.string()},
            {"dataset_dir", c.paths.dataset_dir.string()},
            {"model", c.paths.model.string()},
            {"report_dir", c.paths.report_dir.string()},
            {"predictions", c.paths.predictions.string()},
            {"run_log", c.paths.run_log.string()}}}};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw StateError("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

fs::path train_dataset_path(const Paths& p, const std::string& mode, std::size_t n) {
  return p.dataset_dir / (mode + "_N" + std::to_string(n) + "_train.avds");
}

fs::path test_dataset_path(const Paths& p, const std::string& mode, std::size_t n) {
  return p.dataset_dir / (mode + "_N" + std::to_string(n) + "_test.avds");
}

namespace {

// Flags shared by every subcommand plus the subcommand-specific ones.
struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string in, out, train, data, model, kind, mode, checkpoints;
  std::optional<std::size_t> n;
  std::optional<int> tz_offset;
  std::optional<int> workers;
};

RunConfig load_config(const Options& o) {
  if (o.config_path.empty()) return run_config_from_json(json::object());
  if (!fs::exists(o.config_path)) throw FileNotFound("config file not found: " + o.config_path);
  std::ifstream in(o.config_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + o.config_path + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw FileNotFound(std::string(what) + " not found: " + p.string());
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
  return s;
}

// Each handler returns the seed token written to run.log.
std::string run_synth(RunConfig& c, const Options& o, std::ostream& out) {
  if (o.seed) c.scenario.seed = *o.seed;
  const fs::path dir = o.out.empty() ? c.paths.scenario_dir : fs::path(o.out);
  const auto scenario = synth::generate(c.scenario);
  synth::write_scenario(dir, scenario);
  out << "wrote scenario to " << dir.string() << ": " << scenario.data.flights.size() << " flights, "
      << scenario.data.trajectories.size() << " trajectory points, " << scenario.data.weather.size()
      << " weather reports, " << scenario.storms.size() << " storms\n";
  return std::to_string(c.scenario.seed);
}

std::string run_ingest(RunConfig& c, const Options& o, std::ostream& out) {
  const fs::path dir = o.in.empty() ? c.paths.scenario_dir : fs::path(o.in);
  if (!fs::is_directory(dir)) throw FileNotFound("scenario directory not found: " + dir.string());
  const int tz = o.tz_offset.value_or(c.source_tz_offset_min);
  ingest::LoadReport report;
  auto data = ingest::load_directory(dir, &report);
  out << "flights " << data.flights.size() << " (rejected " << report.flight_rejects << ")\n"
      << "trajectories " << data.trajectories.size() << " (rejected " << report.trajectory_rejects << ")\n"
      << "weather " << data.weather.size() << " (rejected " << report.weather_rejects << ")\n"
      << "atc " << data.atc.size() << " (rejected " << report.atc_rejects << ")\n";
  for (const auto& m : report.messages) out << "  " << m << '\n';
  if (!o.out.empty()) {
    data.flights = ingest::normalize_to_utc(std::move(data.flights), tz);
    data.trajectories = ingest::normalize_to_utc(std::move(data.trajectories), tz);
    data.weather = ingest::normalize_to_utc(std::move(data.weather), tz);
    ingest::write_directory(o.out, data);
    out << "wrote normalized CSVs to " << o.out << '\n';
  } else if (tz != 0) {
    out << "note: --tz-offset has no effect without --out\n";
  }
  return o.seed ? std::to_string(*o.seed) : "-";
}

std::string run_featurize(RunConfig& c, const Options& o, std::ostream& out) {
  const fs::path dir = o.in.empty() ? c.paths.scenario_dir : fs::path(o.in);
  if (!fs::is_directory(dir)) throw FileNotFound("scenario directory not found: " + dir.string());
  const fs::path dst = o.out.empty() ? c.paths.fused : fs::path(o.out);
  auto data = ingest::load_directory(dir);
  if (c.source_tz_offset_min != 0) {
    data.flights = ingest::normalize_to_utc(std::move(data.flights), c.source_tz_offset_min);
    data.trajectories = ingest::normalize_to_utc(std::move(data.trajectories), c.source_tz_offset_min);
    data.weather = ingest::normalize_to_utc(std::move(data.weather), c.source_tz_offset_min);
  }
  const auto fused = fusion::featurize(data, c.pipeline);
  ensure_parent(dst);
  fusion::write_fused(dst, fused);
  std::size_t kept = 0;
  for (const auto& e : fused.selection) kept += e.action == "kept";
  out << "wrote " << fused.rows.size() << " rows x " << fused.columns.size() << " features to " << dst.string()
      << " (" << kept << " source columns kept)\n";
  return o.seed ? std::to_string(*o.seed) : "-";
}

std::string run_dataset(RunConfig& c, const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path src = o.in.empty() ? c.paths.fused : fs::path(o.in);
  require_file(src, "fused CSV");
  if (!o.mode.empty()) c.dataset.mode = o.mode;
  if (o.n) c.dataset.n = *o.n;
  if (!o.out.empty()) c.paths.dataset_dir = o.out;
  if (c.dataset.mode != "T" && c.dataset.mode != "ST") throw InvalidInput("--mode must be T or ST");
  const auto fused = fusion::read_fused(src);
  const auto cols = fusion::mode_columns(fused, c.dataset.mode);
  const auto days = seq::split_days(fused.rows, cols);
  auto split = seq::build_dataset(days, c.dataset.n, c.dataset.train_frac);
  for (const auto& w : split.warnings) err << "warning: " << w << '\n';
  if (split.train.size() == 0 || split.test.size() == 0)
    throw InvalidInput("no sequences of length " + std::to_string(c.dataset.n) + " could be built");
  for (auto* ds : {&split.train, &split.test}) ds->extra = {{"mode", c.dataset.mode}, {"source", src.string()}};
  const auto train_path = train_dataset_path(c.paths, c.dataset.mode, c.dataset.n);
  const auto test_path = test_dataset_path(c.paths, c.dataset.mode, c.dataset.n);
  fs::create_directories(c.paths.dataset_dir);
  seq::write_dataset(train_path, split.train);
  seq::write_dataset(test_path, split.test);
  out << "wrote " << split.train.size() << " train and " << split.test.size() << " test sequences (N="
      << c.dataset.n << ", M=" << split.train.m << ") to " << train_path.string() << " and "
      << test_path.string() << '\n';
  return o.seed ? std::to_string(*o.seed) : "-";
}

std::string run_train(RunConfig& c, const Options& o, std::ostream& out) {
  const fs::path src = o.train.empty() ? train_dataset_path(c.paths, c.dataset.mode, c.dataset.n) : fs::path(o.train);
  require_file(src, "training dataset");
  if (!o.kind.empty()) c.model_kind = models::parse_kind(o.kind);
  if (o.seed) c.model_seed = *o.seed;
  const fs::path dst = o.out.empty() ? c.paths.model : fs::path(o.out);
  const auto ds = seq::read_dataset(src);
  std::vector<double> history;
  const auto ck = models::fit(c.model_kind, ds, c.model, c.model_seed, Exec::Parallel, &history);
  for (std::size_t e = 0; e < history.size(); ++e) out << "epoch " << e + 1 << " loss " << history[e] << '\n';
  const auto pred = models::predict(ck, ds);
  double mse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) mse += (pred[i] - ds.y[i]) * (pred[i] - ds.y[i]);
  mse /= static_cast<double>(pred.size());
  write_checkpoint(dst, ck);
  out << "trained " << models::to_string(c.model_kind) << " on " << ds.size() << " sequences, train MSE " << mse
      << ", wrote " << dst.string() << '\n';
  return std::to_string(c.model_seed);
}

std::string run_evaluate(RunConfig& c, const Options& o, std::ostream& out) {
  const fs::path src = o.in.empty() ? c.paths.fused : fs::path(o.in);
  require_file(src, "fused CSV");
  if (o.seed) c.experiment.seeds = {*o.seed};
  if (o.workers) c.experiment.workers = *o.workers;
  c.experiment.validate();
  const fs::path dst = o.out.empty() ? c.paths.report_dir : fs::path(o.out);
  const auto fused = fusion::read_fused(src);
  const auto report = eval::run_experiment(fused, c.experiment, o.checkpoints.empty() ? fs::path() : fs::path(o.checkpoints));
  eval::write_report(dst, report);
  out << eval::mse_table_render(report) << "wrote report to " << dst.string() << '\n';
  return join_seeds(c.experiment.seeds);
}

std::string run_predict(RunConfig& c, const Options& o, std::ostream& out) {
  const fs::path model = o.model.empty() ? c.paths.model : fs::path(o.model);
  const fs::path data = o.data.empty() ? test_dataset_path(c.paths, c.dataset.mode, c.dataset.n) : fs::path(o.data);
  const fs::path dst = o.out.empty() ? c.paths.predictions : fs::path(o.out);
  require_file(model, "checkpoint");
  require_file(data, "dataset");
  const auto ck = read_checkpoint(model);
  const auto ds = seq::read_dataset(data);
  const auto pred = models::predict(ck, ds);
  ensure_parent(dst);
  std::ofstream f(dst, std::ios::binary);
  if (!f) throw StateError("cannot write " + dst.string());
  f << "last_ts,predicted_delay_min,true_delay_min\n";
  for (std::size_t i = 0; i < pred.size(); ++i)
    f << format_timestamp(from_epoch(ds.last_ts[i])) << ',' << csv::format_double(pred[i]) << ','
      << csv::format_double(ds.y[i]) << '\n';
  if (!f) throw StateError("write failed: " + dst.string());
  out << "wrote " << pred.size() << " predictions to " << dst.string() << '\n';
  return o.seed ? std::to_string(*o.seed) : "-";
}

void append_run_log(const fs::path& path, const std::string& sub, const std::string& hash, const std::string& seed,
                    int code) {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  std::ofstream log(path, std::ios::app);
  if (!log) return;  // provenance is best-effort; never turn success into failure
  log << format_timestamp(Timestamp{now.time_since_epoch()}) << ' ' << sub << ' ' << hash << ' ' << seed << ' '
      << code << " avdelay/" << kVersion << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal flight delay prediction pipeline", "avdelay"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config_path, "JSON configuration (defaults apply to absent keys)");
    s->add_option("--seed", o.seed, "Seed override");
    return s;
  };
  auto* synth_cmd = common(app.add_subcommand("synth", "Generate a synthetic scenario directory"));
  synth_cmd->add_option("--out", o.out, "Output directory");

  auto* ingest_cmd = common(app.add_subcommand("ingest", "Validate and optionally normalize scenario CSVs"));
  ingest_cmd->add_option("--in", o.in, "Scenario directory");
  ingest_cmd->add_option("--out", o.out, "Write UTC-normalized CSVs here");
  ingest_cmd->add_option("--tz-offset", o.tz_offset, "Source offset from UTC in minutes");

  auto* feat_cmd = common(app.add_subcommand("featurize", "Fuse sources into a labeled feature CSV"));
  feat_cmd->add_option("--in", o.in, "Scenario directory");
  feat_cmd->add_option("--out", o.out, "Fused CSV path");

  auto* ds_cmd = common(app.add_subcommand("dataset", "Slice the fused CSV into train/test sequence files"));
  ds_cmd->add_option("--in", o.in, "Fused CSV path");
  ds_cmd->add_option("--out", o.out, "Dataset directory");
  ds_cmd->add_option("--mode", o.mode, "Feature set: T or ST");
  ds_cmd->add_option("--n", o.n, "Window length");

  auto* train_cmd = common(app.add_subcommand("train", "Fit a model and write a checkpoint"));
  train_cmd->add_option("--train", o.train, "Training dataset file");
  train_cmd->add_option("--model", o.kind, "LR, RT, RF, MLP or LSTM");
  train_cmd->add_option("--out", o.out, "Checkpoint path");

  auto* eval_cmd = common(app.add_subcommand("evaluate", "Run the model grid and write a report"));
  eval_cmd->add_option("--in", o.in, "Fused CSV path");
  eval_cmd->add_option("--out", o.out, "Report directory");
  eval_cmd->add_option("--checkpoints", o.checkpoints, "Also save every fitted model here");
  eval_cmd->add_option("--workers", o.workers, "Concurrent runs (0: OpenMP default)");

  auto* pred_cmd = common(app.add_subcommand("predict", "Predict a dataset with a checkpoint"));
  pred_cmd->add_option("--model", o.model, "Checkpoint path");
  pred_cmd->add_option("--data", o.data, "Dataset file");
  pred_cmd->add_option("--out", o.out, "Predictions CSV path");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << sub->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "avdelay " << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    const std::string name = app.get_subcommands().empty() ? "-" : sub->get_name();
    append_run_log(Paths{}.run_log, name, "-", o.seed ? std::to_string(*o.seed) : "-", 1);
    return 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  std::string hash = "-";
  std::string seed_token = o.seed ? std::to_string(*o.seed) : "-";
  fs::path log_path = Paths{}.run_log;
  int code = 0;
  try {
    RunConfig c = load_config(o);
    log_path = c.paths.run_log;
    hash = sha256_hex(to_json(c).dump());
    if (sub == "synth") seed_token = run_synth(c, o, out);
    else if (sub == "ingest") seed_token = run_ingest(c, o, out);
    else if (sub == "featurize") seed_token = run_featurize(c, o, out);
    else if (sub == "dataset") seed_token = run_dataset(c, o, out, err);
    else if (sub == "train") seed_token = run_train(c, o, out);
    else if (sub == "evaluate") seed_token = run_evaluate(c, o, out);
    else seed_token = run_predict(c, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = e.is_validation() ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    code = 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 2;
  }
  append_run_log(log_path, sub, hash, seed_token, code);
  return code;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace avdelay::cli
