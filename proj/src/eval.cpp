#include "avdelay/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>

#include "avdelay/csv.hpp"
#include "avdelay/error.hpp"
#include "avdelay/json_keys.hpp"

namespace avdelay::eval {
namespace {

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }
std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (modes.empty() || ns.empty() || models.empty() || seeds.empty()) throw ConfigError("experiment grid is empty");
  for (const auto& m : modes) {
    if (m != "T" && m != "ST") throw ConfigError("feature mode must be T or ST, got " + m);
  }
  for (auto n : ns) {
    if (n == 0) throw ConfigError("sequence length must be positive");
  }
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train_frac must lie in (0, 1)");
  if (workers < 0) throw ConfigError("workers must be nonnegative");
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.is_null()) return c;
  require_known_keys(j, {"modes", "ns", "models", "seeds", "train_frac", "workers", "params"}, "experiment config");
  try {
    if (j.contains("modes")) c.modes = j["modes"].get<std::vector<std::string>>();
    if (j.contains("ns")) c.ns = j["ns"].get<std::vector<std::size_t>>();
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j["models"]) c.models.push_back(models::parse_kind(m.get<std::string>()));
    }
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.train_frac = j.value("train_frac", c.train_frac);
    c.workers = j.value("workers", c.workers);
    if (j.contains("params")) c.params = models::params_from_json(j["params"]);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  std::vector<std::string> kinds;
  for (auto k : c.models) kinds.push_back(models::to_string(k));
  return {{"modes", c.modes},
          {"ns", c.ns},
          {"models", kinds},
          {"seeds", c.seeds},
          {"train_frac", c.train_frac},
          {"params", models::to_json(c.params)}};
}

std::string CellResult::label() const { return models::to_string(model) + "-" + std::to_string(n); }
std::string CellResult::key() const { return mode + "_" + label(); }

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

MetricsReport run_experiment(const fusion::FusedDataset& data, const ExperimentConfig& cfg,
                             const std::filesystem::path& checkpoint_dir) {
  cfg.validate();
  MetricsReport report;
  report.config = to_json(cfg);

  // One sequence dataset per (mode, n), built up front.
  std::map<std::pair<std::string, std::size_t>, seq::DatasetSplit> splits;
  std::map<std::pair<std::string, std::size_t>, std::string> split_errors;
  for (const auto& mode : cfg.modes) {
    const auto cols = fusion::mode_columns(data, mode);
    const auto days = seq::split_days(data.rows, cols);
    for (auto n : cfg.ns) {
      try {
        splits.emplace(std::make_pair(mode, n), seq::build_dataset(days, n, cfg.train_frac));
      } catch (const std::exception& e) {
        split_errors[{mode, n}] = e.what();
      }
    }
  }

  std::vector<CellResult> cells;
  for (const auto& mode : cfg.modes) {
    for (auto kind : cfg.models) {
      for (auto n : cfg.ns) {
        CellResult c;
        c.mode = mode;
        c.n = n;
        c.model = kind;
        if (auto it = splits.find({mode, n}); it != splits.end()) {
          c.n_train = it->second.train.size();
          c.n_test = it->second.test.size();
          c.m = it->second.train.m;
        }
        for (auto s : cfg.seeds) c.runs.push_back({s, {}, {}, {}, 0.0});
        cells.push_back(std::move(c));
      }
    }
  }

  // Jobs are (cell, seed); deterministic kinds run once and are copied.
  struct Job {
    std::size_t cell, run;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::size_t runs = models::is_stochastic(cells[c].model) ? cells[c].runs.size() : 1;
    for (std::size_t r = 0; r < runs; ++r) jobs.push_back({c, r});
  }
  std::vector<std::vector<double>> preds(cells.size());

  auto work = [&](const Job& job) {
    auto& cell = cells[job.cell];
    auto& run = cell.runs[job.run];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (auto e = split_errors.find({cell.mode, cell.n}); e != split_errors.end()) throw InvalidInput(e->second);
      const auto& split = splits.at({cell.mode, cell.n});
      if (split.test.size() == 0) throw InvalidInput("test split is empty");
      const Exec inner = Exec::Parallel;
      const Checkpoint ck = models::fit(cell.model, split.train, cfg.params, run.seed, inner);
      const auto p_train = models::predict(ck, split.train, inner);
      const auto p_test = models::predict(ck, split.test, inner);
      run.train_mse = lstm::mse_loss(p_train, split.train.y);
      run.test_mse = lstm::mse_loss(p_test, split.test.y);
      if (!std::isfinite(*run.train_mse) || !std::isfinite(*run.test_mse)) {
        throw NumericError("non-finite MSE");
      }
      if (job.run == 0) preds[job.cell] = p_test;
      if (!checkpoint_dir.empty()) {
        write_checkpoint(checkpoint_dir / (cell.key() + "_seed" + std::to_string(run.seed) + ".ckpt"), ck);
      }
    } catch (const std::exception& e) {
      run.train_mse.reset();
      run.test_mse.reset();
      run.error = e.what();
    }
    run.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  const auto J = static_cast<std::ptrdiff_t>(jobs.size());
  const int threads = cfg.workers > 0 ? cfg.workers : max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t k = 0; k < J; ++k) work(jobs[static_cast<std::size_t>(k)]);

  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    if (!models::is_stochastic(cell.model)) {
      for (std::size_t r = 1; r < cell.runs.size(); ++r) {
        const auto seed = cell.runs[r].seed;
        cell.runs[r] = cell.runs[0];
        cell.runs[r].seed = seed;
        cell.runs[r].wall_s = 0.0;
      }
    }
    std::vector<double> tr, te;
    for (const auto& r : cell.runs) {
      if (r.test_mse) {
        tr.push_back(*r.train_mse);
        te.push_back(*r.test_mse);
      }
    }
    cell.median_train_mse = median(tr);
    cell.median_test_mse = median(te);
    if (!preds[c].empty()) {
      cell.trace_pred = std::move(preds[c]);
      cell.trace_truth = splits.at({cell.mode, cell.n}).test.y;
    }
  }
  report.cells = std::move(cells);

  for (auto n : cfg.ns) {
    for (const auto& mode : cfg.modes) {
      auto it = splits.find({mode, n});
      if (it == splits.end() || it->second.test.size() == 0) continue;
      const auto& sp = it->second;
      SanityRow row;
      row.n = n;
      row.n_test = sp.test.size();
      for (double v : sp.train.y) row.train_mean += v;
      row.train_mean /= static_cast<double>(sp.train.size());
      std::vector<double> constant(sp.test.size(), row.train_mean);
      row.test_mse = lstm::mse_loss(constant, sp.test.y);
      report.sanity.push_back(row);
      break;  // targets do not depend on the feature set
    }
  }
  return report;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json runs = nlohmann::json::array();
    std::vector<std::uint64_t> seeds;
    for (const auto& run : c.runs) {
      seeds.push_back(run.seed);
      runs.push_back({{"seed", run.seed},
                      {"train_mse", opt_json(run.train_mse)},
                      {"test_mse", opt_json(run.test_mse)},
                      {"error", run.error.empty() ? nlohmann::json() : nlohmann::json(run.error)}});
    }
    cells.push_back({{"key", c.key()},
                     {"mode", c.mode},
                     {"n", c.n},
                     {"model", models::to_string(c.model)},
                     {"method", models::method_family(c.model)},
                     {"n_train", c.n_train},
                     {"n_test", c.n_test},
                     {"m", c.m},
                     {"seeds", seeds},
                     {"runs", runs},
                     {"median_train_mse", opt_json(c.median_train_mse)},
                     {"median_test_mse", opt_json(c.median_test_mse)}});
  }
  nlohmann::json sanity = nlohmann::json::array();
  for (const auto& s : r.sanity) {
    sanity.push_back({{"model", "constant train mean"},
                      {"n", s.n},
                      {"n_test", s.n_test},
                      {"train_mean", s.train_mean},
                      {"test_mse", s.test_mse}});
  }
  return {{"schema", "avdelay.report/1"}, {"units", "minutes^2"}, {"config", r.config}, {"cells", cells},
          {"sanity", sanity}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    if (j.at("schema").get<std::string>() != "avdelay.report/1") throw SchemaError("unknown report schema");
    r.config = j.value("config", nlohmann::json::object());
    for (const auto& c : j.at("cells")) {
      CellResult cell;
      cell.mode = c.at("mode").get<std::string>();
      cell.n = c.at("n").get<std::size_t>();
      cell.model = models::parse_kind(c.at("model").get<std::string>());
      cell.n_train = c.at("n_train").get<std::size_t>();
      cell.n_test = c.at("n_test").get<std::size_t>();
      cell.m = c.at("m").get<std::size_t>();
      for (const auto& run : c.at("runs")) {
        SeedResult s;
        s.seed = run.at("seed").get<std::uint64_t>();
        s.train_mse = opt_from(run.at("train_mse"));
        s.test_mse = opt_from(run.at("test_mse"));
        if (!run.at("error").is_null()) s.error = run.at("error").get<std::string>();
        cell.runs.push_back(std::move(s));
      }
      cell.median_train_mse = opt_from(c.at("median_train_mse"));
      cell.median_test_mse = opt_from(c.at("median_test_mse"));
      r.cells.push_back(std::move(cell));
    }
    for (const auto& s : j.at("sanity")) {
      r.sanity.push_back({s.at("n").get<std::size_t>(), s.at("n_test").get<std::size_t>(),
                          s.at("train_mean").get<double>(), s.at("test_mse").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
  return r;
}

nlohmann::json timing_json(const MetricsReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  double total = 0.0;
  for (const auto& c : r.cells) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : c.runs) {
      runs.push_back({{"seed", run.seed}, {"wall_s", run.wall_s}});
      total += run.wall_s;
    }
    cells.push_back({{"key", c.key()}, {"runs", runs}});
  }
  return {{"cells", cells}, {"total_wall_s", total}};
}

std::string mse_table_render(const MetricsReport& r) {
  std::size_t w_method = 6, w_model = 5;
  for (const auto& c : r.cells) {
    w_method = std::max(w_method, models::method_family(c.model).size());
    w_model = std::max(w_model, c.label().size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string out = pad("Method", w_method) + " | " + pad("Model", w_model) + " | Test MSE\n";
  out += std::string(w_method, '-') + "-+-" + std::string(w_model, '-') + "-+-" + std::string(10, '-') + "\n";
  std::string mode;
  std::string last_method;
  for (const auto& c : r.cells) {
    if (c.mode != mode) {
      mode = c.mode;
      last_method.clear();
      out += "[" + mode + "]\n";
    }
    const std::string method = models::method_family(c.model);
    const std::string value = c.median_test_mse ? fmt4(*c.median_test_mse) : std::string("failed");
    out += pad(method == last_method ? "" : method, w_method) + " | " + pad(c.label(), w_model) + " | " + value + "\n";
    last_method = method;
  }
  if (!r.sanity.empty()) {
    out += "\nSanity (constant train-mean predictor)\n";
    for (const auto& s : r.sanity) {
      out += "N=" + std::to_string(s.n) + " | " + fmt4(s.test_mse) + "\n";
    }
  }
  return out;
}

void write_report(const std::filesystem::path& dir, const MetricsReport& r) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  write("report.json", to_json(r).dump(2) + "\n");
  write("report.txt", mse_table_render(r));
  write("timing.json", timing_json(r).dump(2) + "\n");
  for (const auto& c : r.cells) {
    if (c.trace_pred.empty()) continue;
    std::string text = "predicted,truth\n";
    for (std::size_t k = 0; k < c.trace_pred.size(); ++k) {
      text += csv::format_double(c.trace_pred[k]) + "," + csv::format_double(c.trace_truth[k]) + "\n";
    }
    write("trace_" + c.key() + ".csv", text);
  }
}

}  // namespace avdelay::eval
