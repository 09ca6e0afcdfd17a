#include "avdelay/sequencing.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "avdelay/binio.hpp"
#include "avdelay/error.hpp"
#include "avdelay/rng.hpp"

namespace avdelay::seq {
namespace {

constexpr char kMagic[8] = {'A', 'V', 'D', 'S', 'E', 'Q', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void append_window(SequenceDataset& ds, const DayFrame& day, const DayWindow& w) {
  for (std::size_t r = w.first; r < w.first + ds.n; ++r) {
    ds.x.insert(ds.x.end(), day[r].features.begin(), day[r].features.end());
  }
  ds.y.push_back(w.target);
  ds.last_ts.push_back(epoch_seconds(day[w.first + ds.n - 1].ts));
}

}  // namespace

std::vector<DayWindow> slice_day(std::span<const LabeledRow> day, std::size_t n) {
  if (n == 0) throw InvalidInput("window length must be at least 1");
  std::vector<DayWindow> out;
  if (n > day.size()) return out;
  for (std::size_t first = 0; first + n <= day.size(); ++first) {
    const auto& last = day[first + n - 1];
    if (last.target_available) out.push_back({first, last.target_delay_min});
  }
  return out;
}

std::vector<DayFrame> split_days(std::span<const LabeledRow> rows, std::span<const std::size_t> columns) {
  std::vector<DayFrame> days;
  std::int64_t current = 0;
  for (const auto& r : rows) {
    const auto d = day_index(r.ts);
    if (days.empty() || d != current) {
      days.emplace_back();
      current = d;
    }
    LabeledRow p = r;
    p.features.clear();
    for (std::size_t c : columns) {
      if (c >= r.features.size()) throw InvalidInput("feature column index out of range");
      p.features.push_back(r.features[c]);
    }
    days.back().push_back(std::move(p));
  }
  return days;
}

nlohmann::json SequenceDataset::meta() const {
  return {{"N", n},
          {"M", m},
          {"day_boundaries", day_start},
          {"last_ts", last_ts},
          {"standardization", {{"mean", standardization.mean}, {"scale", standardization.scale}}},
          {"extra", extra}};
}

DatasetSplit build_dataset(std::span<const DayFrame> days, std::size_t n, double train_frac) {
  if (days.empty()) throw InvalidInput("build_dataset: no days");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw InvalidInput("train_frac must lie in (0, 1)");
  if (n == 0) throw InvalidInput("window length must be at least 1");
  std::size_t m = 0;
  bool have_m = false;
  for (const auto& day : days) {
    for (const auto& row : day) {
      if (!have_m) {
        m = row.features.size();
        have_m = true;
      } else if (row.features.size() != m) {
        throw InvalidInput("rows have inconsistent feature widths");
      }
    }
  }

  DatasetSplit out;
  out.train.n = out.test.n = n;
  out.train.m = out.test.m = m;
  for (std::size_t d = 0; d < days.size(); ++d) {
    const auto windows = slice_day(days[d], n);
    if (windows.empty()) {
      out.warnings.push_back("day " + std::to_string(d) + " yields no windows of length " + std::to_string(n) +
                             " (" + std::to_string(days[d].size()) + " rows); skipped");
      continue;
    }
    const auto n_train = static_cast<std::size_t>(std::ceil(train_frac * static_cast<double>(windows.size()) - 1e-9));
    out.train.day_start.push_back(static_cast<std::int64_t>(out.train.size()));
    out.test.day_start.push_back(static_cast<std::int64_t>(out.test.size()));
    for (std::size_t k = 0; k < windows.size(); ++k) {
      append_window(k < n_train ? out.train : out.test, days[d], windows[k]);
    }
  }
  if (out.train.size() == 0) throw InvalidInput("no training windows of length " + std::to_string(n));

  Standardization st;
  st.mean.assign(m, 0.0);
  st.scale.assign(m, 0.0);
  const std::size_t rows = out.train.size() * n;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < m; ++c) st.mean[c] += out.train.x[r * m + c];
  }
  for (auto& v : st.mean) v /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double d = out.train.x[r * m + c] - st.mean[c];
      st.scale[c] += d * d;
    }
  }
  for (auto& v : st.scale) {
    v = std::sqrt(v / static_cast<double>(rows));
    if (!(v > 1e-12)) v = 1.0;
  }
  for (auto* ds : {&out.train, &out.test}) {
    for (std::size_t i = 0; i < ds->x.size(); ++i) {
      const std::size_t c = i % m;
      ds->x[i] = (ds->x[i] - st.mean[c]) / st.scale[c];
    }
    ds->standardization = st;
  }
  return out;
}

SequenceDataset shuffle_sequences(const SequenceDataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  SequenceDataset out = ds;
  const std::size_t block = ds.n * ds.m;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::copy_n(ds.x.begin() + static_cast<std::ptrdiff_t>(perm[i] * block), block,
                out.x.begin() + static_cast<std::ptrdiff_t>(i * block));
    out.y[i] = ds.y[perm[i]];
    out.last_ts[i] = ds.last_ts[perm[i]];
  }
  // Day grouping no longer holds after a shuffle.
  out.day_start.clear();
  return out;
}

void write_dataset(std::ostream& out, const SequenceDataset& ds) {
  if (ds.x.size() != ds.size() * ds.n * ds.m || ds.last_ts.size() != ds.size()) {
    throw InvalidInput("sequence dataset has inconsistent shapes");
  }
  out.write(kMagic, sizeof kMagic);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, 0);
  binio::put_u64(out, ds.size());
  binio::put_u64(out, ds.n);
  binio::put_u64(out, ds.m);
  binio::put_f64s(out, ds.x);
  binio::put_f64s(out, ds.y);
  binio::put_string(out, ds.meta().dump());
}

SequenceDataset read_dataset(std::istream& in) {
  char magic[8];
  binio::read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) throw SchemaError("not a sequence dataset container");
  if (binio::get_u32(in) != kVersion) throw SchemaError("unsupported sequence dataset version");
  binio::get_u32(in);
  SequenceDataset ds;
  const auto s = binio::get_u64(in);
  ds.n = binio::get_u64(in);
  ds.m = binio::get_u64(in);
  if (ds.n != 0 && ds.m != 0 && s > (std::uint64_t{1} << 40) / (ds.n * ds.m)) throw SchemaError("implausible dataset size");
  ds.x.resize(s * ds.n * ds.m);
  ds.y.resize(s);
  binio::get_f64s(in, ds.x);
  binio::get_f64s(in, ds.y);
  const auto meta = nlohmann::json::parse(binio::get_string(in));
  ds.last_ts = meta.at("last_ts").get<std::vector<std::int64_t>>();
  ds.day_start = meta.at("day_boundaries").get<std::vector<std::int64_t>>();
  ds.standardization.mean = meta.at("standardization").at("mean").get<std::vector<double>>();
  ds.standardization.scale = meta.at("standardization").at("scale").get<std::vector<double>>();
  ds.extra = meta.value("extra", nlohmann::json::object());
  if (ds.last_ts.size() != s) throw SchemaError("dataset metadata does not match sequence count");
  return ds;
}

void write_dataset(const std::filesystem::path& path, const SequenceDataset& ds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_dataset(out, ds);
}

SequenceDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("dataset not found: " + path.string());
  return read_dataset(in);
}

}  // namespace avdelay::seq
