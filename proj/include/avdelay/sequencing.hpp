#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avdelay/fusion.hpp"

namespace avdelay::seq {

using fusion::LabeledRow;
using DayFrame = std::vector<LabeledRow>;

// A window of `n` consecutive rows starting at `first`; its target is the
// target of the last row.
struct DayWindow {
  std::size_t first = 0;
  double target = 0.0;
};

// All stride-1 windows of length n whose last row has a target. Returns an
// empty list when n exceeds the day length.
std::vector<DayWindow> slice_day(std::span<const LabeledRow> day, std::size_t n);

// Groups time-ordered rows by UTC day and keeps the listed feature columns.
std::vector<DayFrame> split_days(std::span<const LabeledRow> rows, std::span<const std::size_t> columns);

struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;  // population std, 1 for constant columns
  friend bool operator==(const Standardization&, const Standardization&) = default;
};

// x is (S, N, M) row-major; y holds the target minutes of each sequence.
struct SequenceDataset {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::int64_t> last_ts;    // epoch seconds of each window's last row
  std::vector<std::int64_t> day_start;  // index of the first sequence of each day
  Standardization standardization;
  nlohmann::json extra = nlohmann::json::object();  // free-form provenance

  std::size_t size() const { return y.size(); }
  std::span<const double> sequence(std::size_t s) const { return {x.data() + s * n * m, n * m}; }
  nlohmann::json meta() const;
  friend bool operator==(const SequenceDataset&, const SequenceDataset&) = default;
};

struct DatasetSplit {
  SequenceDataset train;
  SequenceDataset test;
  std::vector<std::string> warnings;  // one per skipped day
};

// Within each day the first ceil(train_frac * windows) windows go to train.
// Features are z-scored with statistics over every train row instance.
DatasetSplit build_dataset(std::span<const DayFrame> days, std::size_t n, double train_frac = 0.8);

// Permutes whole sequences; rows inside a sequence keep their order.
SequenceDataset shuffle_sequences(const SequenceDataset& ds, std::uint64_t seed);

// Container: magic "AVDSEQ01", u32 version, u32 reserved, u64 S, N, M, then x
// and y as little-endian f64, then a length-prefixed JSON metadata block.
void write_dataset(const std::filesystem::path& path, const SequenceDataset& ds);
SequenceDataset read_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const SequenceDataset& ds);
SequenceDataset read_dataset(std::istream& in);

}  // namespace avdelay::seq
