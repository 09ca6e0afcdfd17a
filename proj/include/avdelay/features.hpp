#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avdelay/frame.hpp"
#include "avdelay/geo.hpp"
#include "avdelay/records.hpp"

namespace avdelay::features {

// ---- Pearson correlation and feature selection --------------------------

// Pearson correlation over pairwise-complete observations (rows where either
// value is NaN are skipped). Returns nullopt when either side has zero
// variance; callers treat that as r = 0. Throws InvalidInput on unequal
// lengths or fewer than two complete pairs.
std::optional<double> pearson_corr(std::span<const double> x, std::span<const double> y);

struct SelectionConfig {
  double missing_thresh = 0.8;  // drop when missing_rate > thresh
  double corr_thresh = 0.8;     // drop the later column when |r| > thresh
  std::vector<std::string> keep_list;
};

struct SelectionEntry {
  std::string column;
  std::string action;  // "kept" | "dropped"
  std::string reason;  // "", "missing", "correlated"
  double statistic = 0.0;  // missing rate, or |r| against `partner`
  std::string partner;
};

struct SelectionResult {
  FeatureFrame frame;
  std::vector<SelectionEntry> report;
};

SelectionResult select_features(const FeatureFrame& frame, const SelectionConfig& cfg = {});

nlohmann::json to_json(const std::vector<SelectionEntry>& report);

// ---- Congestion indices -------------------------------------------------

// Counts per 10-minute bin starting at `start`.
struct CongestionSeries {
  Timestamp start{};
  std::vector<std::int64_t> counts;

  Timestamp bin_start(std::size_t i) const { return start + Seconds{static_cast<std::int64_t>(i) * kBinSeconds}; }
  // Count of the bin beginning at `bin`, 0 outside the covered range.
  std::int64_t at(Timestamp bin) const;
  // Count of the last bin that closed at or before `t`.
  std::int64_t last_completed(Timestamp t) const { return at(bin_floor(t) - Seconds{kBinSeconds}); }
};

// Half-open time span that a series must cover. Without one, the series
// spans the bins that contain at least one event.
struct TimeRange {
  Timestamp begin{};
  Timestamp end{};
};

struct GroundCongestion {
  CongestionSeries departures;
  CongestionSeries arrivals;
};

GroundCongestion ground_congestion(std::span<const FlightRecord> flights, const std::string& airport,
                                   std::optional<TimeRange> range = std::nullopt);

// Distinct tails per bin with at least one point inside the terminal zone.
CongestionSeries terminal_airspace_congestion(std::span<const TrajectoryPoint> traj, const geo::GeoPoint& airport,
                                              std::optional<TimeRange> range = std::nullopt,
                                              const geo::TerminalAirspace& zone = {});

// Distinct tails per (sector, bin) among points at or above the grid floor.
// Only sectors with traffic appear; every series spans the same bins.
std::map<geo::SectorId, CongestionSeries> enroute_congestion(std::span<const TrajectoryPoint> traj,
                                                             const geo::SectorGrid& grid,
                                                             std::optional<TimeRange> range = std::nullopt);

// ---- Categorical encoding -----------------------------------------------

inline constexpr const char* kUnknownCategory = "<unknown>";

// Hybrid encoder: categorical columns whose training cardinality is at most
// the threshold become one-hot groups (training categories in sorted order
// plus an unknown column), the rest become training occurrence counts.
class CategoricalEncoder {
 public:
  explicit CategoricalEncoder(int cardinality_thresh = 50) : thresh_(cardinality_thresh) {}

  void fit(const FeatureFrame& frame, std::span<const std::size_t> train_rows);
  FeatureFrame transform(const FeatureFrame& frame) const;
  bool fitted() const { return fitted_; }
  nlohmann::json provenance() const;

  struct ColumnCode {
    std::string column;
    Encoding encoding = Encoding::OneHot;
    std::vector<std::string> categories;  // one-hot: sorted training categories
    std::map<std::string, double> counts;  // frequency: training occurrence counts
  };
  const std::vector<ColumnCode>& codes() const { return codes_; }

 private:
  int thresh_;
  bool fitted_ = false;
  std::vector<ColumnCode> codes_;
};

// ---- Imputation ---------------------------------------------------------

// ForwardFillThenMean columns are forward-filled within each UTC day, then
// any remaining gaps take the training mean. TrainMean columns go straight to
// the training mean. A column with no training observations imputes 0.
class Imputer {
 public:
  void fit(const FeatureFrame& frame, std::span<const std::size_t> train_rows);
  FeatureFrame transform(const FeatureFrame& frame) const;
  bool fitted() const { return fitted_; }
  const std::map<std::string, double>& means() const { return means_; }

 private:
  bool fitted_ = false;
  std::map<std::string, double> means_;
};

}  // namespace avdelay::features
