#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avdelay/features.hpp"
#include "avdelay/ingest.hpp"
#include "avdelay/parallel.hpp"

namespace avdelay::fusion {

struct FusionConfig {
  int tau_min = 60;
  int target_window_min = 5;
  std::string airport = "ATL";
  int weather_join_tolerance_min = 30;
  // A tail counts as airborne at t only if it reported within this window.
  int inflight_staleness_min = 5;
  geo::SectorGrid grid{};
  geo::TerminalAirspace terminal{};

  void validate() const;
};

struct LabeledRow {
  Timestamp ts{};
  std::vector<double> features;
  bool target_available = false;
  double target_delay_min = 0.0;
};

// Looks up a station/airport position by code.
class StationIndex {
 public:
  explicit StationIndex(std::span<const Airport> airports);
  const geo::GeoPoint* find(const std::string& code) const;
  const geo::GeoPoint& at(const std::string& code) const;  // throws ConfigError
  const std::vector<Airport>& all() const { return airports_; }

 private:
  std::vector<Airport> airports_;
  std::map<std::string, std::size_t> index_;
};

// As-of weather lookup: the latest report of a station at or before t, within
// the tolerance. Reports after t are never returned.
class WeatherIndex {
 public:
  WeatherIndex(std::span<const WeatherRecord> weather, int tolerance_min);
  const WeatherRecord* as_of(const std::string& station, Timestamp t) const;
  std::vector<std::string> stations() const;

 private:
  std::map<std::string, std::vector<const WeatherRecord*>> by_station_;
  Seconds tolerance_;
};

struct CongestionFeatures {
  features::GroundCongestion ground;
  features::CongestionSeries terminal;
  std::map<geo::SectorId, features::CongestionSeries> enroute;
};

CongestionFeatures compute_congestion(std::span<const FlightRecord> flights, std::span<const TrajectoryPoint> traj,
                                      const StationIndex& stations, const FusionConfig& cfg);

// D_t: trajectory points joined with the weather of the nearest located
// station (as-of, within tolerance). Columns: tail_id, lat, lon, alt_ft,
// speed_kt, dist_km (to the configured airport) and the station weather.
features::FeatureFrame build_dt(std::span<const TrajectoryPoint> traj, std::span<const WeatherRecord> weather,
                                const StationIndex& stations, const FusionConfig& cfg, Exec exec = Exec::Parallel);

// D_f: one row per arrival at the airport, ordered by actual arrival, with the
// arriving flight's fields, the airport weather as of the arrival, and the
// ground/terminal congestion of the last 10-minute bin completed at or before
// the arrival.
features::FeatureFrame build_df(std::span<const FlightRecord> flights, std::span<const WeatherRecord> weather,
                                const CongestionFeatures& congestion, const FusionConfig& cfg);

// Variables fetched from D_t for every airborne succeeding flight.
inline const std::vector<std::string>& inflight_variables() {
  static const std::vector<std::string> vars{"dist_km",      "speed_kt",      "alt_ft",   "temp_c",
                                             "precip_mm",    "humidity_pct",  "wind_speed_kt",
                                             "lat",          "lon"};
  return vars;
}

// Appends fixed-width summaries of the flights scheduled to arrive in
// [t+tau, t+tau+window): inflight_scheduled, inflight_count (airborne at t)
// and mean/min/max of each in-flight variable. Statistics of an empty set are
// NaN and imputed later with the training mean.
features::FeatureFrame attach_inflight(const features::FeatureFrame& df, const features::FeatureFrame& dt,
                                       std::span<const FlightRecord> flights, const FusionConfig& cfg);

// Appends staffing and training time of the ATC facility nearest to the mean
// in-flight position, or to the airport when nothing is airborne.
features::FeatureFrame attach_atc(const features::FeatureFrame& frame, std::span<const AtcRecord> atc,
                                  const geo::GeoPoint& airport);

// Appends en-route totals (sum and max over sectors, active sector count) of
// the last completed bin.
features::FeatureFrame attach_enroute(const features::FeatureFrame& frame,
                                      const std::map<geo::SectorId, features::CongestionSeries>& enroute);

// Mean arrival delay over arrivals with actual_arr in [t+tau, t+tau+window).
// The feature vector holds the frame's numeric columns in order.
std::vector<LabeledRow> compute_target(const features::FeatureFrame& frame, std::span<const FlightRecord> flights,
                                       const FusionConfig& cfg);

// ---- Full featurization pipeline ----------------------------------------

struct PipelineConfig {
  FusionConfig fusion;
  features::SelectionConfig selection{0.8, 0.8, {"arr_delay_min"}};
  int cardinality_thresh = 50;
  double train_frac = 0.8;
};

// Rows of each UTC day whose position is within the first ceil(frac * L).
std::vector<std::size_t> leading_rows_per_day(std::span<const Timestamp> ts, double train_frac);

// The fused raw frame (D_f with in-flight, ATC and en-route columns) before
// selection, encoding and imputation. Every value at row t depends only on
// records observed at or before t and on the published schedule.
features::FeatureFrame fuse_raw(const ingest::DataSet& data, const FusionConfig& cfg, Exec exec = Exec::Parallel);

struct FusedDataset {
  std::vector<std::string> columns;
  std::vector<features::FeatureGroup> groups;
  std::vector<LabeledRow> rows;
  std::vector<features::SelectionEntry> selection;
  nlohmann::json sidecar;
};

FusedDataset featurize(const ingest::DataSet& data, const PipelineConfig& cfg, Exec exec = Exec::Parallel);

// Column indices belonging to a feature set: "T" keeps the temporal group,
// "ST" keeps everything.
std::vector<std::size_t> mode_columns(const FusedDataset& ds, const std::string& mode);

// CSV `ts,target_available,target_delay_min,<features...>` plus a JSON
// sidecar at the same path with extension `.json`.
void write_fused(const std::filesystem::path& csv_path, const FusedDataset& ds);
FusedDataset read_fused(const std::filesystem::path& csv_path);

}  // namespace avdelay::fusion
