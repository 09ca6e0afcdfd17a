#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "avdelay/geo.hpp"
#include "avdelay/time.hpp"

namespace avdelay {

struct FlightRecord {
  std::string flight_id;
  std::string tail_id;
  std::string origin;
  std::string dest;
  std::string airline;
  Timestamp sched_dep{};
  Timestamp sched_arr{};
  std::optional<Timestamp> actual_dep;
  std::optional<Timestamp> actual_arr;
  // Derived from the timestamps: actual minus scheduled, in minutes.
  std::optional<std::int64_t> dep_delay_min;
  std::optional<std::int64_t> arr_delay_min;

  void refresh_delays();
  friend bool operator==(const FlightRecord&, const FlightRecord&) = default;
};

struct TrajectoryPoint {
  std::string tail_id;
  Timestamp ts{};
  geo::GeoPoint pos;
  std::optional<double> alt_ft;
  std::optional<double> speed_kt;
  std::optional<double> track_deg;
  std::optional<std::string> model;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct WeatherRecord {
  std::string station;
  Timestamp ts{};
  std::optional<double> temp_c;
  std::optional<double> precip_mm;
  std::optional<double> humidity_pct;
  std::optional<double> wind_speed_kt;
  std::optional<double> wind_dir_deg;
  std::optional<std::string> sky_condition;

  friend bool operator==(const WeatherRecord&, const WeatherRecord&) = default;
};

struct AtcRecord {
  std::string facility_id;
  geo::GeoPoint centroid;
  std::int64_t staffing = 0;
  double controller_training_time_hr = 0.0;

  friend bool operator==(const AtcRecord&, const AtcRecord&) = default;
};

// Airport or weather-station location.
struct Airport {
  std::string code;
  geo::GeoPoint pos;

  friend bool operator==(const Airport&, const Airport&) = default;
};

}  // namespace avdelay
