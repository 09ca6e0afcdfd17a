#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "avdelay/records.hpp"

namespace avdelay::ingest {

struct Reject {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  std::vector<Reject> rejects;
  std::size_t input_rows = 0;
};

inline constexpr const char* kFlightsHeader =
    "flight_id,tail_id,origin,dest,airline,sched_dep,sched_arr,actual_dep,actual_arr";
inline constexpr const char* kTrajectoriesHeader =
    "tail_id,ts,lat,lon,alt_ft,speed_kt,track_deg,model";
inline constexpr const char* kWeatherHeader =
    "station,ts,temp_c,precip_mm,humidity_pct,wind_speed_kt,wind_dir_deg,sky_condition";
inline constexpr const char* kAtcHeader = "facility_id,lat,lon,staffing,controller_training_time_hr";
inline constexpr const char* kAirportsHeader = "code,lat,lon";

// Each parser throws FileNotFound for a missing file and SchemaError naming
// the first absent column. Malformed rows go to the reject list.
// Flights come back sorted by actual arrival, the other sources by timestamp.
ParseResult<FlightRecord> parse_flights(const std::filesystem::path& path);
ParseResult<TrajectoryPoint> parse_trajectories(const std::filesystem::path& path);
ParseResult<WeatherRecord> parse_weather(const std::filesystem::path& path);
ParseResult<AtcRecord> parse_atc(const std::filesystem::path& path);
ParseResult<Airport> parse_airports(const std::filesystem::path& path);

ParseResult<FlightRecord> parse_flights(std::istream& in);
ParseResult<TrajectoryPoint> parse_trajectories(std::istream& in);
ParseResult<WeatherRecord> parse_weather(std::istream& in);
ParseResult<AtcRecord> parse_atc(std::istream& in);
ParseResult<Airport> parse_airports(std::istream& in);

void write_flights(std::ostream& out, const std::vector<FlightRecord>& rows);
void write_trajectories(std::ostream& out, const std::vector<TrajectoryPoint>& rows);
void write_weather(std::ostream& out, const std::vector<WeatherRecord>& rows);
void write_atc(std::ostream& out, const std::vector<AtcRecord>& rows);
void write_airports(std::ostream& out, const std::vector<Airport>& rows);

// Shifts every timestamp by -offset (local = UTC + offset). Offsets outside
// [-840, 840] minutes are rejected with InvalidInput.
std::vector<FlightRecord> normalize_to_utc(std::vector<FlightRecord> rows, int source_tz_offset_min);
std::vector<TrajectoryPoint> normalize_to_utc(std::vector<TrajectoryPoint> rows, int source_tz_offset_min);
std::vector<WeatherRecord> normalize_to_utc(std::vector<WeatherRecord> rows, int source_tz_offset_min);

// All four sources of one scenario directory.
struct DataSet {
  std::vector<FlightRecord> flights;
  std::vector<TrajectoryPoint> trajectories;
  std::vector<WeatherRecord> weather;
  std::vector<AtcRecord> atc;
  std::vector<Airport> airports;  // empty when airports.csv is absent
};

struct LoadReport {
  std::size_t flight_rejects = 0;
  std::size_t trajectory_rejects = 0;
  std::size_t weather_rejects = 0;
  std::size_t atc_rejects = 0;
  std::vector<std::string> messages;
};

DataSet load_directory(const std::filesystem::path& dir, LoadReport* report = nullptr);
void write_directory(const std::filesystem::path& dir, const DataSet& data);

}  // namespace avdelay::ingest
