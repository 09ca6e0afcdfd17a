#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avdelay/ingest.hpp"

namespace avdelay::synth {

struct WeatherRegime {
  // Chance that a storm starts in any given operating hour.
  double hub_storm_probability = 0.15;
  double spoke_storm_probability = 0.01;
  double min_intensity_min = 15.0;  // peak added delay
  double max_intensity_min = 45.0;
  double min_duration_hr = 1.0;
  double max_duration_hr = 3.0;
};

struct ScenarioConfig {
  int days = 8;
  int flights_per_day = 1200;
  std::string hub = "ATL";
  geo::GeoPoint hub_pos{33.6407, -84.4277};
  // Spokes; generated from the seed when empty.
  std::vector<Airport> airports;
  int spoke_count = 60;
  double spoke_min_km = 300.0;  // ring used when spokes are generated
  double spoke_max_km = 900.0;
  int turnaround_min_min = 40;  // scheduled ground time range
  int turnaround_max_min = 70;
  WeatherRegime weather;
  double propagation_strength = 0.6;
  double congestion_sensitivity = 0.3;  // minutes per co-scheduled arrival
  double noise_std_min = 3.0;
  std::uint64_t seed = 1;
  int atc_facilities = 20;
  int first_hour_utc = 5;
  int last_hour_utc = 23;
  int min_turnaround_min = 30;
  int hub_capacity_per_bin = 20;  // mean scheduled hub arrivals per 10 min

  void validate() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);

// Inputs of the generative rule for one flight. The upstream flight is the
// previous leg flown by the same tail.
struct DelayInputs {
  std::optional<std::int64_t> upstream_arr_delay_min;
  double congestion_load = 0.0;  // other arrivals scheduled within +-10 min at the destination
  double weather_origin_min = 0.0;
  double weather_dest_min = 0.0;
  double noise_dep_min = 0.0;
  double noise_arr_min = 0.0;
  // Latest departure delay the turnaround allows, if the tail is constrained.
  std::optional<std::int64_t> turnaround_floor_min;
};

struct DelayOutcome {
  std::int64_t dep_delay_min = 0;
  std::int64_t arr_delay_min = 0;
  std::int64_t turnaround_clamp_min = 0;
};

// The planted rule:
//   dep = round(s_p * upstream_arr + weather_origin + noise_dep)
//   dep = max(dep, turnaround_floor)            (clamp recorded)
//   arr = dep + round(s_c * congestion_load + weather_dest + noise_arr)
DelayOutcome planted_delays(double propagation_strength, double congestion_sensitivity, const DelayInputs& in);

struct Storm {
  std::string station;
  Timestamp start{};
  double duration_hr = 0.0;
  double intensity_min = 0.0;
};

// Storm delay contribution at t: intensity * sin^2(pi * elapsed / duration)
// inside the storm, 0 outside.
double storm_effect(const Storm& s, Timestamp t);

struct FlightTruth {
  std::string flight_id;
  std::optional<std::string> upstream_flight_id;
  DelayInputs inputs;
  DelayOutcome outcome;
};

struct Scenario {
  ingest::DataSet data;
  std::vector<FlightTruth> truth;
  std::vector<Storm> storms;
  ScenarioConfig config;
};

// Throws ConfigError on an invalid config and GenerationError when the
// schedule density exceeds the hub capacity or a flight cannot be flown.
Scenario generate(const ScenarioConfig& cfg);

nlohmann::json ground_truth_json(const Scenario& s);

// Writes flights.csv, trajectories.csv, weather.csv, atc.csv, airports.csv
// and ground_truth.json.
void write_scenario(const std::filesystem::path& dir, const Scenario& s);

}  // namespace avdelay::synth
