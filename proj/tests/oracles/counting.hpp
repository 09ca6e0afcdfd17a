#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "avdelay/records.hpp"
#include "haversine.hpp"

// Brute-force recounts over raw records: every query rescans the input.
namespace oracle {

inline std::int64_t secs(avdelay::Timestamp t) { return t.time_since_epoch().count(); }

inline std::int64_t ground_count(const std::vector<avdelay::FlightRecord>& flights, const std::string& airport,
                                 std::int64_t bin_start, bool departures) {
  std::int64_t n = 0;
  for (const auto& f : flights) {
    const auto& when = departures ? f.actual_dep : f.actual_arr;
    const auto& where = departures ? f.origin : f.dest;
    if (where != airport || !when) continue;
    const auto s = secs(*when);
    n += s >= bin_start && s < bin_start + 600;
  }
  return n;
}

inline std::int64_t terminal_count(const std::vector<avdelay::TrajectoryPoint>& traj, double lat, double lon,
                                   std::int64_t bin_start) {
  std::set<std::string> tails;
  for (const auto& p : traj) {
    const auto s = secs(p.ts);
    if (s < bin_start || s >= bin_start + 600 || !p.alt_ft) continue;
    if (*p.alt_ft < 1200.0 || *p.alt_ft > 10000.0) continue;
    if (haversine_km(p.pos.lat_deg, p.pos.lon_deg, lat, lon) < 200.0) tails.insert(p.tail_id);
  }
  return static_cast<std::int64_t>(tails.size());
}

// Distinct tails per (row, col, bin) for points at or above the floor.
inline std::set<std::tuple<int, int, std::int64_t, std::string>> enroute_hits(
    const std::vector<avdelay::TrajectoryPoint>& traj, double cell_lat, double cell_lon, double floor_ft) {
  std::set<std::tuple<int, int, std::int64_t, std::string>> hits;
  for (const auto& p : traj) {
    if (!p.alt_ft || *p.alt_ft < floor_ft) continue;
    const int row = static_cast<int>(std::floor((p.pos.lat_deg + 90.0) / cell_lat));
    const int col = static_cast<int>(std::floor((p.pos.lon_deg + 180.0) / cell_lon));
    const auto s = secs(p.ts);
    const auto bin = s - ((s % 600) + 600) % 600;
    hits.emplace(row, col, bin, p.tail_id);
  }
  return hits;
}

// Mean arrival delay (minutes) of arrivals at `airport` with actual arrival in
// [t + tau, t + tau + window); nullopt-like flag via `found`.
inline double target_scan(const std::vector<avdelay::FlightRecord>& flights, const std::string& airport,
                          std::int64_t t, int tau_min, int window_min, bool& found) {
  double sum = 0.0;
  int n = 0;
  for (const auto& f : flights) {
    if (f.dest != airport || !f.actual_arr) continue;
    const auto a = secs(*f.actual_arr);
    if (a < t + tau_min * 60 || a >= t + (tau_min + window_min) * 60) continue;
    sum += static_cast<double>((a - secs(f.sched_arr)) / 60);
    ++n;
  }
  found = n > 0;
  return n ? sum / n : 0.0;
}

}  // namespace oracle
