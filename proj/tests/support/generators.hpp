#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avdelay/geo.hpp"
#include "avdelay/records.hpp"
#include "avdelay/time.hpp"

// Hand-rolled random inputs for property tests. std::mt19937_64 keeps them
// independent of the library's own generator.
namespace gen {

using Engine = std::mt19937_64;

inline double uniform(Engine& e, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(e); }
inline std::int64_t integer(Engine& e, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(e);
}

inline avdelay::geo::GeoPoint point(Engine& e) { return {uniform(e, -90.0, 90.0), uniform(e, -179.999999, 180.0)}; }

// A point within `radius_km` of `center` (uniform bearing and distance).
inline avdelay::geo::GeoPoint near(Engine& e, const avdelay::geo::GeoPoint& center, double radius_km) {
  return avdelay::geo::destination_point(center, uniform(e, 0.0, 360.0), uniform(e, 0.0, radius_km));
}

inline const avdelay::Timestamp kDay0 = avdelay::from_epoch(1467331200);  // 2016-07-01T00:00:00Z

// Flights between a hub and a few spokes with minute-precision times over
// one day; some lack actual times.
inline std::vector<avdelay::FlightRecord> flights(Engine& e, const std::string& hub, int count,
                                                  avdelay::Timestamp day = kDay0) {
  static const char* spokes[] = {"AAA", "BBB", "CCC", "DDD"};
  std::vector<avdelay::FlightRecord> out;
  for (int k = 0; k < count; ++k) {
    avdelay::FlightRecord f;
    f.flight_id = "F" + std::to_string(k);
    f.tail_id = "N" + std::to_string(integer(e, 0, count / 3 + 1));
    f.airline = integer(e, 0, 1) ? "AA" : "DL";
    const bool inbound = integer(e, 0, 1) == 1;
    const std::string spoke = spokes[integer(e, 0, 3)];
    f.origin = inbound ? spoke : hub;
    f.dest = inbound ? hub : spoke;
    const auto dep_min = integer(e, 0, 22 * 60);
    f.sched_dep = day + avdelay::Minutes{dep_min};
    const auto block = integer(e, 40, 150);
    f.sched_arr = f.sched_dep + avdelay::Minutes{block};
    if (integer(e, 0, 19) != 0) {
      f.actual_dep = f.sched_dep + avdelay::Minutes{integer(e, -10, 90)};
      f.actual_arr = *f.actual_dep + avdelay::Minutes{block + integer(e, -15, 30)};
    }
    f.refresh_delays();
    out.push_back(std::move(f));
  }
  return out;
}

// `tails` aircraft reporting at random instants inside [start, start+span)
// around `center`; altitudes span the terminal band and the en-route floor,
// a few are missing.
inline std::vector<avdelay::TrajectoryPoint> swarm(Engine& e, const avdelay::geo::GeoPoint& center, int tails,
                                                   int points_per_tail, double radius_km,
                                                   avdelay::Timestamp start = kDay0 + avdelay::Seconds{43200},
                                                   std::int64_t span_s = 3600) {
  std::vector<avdelay::TrajectoryPoint> out;
  for (int t = 0; t < tails; ++t) {
    for (int k = 0; k < points_per_tail; ++k) {
      avdelay::TrajectoryPoint p;
      p.tail_id = "T" + std::to_string(t);
      p.ts = start + avdelay::Seconds{integer(e, 0, span_s - 1)};
      p.pos = near(e, center, radius_km);
      if (integer(e, 0, 29) != 0) p.alt_ft = uniform(e, 0.0, 40000.0);
      p.speed_kt = uniform(e, 120.0, 520.0);
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace gen
