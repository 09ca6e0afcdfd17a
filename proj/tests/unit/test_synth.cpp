#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "avdelay/error.hpp"
#include "avdelay/synth.hpp"
#include "oracles/haversine.hpp"
#include "support/scenario.hpp"

using namespace avdelay;
using namespace avdelay::synth;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Distance (km) from p to the great circle through a and b, spherical
// trigonometry in long double.
long double cross_track_km(const geo::GeoPoint& a, const geo::GeoPoint& b, const geo::GeoPoint& p) {
  const long double r = 6371.0L, d2r = 3.14159265358979323846264338327950288L / 180.0L;
  auto bearing = [&](const geo::GeoPoint& u, const geo::GeoPoint& v) {
    const long double p1 = u.lat_deg * d2r, p2 = v.lat_deg * d2r, dl = (v.lon_deg - u.lon_deg) * d2r;
    return std::atan2(std::sin(dl) * std::cos(p2), std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl));
  };
  const long double d13 = static_cast<long double>(oracle::haversine_km(a.lat_deg, a.lon_deg, p.lat_deg, p.lon_deg)) / r;
  return std::abs(std::asin(std::sin(d13) * std::sin(bearing(a, p) - bearing(a, b)))) * r;
}

ScenarioConfig tiny(std::uint64_t seed) {
  ScenarioConfig c;
  c.days = 1;
  c.flights_per_day = 200;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(PlantedRule, NullDynamicsGiveZeroDelays) {
  auto c = tiny(3);
  c.propagation_strength = 0.0;
  c.congestion_sensitivity = 0.0;
  c.noise_std_min = 0.0;
  c.weather.hub_storm_probability = 0.0;
  c.weather.spoke_storm_probability = 0.0;
  const auto s = generate(c);
  ASSERT_FALSE(s.data.flights.empty());
  for (const auto& f : s.data.flights) {
    EXPECT_EQ(*f.dep_delay_min, 0);
    EXPECT_EQ(*f.arr_delay_min, 0);
  }
}

TEST(PlantedRule, TwoFlightChainFollowsClosedForm) {
  DelayInputs up;
  up.weather_origin_min = 20.0;
  const auto first = planted_delays(0.6, 0.3, up);
  EXPECT_EQ(first.dep_delay_min, 20);
  EXPECT_EQ(first.arr_delay_min, 20);
  DelayInputs down;
  down.upstream_arr_delay_min = first.arr_delay_min;
  const auto second = planted_delays(0.6, 0.3, down);
  EXPECT_EQ(second.dep_delay_min, 12);
  EXPECT_EQ(second.arr_delay_min, 12);

  down.congestion_load = 10.0;
  EXPECT_EQ(planted_delays(0.6, 0.3, down).arr_delay_min, 15);
  down.turnaround_floor_min = 18;
  const auto clamped = planted_delays(0.6, 0.3, down);
  EXPECT_EQ(clamped.dep_delay_min, 18);
  EXPECT_EQ(clamped.turnaround_clamp_min, 6);
}

TEST(StormShape, PeaksMidwayAndVanishesOutside) {
  const Storm s{"ATL", from_epoch(0), 2.0, 30.0};
  EXPECT_NEAR(storm_effect(s, from_epoch(3600)), 30.0, 1e-12);
  EXPECT_EQ(storm_effect(s, from_epoch(-1)), 0.0);
  EXPECT_EQ(storm_effect(s, from_epoch(7201)), 0.0);
}

TEST(Generate, SameSeedGivesByteIdenticalFiles) {
  const auto base = std::filesystem::temp_directory_path() / "avdelay_synth_det";
  std::filesystem::remove_all(base);
  write_scenario(base / "a", generate(tiny(9)));
  write_scenario(base / "b", generate(tiny(9)));
  write_scenario(base / "c", generate(tiny(10)));
  for (const char* f : {"flights.csv", "trajectories.csv", "weather.csv", "atc.csv", "airports.csv", "ground_truth.json"}) {
    EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
  }
  EXPECT_NE(slurp(base / "a" / "flights.csv"), slurp(base / "c" / "flights.csv"));
  std::filesystem::remove_all(base);
}

TEST(Generate, RejectsInvalidAndInfeasibleConfigs) {
  auto c = tiny(1);
  c.days = 0;
  EXPECT_THROW(generate(c), ConfigError);
  c = tiny(1);
  c.flights_per_day = 20000;
  EXPECT_THROW(generate(c), GenerationError);
  EXPECT_THROW(scenario_from_json({{"dayz", 3}}), ConfigError);
  EXPECT_EQ(scenario_from_json(to_json(tiny(4))).flights_per_day, 200);
}

TEST(GenerateProperty, TrajectoriesSpanFlightsOnTheGreatCircle) {
  const auto& s = fixture::small_scenario();
  std::map<std::string, geo::GeoPoint> pos;
  for (const auto& a : s.data.airports) pos[a.code] = a.pos;
  std::map<std::string, std::vector<const TrajectoryPoint*>> by_tail;
  for (const auto& p : s.data.trajectories) by_tail[p.tail_id].push_back(&p);
  std::size_t checked = 0;
  for (const auto& f : s.data.flights) {
    if (!f.actual_dep || !f.actual_arr) continue;
    std::vector<const TrajectoryPoint*> pts;
    for (const auto* p : by_tail[f.tail_id])
      if (p->ts >= *f.actual_dep && p->ts <= *f.actual_arr) pts.push_back(p);
    ASSERT_FALSE(pts.empty()) << f.flight_id;
    EXPECT_LE(pts.front()->ts - *f.actual_dep, Seconds{60});
    EXPECT_LE(*f.actual_arr - pts.back()->ts, Seconds{60});
    for (const auto* p : pts) {
      ASSERT_LT(cross_track_km(pos[f.origin], pos[f.dest], p->pos), 1.0L) << f.flight_id;
      ++checked;
    }
  }
  EXPECT_GT(checked, 10000u);
}

TEST(GenerateProperty, GroundTruthRecomputesEveryDelay) {
  const auto& s = fixture::small_scenario();
  const auto gt = ground_truth_json(s);
  const double sp = gt.at("config").at("propagation_strength").get<double>();
  const double sc = gt.at("config").at("congestion_sensitivity").get<double>();
  std::map<std::string, const FlightRecord*> flights;
  for (const auto& f : s.data.flights) flights[f.flight_id] = &f;
  std::map<std::string, std::vector<std::int64_t>> sched_arr;
  for (const auto& f : s.data.flights) sched_arr[f.dest].push_back(epoch_seconds(f.sched_arr));

  for (const auto& t : gt.at("flights")) {
    const auto& f = *flights.at(t.at("flight_id").get<std::string>());
    const double upstream = t.at("upstream_arr_delay_min").is_null() ? 0.0 : t.at("upstream_arr_delay_min").get<double>();
    if (!t.at("upstream_flight_id").is_null()) {
      EXPECT_EQ(upstream, *flights.at(t.at("upstream_flight_id").get<std::string>())->arr_delay_min);
    }
    auto dep = static_cast<std::int64_t>(std::llround(sp * upstream + t.at("weather_origin_min").get<double>() +
                                                      t.at("noise_dep_min").get<double>()));
    if (!t.at("turnaround_floor_min").is_null()) dep = std::max(dep, t.at("turnaround_floor_min").get<std::int64_t>());
    const auto arr = dep + std::llround(sc * t.at("congestion_load").get<double>() + t.at("weather_dest_min").get<double>() +
                                        t.at("noise_arr_min").get<double>());
    ASSERT_EQ(*f.dep_delay_min, dep) << f.flight_id;
    ASSERT_EQ(*f.arr_delay_min, arr) << f.flight_id;

    int load = -1;  // the flight itself is not counted
    for (auto ts : sched_arr[f.dest]) load += std::abs(ts - epoch_seconds(f.sched_arr)) <= 600;
    ASSERT_EQ(t.at("congestion_load").get<double>(), load) << f.flight_id;
  }
}
