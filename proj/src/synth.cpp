#include "avdelay/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>

#include "avdelay/error.hpp"
#include "avdelay/json_keys.hpp"
#include "avdelay/rng.hpp"

namespace avdelay::synth {
namespace {

struct AircraftModel {
  const char* name;
  double cruise_kt;
};

constexpr std::array<AircraftModel, 6> kModels{{{"B737", 450.0},
                                               {"A320", 450.0},
                                               {"B757", 470.0},
                                               {"CRJ9", 430.0},
                                               {"E175", 430.0},
                                               {"MD88", 440.0}}};
constexpr std::array<const char*, 6> kAirlines{"DL", "AA", "UA", "WN", "B6", "NK"};
constexpr double kCruiseFt = 35000.0;
constexpr double kClimbFtPerMin = 2500.0;
constexpr int kBlockOverheadMin = 20;
constexpr int kWeatherStepMin = 20;
constexpr double kStormScale = 40.0;  // intensity treated as a full-strength storm

Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) { return Rng(seed).split(a).split(b); }

double round_to(double v, double step) { return std::round(v / step) * step; }

std::string two_digit(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", k);
  return buf;
}

// Midnight UTC of scenario day d: the first of consecutive months from July 2016.
Timestamp day_start(int d) {
  using namespace std::chrono;
  const year_month first{year{2016}, month{7}};
  const year_month ym = first + months{d};
  return sys_days{ym / 1};
}

Timestamp add_min(Timestamp t, std::int64_t m) { return t + Minutes{m}; }

struct Leg {
  std::size_t tail = 0;
  std::string origin, dest;
  Timestamp sched_dep{}, sched_arr{};
  std::string flight_id;
};

struct Tail {
  std::string id;
  std::string airline;
  std::size_t model = 0;
  std::vector<std::size_t> legs;
};

}  // namespace

void ScenarioConfig::validate() const {
  if (days < 1) throw ConfigError("days must be at least 1");
  if (flights_per_day < 1) throw ConfigError("flights_per_day must be at least 1");
  if (!(propagation_strength >= 0.0) || !(congestion_sensitivity >= 0.0) || !(noise_std_min >= 0.0)) {
    throw ConfigError("propagation_strength, congestion_sensitivity and noise_std_min must be nonnegative");
  }
  const auto& w = weather;
  if (!(w.hub_storm_probability >= 0.0 && w.hub_storm_probability <= 1.0) ||
      !(w.spoke_storm_probability >= 0.0 && w.spoke_storm_probability <= 1.0)) {
    throw ConfigError("storm probabilities must lie in [0, 1]");
  }
  if (!(w.min_intensity_min >= 0.0 && w.max_intensity_min >= w.min_intensity_min)) {
    throw ConfigError("storm intensity range is invalid");
  }
  if (!(w.min_duration_hr > 0.0 && w.max_duration_hr >= w.min_duration_hr)) {
    throw ConfigError("storm duration range is invalid");
  }
  if (!(first_hour_utc >= 0 && last_hour_utc <= 24 && last_hour_utc - first_hour_utc >= 4)) {
    throw ConfigError("operating hours must span at least 4 hours within the UTC day");
  }
  if (airports.empty() && spoke_count < 1) throw ConfigError("spoke_count must be at least 1");
  if (atc_facilities < 1) throw ConfigError("atc_facilities must be at least 1");
  if (min_turnaround_min < 0) throw ConfigError("min_turnaround_min must be nonnegative");
  if (!(spoke_min_km >= 100.0 && spoke_max_km >= spoke_min_km)) throw ConfigError("spoke distance range is invalid");
  if (turnaround_min_min < 0 || turnaround_max_min < turnaround_min_min) {
    throw ConfigError("turnaround range is invalid");
  }
  if (hub_capacity_per_bin < 1) throw ConfigError("hub_capacity_per_bin must be positive");
  geo::validate(hub_pos);
  for (const auto& a : airports) {
    geo::validate(a.pos);
    if (a.code == hub) throw ConfigError("spoke list must not contain the hub");
  }
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  if (j.is_null()) return c;
  require_known_keys(j,
                     {"days", "flights_per_day", "hub", "hub_pos", "airports", "spoke_count", "spoke_min_km",
                      "spoke_max_km", "turnaround_min_min", "turnaround_max_min", "weather", "propagation_strength",
                      "congestion_sensitivity", "noise_std_min", "seed", "atc_facilities", "first_hour_utc",
                      "last_hour_utc", "min_turnaround_min", "hub_capacity_per_bin"},
                     "scenario config");
  try {
    c.days = j.value("days", c.days);
    c.flights_per_day = j.value("flights_per_day", c.flights_per_day);
    c.hub = j.value("hub", c.hub);
    if (j.contains("hub_pos")) c.hub_pos = {j["hub_pos"].at("lat").get<double>(), j["hub_pos"].at("lon").get<double>()};
    if (j.contains("airports")) {
      for (const auto& a : j["airports"]) {
        c.airports.push_back({a.at("code").get<std::string>(), {a.at("lat").get<double>(), a.at("lon").get<double>()}});
      }
    }
    c.spoke_count = j.value("spoke_count", c.spoke_count);
    c.spoke_min_km = j.value("spoke_min_km", c.spoke_min_km);
    c.spoke_max_km = j.value("spoke_max_km", c.spoke_max_km);
    c.turnaround_min_min = j.value("turnaround_min_min", c.turnaround_min_min);
    c.turnaround_max_min = j.value("turnaround_max_min", c.turnaround_max_min);
    if (j.contains("weather")) {
      const auto& w = j["weather"];
      require_known_keys(w,
                         {"hub_storm_probability", "spoke_storm_probability", "min_intensity_min",
                          "max_intensity_min", "min_duration_hr", "max_duration_hr"},
                         "scenario weather");
      auto& r = c.weather;
      r.hub_storm_probability = w.value("hub_storm_probability", r.hub_storm_probability);
      r.spoke_storm_probability = w.value("spoke_storm_probability", r.spoke_storm_probability);
      r.min_intensity_min = w.value("min_intensity_min", r.min_intensity_min);
      r.max_intensity_min = w.value("max_intensity_min", r.max_intensity_min);
      r.min_duration_hr = w.value("min_duration_hr", r.min_duration_hr);
      r.max_duration_hr = w.value("max_duration_hr", r.max_duration_hr);
    }
    c.propagation_strength = j.value("propagation_strength", c.propagation_strength);
    c.congestion_sensitivity = j.value("congestion_sensitivity", c.congestion_sensitivity);
    c.noise_std_min = j.value("noise_std_min", c.noise_std_min);
    c.seed = j.value("seed", c.seed);
    c.atc_facilities = j.value("atc_facilities", c.atc_facilities);
    c.first_hour_utc = j.value("first_hour_utc", c.first_hour_utc);
    c.last_hour_utc = j.value("last_hour_utc", c.last_hour_utc);
    c.min_turnaround_min = j.value("min_turnaround_min", c.min_turnaround_min);
    c.hub_capacity_per_bin = j.value("hub_capacity_per_bin", c.hub_capacity_per_bin);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json airports = nlohmann::json::array();
  for (const auto& a : c.airports) airports.push_back({{"code", a.code}, {"lat", a.pos.lat_deg}, {"lon", a.pos.lon_deg}});
  const auto& w = c.weather;
  return {{"days", c.days},
          {"flights_per_day", c.flights_per_day},
          {"hub", c.hub},
          {"hub_pos", {{"lat", c.hub_pos.lat_deg}, {"lon", c.hub_pos.lon_deg}}},
          {"airports", airports},
          {"spoke_count", c.spoke_count},
          {"spoke_min_km", c.spoke_min_km},
          {"spoke_max_km", c.spoke_max_km},
          {"turnaround_min_min", c.turnaround_min_min},
          {"turnaround_max_min", c.turnaround_max_min},
          {"weather",
           {{"hub_storm_probability", w.hub_storm_probability},
            {"spoke_storm_probability", w.spoke_storm_probability},
            {"min_intensity_min", w.min_intensity_min},
            {"max_intensity_min", w.max_intensity_min},
            {"min_duration_hr", w.min_duration_hr},
            {"max_duration_hr", w.max_duration_hr}}},
          {"propagation_strength", c.propagation_strength},
          {"congestion_sensitivity", c.congestion_sensitivity},
          {"noise_std_min", c.noise_std_min},
          {"seed", c.seed},
          {"atc_facilities", c.atc_facilities},
          {"first_hour_utc", c.first_hour_utc},
          {"last_hour_utc", c.last_hour_utc},
          {"min_turnaround_min", c.min_turnaround_min},
          {"hub_capacity_per_bin", c.hub_capacity_per_bin}};
}

DelayOutcome planted_delays(double propagation_strength, double congestion_sensitivity, const DelayInputs& in) {
  DelayOutcome out;
  const double upstream = in.upstream_arr_delay_min ? static_cast<double>(*in.upstream_arr_delay_min) : 0.0;
  std::int64_t dep = std::llround(propagation_strength * upstream + in.weather_origin_min + in.noise_dep_min);
  if (in.turnaround_floor_min && dep < *in.turnaround_floor_min) {
    out.turnaround_clamp_min = *in.turnaround_floor_min - dep;
    dep = *in.turnaround_floor_min;
  }
  out.dep_delay_min = dep;
  out.arr_delay_min =
      dep + std::llround(congestion_sensitivity * in.congestion_load + in.weather_dest_min + in.noise_arr_min);
  return out;
}

double storm_effect(const Storm& s, Timestamp t) {
  const double elapsed_hr = static_cast<double>(epoch_seconds(t) - epoch_seconds(s.start)) / 3600.0;
  if (elapsed_hr < 0.0 || elapsed_hr > s.duration_hr) return 0.0;
  const double v = std::sin(std::numbers::pi * elapsed_hr / s.duration_hr);
  return s.intensity_min * v * v;
}

Scenario generate(const ScenarioConfig& cfg_in) {
  cfg_in.validate();
  Scenario sc;
  sc.config = cfg_in;
  const auto& cfg = sc.config;
  const std::uint64_t seed = cfg.seed;

  // Airports: hub first, then spokes.
  std::vector<Airport> spokes = cfg.airports;
  if (spokes.empty()) {
    Rng rng = stream(seed, 1);
    for (int k = 1; k <= cfg.spoke_count; ++k) {
      const double bearing = rng.uniform(0.0, 360.0);
      const double dist = rng.uniform(cfg.spoke_min_km, cfg.spoke_max_km);
      auto p = geo::destination_point(cfg.hub_pos, bearing, dist);
      p.lat_deg = round_to(p.lat_deg, 1e-4);
      p.lon_deg = round_to(p.lon_deg, 1e-4);
      spokes.push_back({"SP" + two_digit(k), p});
    }
  }
  auto& airports = sc.data.airports;
  airports.push_back({cfg.hub, cfg.hub_pos});
  airports.insert(airports.end(), spokes.begin(), spokes.end());
  std::map<std::string, geo::GeoPoint> pos;
  for (const auto& a : airports) pos[a.code] = a.pos;
  for (const auto& s : spokes) {
    if (geo::haversine_distance(cfg.hub_pos, s.pos) < 100.0) {
      throw GenerationError("spoke " + s.code + " lies within 100 km of the hub");
    }
  }

  const int op_minutes = (cfg.last_hour_utc - cfg.first_hour_utc) * 60;
  const double hub_arrivals_per_bin = 0.5 * cfg.flights_per_day / (op_minutes / 10.0);
  if (hub_arrivals_per_bin > cfg.hub_capacity_per_bin) {
    throw GenerationError("schedule density of " + std::to_string(hub_arrivals_per_bin) +
                          " hub arrivals per 10 minutes exceeds capacity " + std::to_string(cfg.hub_capacity_per_bin));
  }

  int flight_counter = 1000;
  for (int d = 0; d < cfg.days; ++d) {
    const Timestamp midnight = day_start(d);
    const Timestamp open = add_min(midnight, cfg.first_hour_utc * 60);
    const Timestamp close = add_min(midnight, cfg.last_hour_utc * 60);

    // Storms.
    std::map<std::string, std::vector<Storm>> storms;
    {
      Rng rng = stream(seed, 3, static_cast<std::uint64_t>(d));
      const auto& w = cfg.weather;
      auto maybe_storm = [&](const std::string& station, double p) {
        for (int h = 0; h < op_minutes / 60; ++h) {
          const bool hit = rng.bernoulli(p);
          const double start_off = 60.0 * h + rng.uniform(0.0, 60.0);
          const double dur = rng.uniform(w.min_duration_hr, w.max_duration_hr);
          const double intensity = rng.uniform(w.min_intensity_min, w.max_intensity_min);
          if (!hit) continue;
          Storm s{station, add_min(open, static_cast<std::int64_t>(start_off)), round_to(dur, 0.25),
                  round_to(intensity, 0.5)};
          storms[station].push_back(s);
          sc.storms.push_back(s);
        }
      };
      maybe_storm(cfg.hub, w.hub_storm_probability);
      for (const auto& s : spokes) maybe_storm(s.code, w.spoke_storm_probability);
    }
    auto weather_at = [&](const std::string& station, Timestamp t) {
      double v = 0.0;
      if (auto it = storms.find(station); it != storms.end()) {
        for (const auto& s : it->second) v += storm_effect(s, t);
      }
      return v;
    };

    // Schedule: tails shuttle between the hub and spokes until the day is full.
    std::vector<Leg> legs;
    std::vector<Tail> tails;
    {
      Rng rng = stream(seed, 2, static_cast<std::uint64_t>(d));
      while (static_cast<int>(legs.size()) < cfg.flights_per_day) {
        Tail tail;
        char id[16];
        std::snprintf(id, sizeof id, "N%04dX", static_cast<int>(tails.size()) + 1);
        tail.id = id;
        tail.airline = kAirlines[rng.below(kAirlines.size())];
        tail.model = static_cast<std::size_t>(rng.below(kModels.size()));
        Timestamp t = add_min(open, static_cast<std::int64_t>(rng.below(150)));
        // Half the fleet overnights at a spoke.
        std::string at = rng.bernoulli(0.5) ? cfg.hub : spokes[rng.below(spokes.size())].code;
        while (static_cast<int>(legs.size()) < cfg.flights_per_day) {
          const std::string to = at == cfg.hub ? spokes[rng.below(spokes.size())].code : cfg.hub;
          const double dist = geo::haversine_distance(pos[at], pos[to]);
          const auto block = static_cast<std::int64_t>(
              std::lround(dist / (kModels[tail.model].cruise_kt * geo::kKmPerNauticalMile) * 60.0) + kBlockOverheadMin);
          const Timestamp arr = add_min(t, block);
          if (arr > close) break;
          Leg leg{tails.size(), at, to, t, arr, tail.airline + std::to_string(flight_counter++)};
          tail.legs.push_back(legs.size());
          legs.push_back(std::move(leg));
          t = add_min(arr, cfg.turnaround_min_min +
                               static_cast<std::int64_t>(rng.below(cfg.turnaround_max_min - cfg.turnaround_min_min + 1)));
          at = to;
        }
        if (tail.legs.empty()) {
          if (tails.size() > 100000) throw GenerationError("cannot place any flight within operating hours");
          continue;
        }
        tails.push_back(std::move(tail));
      }
    }

    // Planned terminal load: other arrivals at the same destination scheduled
    // within 10 minutes.
    std::map<std::string, std::vector<std::int64_t>> arrivals_by_dest;
    for (const auto& l : legs) arrivals_by_dest[l.dest].push_back(epoch_seconds(l.sched_arr));
    for (auto& [_, v] : arrivals_by_dest) std::sort(v.begin(), v.end());
    auto load_of = [&](const Leg& l) {
      const auto& v = arrivals_by_dest[l.dest];
      const auto t = epoch_seconds(l.sched_arr);
      const auto lo = std::lower_bound(v.begin(), v.end(), t - 600);
      const auto hi = std::upper_bound(v.begin(), v.end(), t + 600);
      return static_cast<double>(hi - lo - 1);
    };

    // Delays, tail by tail in leg order.
    Rng noise = stream(seed, 5, static_cast<std::uint64_t>(d));
    std::vector<FlightRecord> day_flights(legs.size());
    std::vector<FlightTruth> day_truth(legs.size());
    for (const auto& tail : tails) {
      std::optional<std::size_t> prev;
      for (std::size_t li : tail.legs) {
        const Leg& l = legs[li];
        DelayInputs in;
        in.congestion_load = load_of(l);
        in.weather_origin_min = 0.5 * weather_at(l.origin, l.sched_dep);
        in.weather_dest_min = weather_at(l.dest, l.sched_arr);
        in.noise_dep_min = cfg.noise_std_min * noise.normal();
        in.noise_arr_min = 0.5 * cfg.noise_std_min * noise.normal();
        if (prev) {
          const auto& pf = day_flights[*prev];
          in.upstream_arr_delay_min = *pf.arr_delay_min;
          in.turnaround_floor_min = minutes_between(*pf.actual_arr, l.sched_dep) + cfg.min_turnaround_min;
        }
        const DelayOutcome out = planted_delays(cfg.propagation_strength, cfg.congestion_sensitivity, in);

        FlightRecord f;
        f.flight_id = l.flight_id;
        f.tail_id = tail.id;
        f.origin = l.origin;
        f.dest = l.dest;
        f.airline = tail.airline;
        f.sched_dep = l.sched_dep;
        f.sched_arr = l.sched_arr;
        f.actual_dep = add_min(l.sched_dep, out.dep_delay_min);
        f.actual_arr = add_min(l.sched_arr, out.arr_delay_min);
        f.refresh_delays();
        if (*f.actual_arr - *f.actual_dep < Minutes{10}) {
          throw GenerationError("flight " + f.flight_id + " would be airborne for under 10 minutes");
        }
        day_flights[li] = std::move(f);
        FlightTruth truth;
        truth.flight_id = l.flight_id;
        if (prev) truth.upstream_flight_id = legs[*prev].flight_id;
        truth.inputs = in;
        truth.outcome = out;
        day_truth[li] = std::move(truth);
        prev = li;
      }
    }

    // Trajectories at 60 s along the great circle at constant ground speed.
    for (const auto& tail : tails) {
      for (std::size_t li : tail.legs) {
        const auto& f = day_flights[li];
        const auto& a = pos[f.origin];
        const auto& b = pos[f.dest];
        const std::int64_t t0 = epoch_seconds(*f.actual_dep);
        const std::int64_t t1 = epoch_seconds(*f.actual_arr);
        const double dur_s = static_cast<double>(t1 - t0);
        const double dist = geo::haversine_distance(a, b);
        const double speed = round_to(dist / (dur_s / 3600.0) / geo::kKmPerNauticalMile, 0.1);
        const double track = round_to(geo::initial_bearing_deg(a, b), 0.1);
        for (std::int64_t t = t0;; t += 60) {
          if (t > t1) t = t1;
          const double frac = static_cast<double>(t - t0) / dur_s;
          auto p = geo::interpolate(a, b, frac);
          p.lat_deg = round_to(p.lat_deg, 1e-5);
          p.lon_deg = round_to(p.lon_deg, 1e-5);
          const double em = static_cast<double>(t - t0) / 60.0, rm = static_cast<double>(t1 - t) / 60.0;
          const double alt = std::round(std::min({kCruiseFt, kClimbFtPerMin * em, kClimbFtPerMin * rm}));
          TrajectoryPoint tp;
          tp.tail_id = f.tail_id;
          tp.ts = from_epoch(t);
          tp.pos = p;
          tp.alt_ft = alt;
          tp.speed_kt = speed;
          tp.track_deg = track;
          tp.model = kModels[tails[legs[li].tail].model].name;
          sc.data.trajectories.push_back(std::move(tp));
          if (t == t1) break;
        }
      }
    }

    // Station reports every 20 minutes; storms raise precipitation and wind.
    {
      Rng rng = stream(seed, 4, static_cast<std::uint64_t>(d));
      const Timestamp from = add_min(open, -60), to = add_min(close, 60);
      for (Timestamp t = from; t <= to; t = add_min(t, kWeatherStepMin)) {
        const double hour = static_cast<double>(minutes_between(t, midnight)) / 60.0;
        for (const auto& a : airports) {
          const double s = std::clamp(weather_at(a.code, t) / kStormScale, 0.0, 1.0);
          WeatherRecord w;
          w.station = a.code;
          w.ts = t;
          w.temp_c = round_to(22.0 + 6.0 * std::sin((hour - 9.0) / 24.0 * 2.0 * std::numbers::pi) - 5.0 * s +
                                  rng.normal(0.0, 1.0),
                              0.1);
          w.precip_mm = round_to(std::max(0.0, 12.0 * s + (s > 0.0 ? rng.normal(0.0, 1.0) : 0.0)), 0.1);
          w.humidity_pct = std::clamp(std::round(55.0 + 40.0 * s + rng.normal(0.0, 4.0)), 0.0, 100.0);
          w.wind_speed_kt = std::round(7.0 + 25.0 * s + std::abs(rng.normal(0.0, 2.0)));
          const double dir = std::round(rng.uniform(0.0, 36.0)) * 10.0;
          if (rng.bernoulli(0.15)) w.wind_dir_deg = dir == 360.0 ? 0.0 : dir;
          const double u = rng.uniform();
          if (s > 0.5) {
            w.sky_condition = "TS";
          } else if (s > 0.1) {
            w.sky_condition = "OVC";
          } else {
            static constexpr std::array<const char*, 4> kSky{"CLR", "FEW", "SCT", "BKN"};
            w.sky_condition = kSky[static_cast<std::size_t>(u * 4.0)];
          }
          sc.data.weather.push_back(std::move(w));
        }
      }
    }

    for (std::size_t k = 0; k < legs.size(); ++k) {
      sc.data.flights.push_back(std::move(day_flights[k]));
      sc.truth.push_back(std::move(day_truth[k]));
    }
  }

  // ATC facilities scattered over the served region.
  {
    Rng rng = stream(seed, 6);
    double lat_lo = 90, lat_hi = -90, lon_lo = 180, lon_hi = -180;
    for (const auto& a : airports) {
      lat_lo = std::min(lat_lo, a.pos.lat_deg);
      lat_hi = std::max(lat_hi, a.pos.lat_deg);
      lon_lo = std::min(lon_lo, a.pos.lon_deg);
      lon_hi = std::max(lon_hi, a.pos.lon_deg);
    }
    for (int k = 1; k <= cfg.atc_facilities; ++k) {
      AtcRecord r;
      r.facility_id = "Z" + two_digit(k);
      r.centroid = {round_to(rng.uniform(lat_lo, lat_hi), 1e-4), round_to(rng.uniform(lon_lo, lon_hi), 1e-4)};
      r.staffing = 10 + static_cast<std::int64_t>(rng.below(31));
      r.controller_training_time_hr = round_to(rng.uniform(0.0, 500.0), 0.1);
      sc.data.atc.push_back(r);
    }
  }

  // Stable output order.
  std::vector<std::size_t> order(sc.data.flights.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& fa = sc.data.flights[a];
    const auto& fb = sc.data.flights[b];
    return std::tie(fa.sched_dep, fa.flight_id) < std::tie(fb.sched_dep, fb.flight_id);
  });
  std::vector<FlightRecord> flights;
  std::vector<FlightTruth> truth;
  for (auto k : order) {
    flights.push_back(std::move(sc.data.flights[k]));
    truth.push_back(std::move(sc.truth[k]));
  }
  sc.data.flights = std::move(flights);
  sc.truth = std::move(truth);
  std::stable_sort(sc.data.trajectories.begin(), sc.data.trajectories.end(),
                   [](const auto& a, const auto& b) { return std::tie(a.ts, a.tail_id) < std::tie(b.ts, b.tail_id); });
  std::stable_sort(sc.data.weather.begin(), sc.data.weather.end(),
                   [](const auto& a, const auto& b) { return std::tie(a.ts, a.station) < std::tie(b.ts, b.station); });
  return sc;
}

nlohmann::json ground_truth_json(const Scenario& s) {
  nlohmann::json flights = nlohmann::json::array();
  for (const auto& t : s.truth) {
    const auto& in = t.inputs;
    nlohmann::json j = {{"flight_id", t.flight_id},
                        {"upstream_flight_id", t.upstream_flight_id ? nlohmann::json(*t.upstream_flight_id) : nlohmann::json()},
                        {"upstream_arr_delay_min",
                         in.upstream_arr_delay_min ? nlohmann::json(*in.upstream_arr_delay_min) : nlohmann::json()},
                        {"congestion_load", in.congestion_load},
                        {"weather_origin_min", in.weather_origin_min},
                        {"weather_dest_min", in.weather_dest_min},
                        {"noise_dep_min", in.noise_dep_min},
                        {"noise_arr_min", in.noise_arr_min},
                        {"turnaround_floor_min",
                         in.turnaround_floor_min ? nlohmann::json(*in.turnaround_floor_min) : nlohmann::json()},
                        {"turnaround_clamp_min", t.outcome.turnaround_clamp_min},
                        {"dep_delay_min", t.outcome.dep_delay_min},
                        {"arr_delay_min", t.outcome.arr_delay_min}};
    flights.push_back(std::move(j));
  }
  nlohmann::json storms = nlohmann::json::array();
  for (const auto& st : s.storms) {
    storms.push_back({{"station", st.station},
                      {"start", format_timestamp(st.start)},
                      {"duration_hr", st.duration_hr},
                      {"intensity_min", st.intensity_min}});
  }
  return {{"config", to_json(s.config)},
          {"rule",
           {{"dep", "round(propagation_strength * upstream_arr_delay_min + weather_origin_min + noise_dep_min), "
                    "raised to turnaround_floor_min"},
            {"arr", "dep + round(congestion_sensitivity * congestion_load + weather_dest_min + noise_arr_min)"},
            {"storm", "intensity_min * sin^2(pi * elapsed_hr / duration_hr)"}}},
          {"storms", storms},
          {"flights", flights}};
}

void write_scenario(const std::filesystem::path& dir, const Scenario& s) {
  ingest::write_directory(dir, s.data);
  std::ofstream out(dir / "ground_truth.json", std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / "ground_truth.json").string());
  out << ground_truth_json(s).dump(1) << '\n';
}

}  // namespace avdelay::synth
