#include "avdelay/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "avdelay/csv.hpp"
#include "avdelay/error.hpp"

namespace avdelay::fusion {

using features::Column;
using features::ColumnKind;
using features::FeatureFrame;
using features::FeatureGroup;
using features::Imputation;
using features::kMissing;

namespace {

double opt(const std::optional<double>& v) { return v ? *v : kMissing; }

const char* group_name(FeatureGroup g) { return g == FeatureGroup::Temporal ? "temporal" : "spatial"; }

const char* encoding_name(features::Encoding e) {
  switch (e) {
    case features::Encoding::OneHot: return "onehot";
    case features::Encoding::Frequency: return "frequency";
    default: return "raw";
  }
}

std::vector<const FlightRecord*> arrivals_at(std::span<const FlightRecord> flights, const std::string& airport) {
  std::vector<const FlightRecord*> out;
  for (const auto& f : flights) {
    if (f.dest == airport && f.actual_arr && f.arr_delay_min) out.push_back(&f);
  }
  std::stable_sort(out.begin(), out.end(), [](const FlightRecord* a, const FlightRecord* b) {
    if (*a->actual_arr != *b->actual_arr) return *a->actual_arr < *b->actual_arr;
    return a->flight_id < b->flight_id;
  });
  return out;
}


}  // namespace

void FusionConfig::validate() const {
  if (tau_min <= 0) throw ConfigError("tau_min must be positive");
  if (target_window_min <= 0) throw ConfigError("target_window_min must be positive");
  if (weather_join_tolerance_min <= 0) throw ConfigError("weather_join_tolerance_min must be positive");
  if (inflight_staleness_min <= 0) throw ConfigError("inflight_staleness_min must be positive");
  if (airport.empty()) throw ConfigError("airport code is empty");
  grid.validate();
}

StationIndex::StationIndex(std::span<const Airport> airports) : airports_(airports.begin(), airports.end()) {
  for (std::size_t i = 0; i < airports_.size(); ++i) index_.emplace(airports_[i].code, i);
}

const geo::GeoPoint* StationIndex::find(const std::string& code) const {
  auto it = index_.find(code);
  return it == index_.end() ? nullptr : &airports_[it->second].pos;
}

const geo::GeoPoint& StationIndex::at(const std::string& code) const {
  const auto* p = find(code);
  if (!p) throw ConfigError("no location known for airport/station " + code);
  return *p;
}

WeatherIndex::WeatherIndex(std::span<const WeatherRecord> weather, int tolerance_min) : tolerance_(Minutes{tolerance_min}) {
  for (const auto& w : weather) by_station_[w.station].push_back(&w);
  for (auto& [station, rows] : by_station_) {
    std::stable_sort(rows.begin(), rows.end(), [](const WeatherRecord* a, const WeatherRecord* b) { return a->ts < b->ts; });
  }
}

const WeatherRecord* WeatherIndex::as_of(const std::string& station, Timestamp t) const {
  auto it = by_station_.find(station);
  if (it == by_station_.end()) return nullptr;
  const auto& rows = it->second;
  auto pos = std::upper_bound(rows.begin(), rows.end(), t, [](Timestamp v, const WeatherRecord* w) { return v < w->ts; });
  if (pos == rows.begin()) return nullptr;
  const WeatherRecord* w = *std::prev(pos);
  if (t - w->ts > tolerance_) return nullptr;
  return w;
}

std::vector<std::string> WeatherIndex::stations() const {
  std::vector<std::string> out;
  for (const auto& [s, rows] : by_station_) out.push_back(s);
  return out;
}

CongestionFeatures compute_congestion(std::span<const FlightRecord> flights, std::span<const TrajectoryPoint> traj,
                                      const StationIndex& stations, const FusionConfig& cfg) {
  CongestionFeatures out;
  out.ground = features::ground_congestion(flights, cfg.airport);
  out.terminal = features::terminal_airspace_congestion(traj, stations.at(cfg.airport), std::nullopt, cfg.terminal);
  out.enroute = features::enroute_congestion(traj, cfg.grid);
  return out;
}

FeatureFrame build_dt(std::span<const TrajectoryPoint> traj, std::span<const WeatherRecord> weather,
                      const StationIndex& stations, const FusionConfig& cfg, Exec exec) {
  const geo::GeoPoint airport = stations.at(cfg.airport);
  const WeatherIndex wx(weather, cfg.weather_join_tolerance_min);
  std::vector<std::string> located;
  std::vector<geo::GeoPoint> located_pos;
  for (const auto& s : wx.stations()) {
    if (const auto* p = stations.find(s)) {
      located.push_back(s);
      located_pos.push_back(*p);
    }
  }

  const std::size_t n = traj.size();
  FeatureFrame f;
  f.timestamps.resize(n);
  std::vector<std::string> tail(n), sky(n);
  std::vector<double> lat(n), lon(n), alt(n), speed(n), dist(n), temp(n), precip(n), hum(n), wspd(n), wdir(n);

  auto fill = [&](std::size_t i) {
    const auto& p = traj[i];
    f.timestamps[i] = p.ts;
    tail[i] = p.tail_id;
    lat[i] = p.pos.lat_deg;
    lon[i] = p.pos.lon_deg;
    alt[i] = opt(p.alt_ft);
    speed[i] = opt(p.speed_kt);
    dist[i] = geo::haversine_distance(p.pos, airport);
    const WeatherRecord* w = nullptr;
    if (!located.empty()) w = wx.as_of(located[geo::nearest_index(p.pos, located_pos)], p.ts);
    temp[i] = w ? opt(w->temp_c) : kMissing;
    precip[i] = w ? opt(w->precip_mm) : kMissing;
    hum[i] = w ? opt(w->humidity_pct) : kMissing;
    wspd[i] = w ? opt(w->wind_speed_kt) : kMissing;
    wdir[i] = w ? opt(w->wind_dir_deg) : kMissing;
    if (w && w->sky_condition) sky[i] = *w->sky_condition;
  };

  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < count; ++i) fill(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) fill(static_cast<std::size_t>(i));
  }

  f.add_categorical("tail_id", std::move(tail));
  f.add_numeric("lat", std::move(lat));
  f.add_numeric("lon", std::move(lon));
  f.add_numeric("alt_ft", std::move(alt));
  f.add_numeric("speed_kt", std::move(speed));
  f.add_numeric("dist_km", std::move(dist));
  f.add_numeric("temp_c", std::move(temp));
  f.add_numeric("precip_mm", std::move(precip));
  f.add_numeric("humidity_pct", std::move(hum));
  f.add_numeric("wind_speed_kt", std::move(wspd));
  f.add_numeric("wind_dir_deg", std::move(wdir));
  f.add_categorical("sky_condition", std::move(sky));
  return f;
}

FeatureFrame build_df(std::span<const FlightRecord> flights, std::span<const WeatherRecord> weather,
                      const CongestionFeatures& congestion, const FusionConfig& cfg) {
  const auto arrivals = arrivals_at(flights, cfg.airport);
  const WeatherIndex wx(weather, cfg.weather_join_tolerance_min);
  const std::size_t n = arrivals.size();
  FeatureFrame f;
  f.timestamps.reserve(n);
  std::vector<std::string> origin(n), airline(n), sky(n);
  std::vector<double> dep_delay(n), arr_delay(n), temp(n), precip(n), hum(n), wspd(n), wdir(n);
  std::vector<double> g_dep(n), g_arr(n), term(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FlightRecord& r = *arrivals[i];
    const Timestamp t = *r.actual_arr;
    f.timestamps.push_back(t);
    origin[i] = r.origin;
    airline[i] = r.airline;
    dep_delay[i] = r.dep_delay_min ? static_cast<double>(*r.dep_delay_min) : kMissing;
    arr_delay[i] = static_cast<double>(*r.arr_delay_min);
    const WeatherRecord* w = wx.as_of(cfg.airport, t);
    temp[i] = w ? opt(w->temp_c) : kMissing;
    precip[i] = w ? opt(w->precip_mm) : kMissing;
    hum[i] = w ? opt(w->humidity_pct) : kMissing;
    wspd[i] = w ? opt(w->wind_speed_kt) : kMissing;
    wdir[i] = w ? opt(w->wind_dir_deg) : kMissing;
    if (w && w->sky_condition) sky[i] = *w->sky_condition;
    g_dep[i] = static_cast<double>(congestion.ground.departures.last_completed(t));
    g_arr[i] = static_cast<double>(congestion.ground.arrivals.last_completed(t));
    term[i] = static_cast<double>(congestion.terminal.last_completed(t));
  }
  f.add_categorical("origin", std::move(origin));
  f.add_categorical("airline", std::move(airline));
  f.add_numeric("dep_delay_min", std::move(dep_delay));
  f.add_numeric("arr_delay_min", std::move(arr_delay));
  f.add_numeric("wx_temp_c", std::move(temp));
  f.add_numeric("wx_precip_mm", std::move(precip));
  f.add_numeric("wx_humidity_pct", std::move(hum));
  f.add_numeric("wx_wind_speed_kt", std::move(wspd));
  f.add_numeric("wx_wind_dir_deg", std::move(wdir));
  f.add_categorical("wx_sky_condition", std::move(sky));
  f.add_numeric("ground_dep_count", std::move(g_dep));
  f.add_numeric("ground_arr_count", std::move(g_arr));
  f.add_numeric("terminal_count", std::move(term));
  f.refresh_meta();
  return f;
}

FeatureFrame attach_inflight(const FeatureFrame& df, const FeatureFrame& dt, std::span<const FlightRecord> flights,
                             const FusionConfig& cfg) {
  const auto& tails = dt.at("tail_id").categorical;
  std::map<std::string, std::vector<std::size_t>> by_tail;
  for (std::size_t i = 0; i < dt.rows(); ++i) by_tail[tails[i]].push_back(i);
  for (auto& [tail, rows] : by_tail) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return dt.timestamps[a] < dt.timestamps[b]; });
  }

  std::vector<const FlightRecord*> scheduled;
  for (const auto& f : flights) {
    if (f.dest == cfg.airport) scheduled.push_back(&f);
  }
  std::stable_sort(scheduled.begin(), scheduled.end(),
                   [](const FlightRecord* a, const FlightRecord* b) { return a->sched_arr < b->sched_arr; });

  const auto& vars = inflight_variables();
  std::vector<const std::vector<double>*> var_cols;
  for (const auto& v : vars) var_cols.push_back(&dt.at(v).numeric);

  const std::size_t n = df.rows();
  std::vector<double> n_sched(n), n_air(n);
  std::vector<std::vector<double>> mean(vars.size(), std::vector<double>(n)), mn = mean, mx = mean;
  const Seconds tau{cfg.tau_min * 60};
  const Seconds window{cfg.target_window_min * 60};
  const Seconds stale{cfg.inflight_staleness_min * 60};

  for (std::size_t r = 0; r < n; ++r) {
    const Timestamp t = df.timestamps[r];
    auto lo = std::lower_bound(scheduled.begin(), scheduled.end(), t + tau,
                               [](const FlightRecord* f, Timestamp v) { return f->sched_arr < v; });
    auto hi = std::lower_bound(lo, scheduled.end(), t + tau + window,
                               [](const FlightRecord* f, Timestamp v) { return f->sched_arr < v; });
    n_sched[r] = static_cast<double>(hi - lo);
    std::vector<std::size_t> latest;
    for (auto it = lo; it != hi; ++it) {
      auto bt = by_tail.find((*it)->tail_id);
      if (bt == by_tail.end()) continue;
      const auto& rows = bt->second;
      auto pos = std::upper_bound(rows.begin(), rows.end(), t,
                                  [&](Timestamp v, std::size_t idx) { return v < dt.timestamps[idx]; });
      if (pos == rows.begin()) continue;
      const std::size_t idx = *std::prev(pos);
      if (t - dt.timestamps[idx] > stale) continue;
      latest.push_back(idx);
    }
    n_air[r] = static_cast<double>(latest.size());
    for (std::size_t v = 0; v < vars.size(); ++v) {
      double sum = 0.0, lo_v = std::numeric_limits<double>::infinity(), hi_v = -lo_v;
      std::size_t k = 0;
      for (std::size_t idx : latest) {
        const double x = (*var_cols[v])[idx];
        if (std::isnan(x)) continue;
        sum += x;
        lo_v = std::min(lo_v, x);
        hi_v = std::max(hi_v, x);
        ++k;
      }
      mean[v][r] = k ? sum / static_cast<double>(k) : kMissing;
      mn[v][r] = k ? lo_v : kMissing;
      mx[v][r] = k ? hi_v : kMissing;
    }
  }

  FeatureFrame out = df;
  out.add_numeric("inflight_scheduled", std::move(n_sched), FeatureGroup::Spatial);
  out.add_numeric("inflight_count", std::move(n_air), FeatureGroup::Spatial);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    out.add_numeric("inflight_" + vars[v] + "_mean", std::move(mean[v]), FeatureGroup::Spatial, Imputation::TrainMean);
    out.add_numeric("inflight_" + vars[v] + "_min", std::move(mn[v]), FeatureGroup::Spatial, Imputation::TrainMean);
    out.add_numeric("inflight_" + vars[v] + "_max", std::move(mx[v]), FeatureGroup::Spatial, Imputation::TrainMean);
  }
  out.refresh_meta();
  return out;
}

FeatureFrame attach_atc(const FeatureFrame& frame, std::span<const AtcRecord> atc, const geo::GeoPoint& airport) {
  if (atc.empty()) throw ConfigError("ATC table is empty");
  std::vector<geo::GeoPoint> centroids;
  for (const auto& a : atc) centroids.push_back(a.centroid);
  const auto* count = frame.find("inflight_count");
  const auto* lat = frame.find("inflight_lat_mean");
  const auto* lon = frame.find("inflight_lon_mean");
  const std::size_t n = frame.rows();
  std::vector<double> staffing(n), training(n);
  const std::size_t home = geo::nearest_index(airport, centroids);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t k = home;
    if (count && lat && lon && count->numeric[r] > 0.0 && !std::isnan(lat->numeric[r]) && !std::isnan(lon->numeric[r])) {
      k = geo::nearest_index({lat->numeric[r], lon->numeric[r]}, centroids);
    }
    staffing[r] = static_cast<double>(atc[k].staffing);
    training[r] = atc[k].controller_training_time_hr;
  }
  FeatureFrame out = frame;
  out.add_numeric("atc_staffing", std::move(staffing), FeatureGroup::Spatial);
  out.add_numeric("atc_training_hr", std::move(training), FeatureGroup::Spatial);
  out.refresh_meta();
  return out;
}

FeatureFrame attach_enroute(const FeatureFrame& frame,
                            const std::map<geo::SectorId, features::CongestionSeries>& enroute) {
  const std::size_t n = frame.rows();
  std::vector<double> total(n, 0.0), peak(n, 0.0), active(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& [sector, series] : enroute) {
      const auto c = static_cast<double>(series.last_completed(frame.timestamps[r]));
      total[r] += c;
      peak[r] = std::max(peak[r], c);
      active[r] += c > 0.0 ? 1.0 : 0.0;
    }
  }
  FeatureFrame out = frame;
  out.add_numeric("enroute_total", std::move(total), FeatureGroup::Spatial);
  out.add_numeric("enroute_max", std::move(peak), FeatureGroup::Spatial);
  out.add_numeric("enroute_active_sectors", std::move(active), FeatureGroup::Spatial);
  out.refresh_meta();
  return out;
}

std::vector<LabeledRow> compute_target(const FeatureFrame& frame, std::span<const FlightRecord> flights,
                                       const FusionConfig& cfg) {
  const auto arrivals = arrivals_at(flights, cfg.airport);
  const Seconds tau{cfg.tau_min * 60};
  const Seconds window{cfg.target_window_min * 60};
  std::vector<const std::vector<double>*> numeric;
  for (const auto& c : frame.columns) {
    if (c.kind == ColumnKind::Numeric) numeric.push_back(&c.numeric);
  }
  std::vector<LabeledRow> rows(frame.rows());
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    LabeledRow& row = rows[r];
    row.ts = frame.timestamps[r];
    row.features.reserve(numeric.size());
    for (const auto* col : numeric) row.features.push_back((*col)[r]);
    auto lo = std::lower_bound(arrivals.begin(), arrivals.end(), row.ts + tau,
                               [](const FlightRecord* f, Timestamp v) { return *f->actual_arr < v; });
    auto hi = std::lower_bound(lo, arrivals.end(), row.ts + tau + window,
                               [](const FlightRecord* f, Timestamp v) { return *f->actual_arr < v; });
    if (lo == hi) continue;
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it) sum += static_cast<double>(*(*it)->arr_delay_min);
    row.target_available = true;
    row.target_delay_min = sum / static_cast<double>(hi - lo);
  }
  return rows;
}

std::vector<std::size_t> leading_rows_per_day(std::span<const Timestamp> ts, double train_frac) {
  std::vector<std::size_t> out;
  std::size_t begin = 0;
  while (begin < ts.size()) {
    std::size_t end = begin;
    while (end < ts.size() && day_index(ts[end]) == day_index(ts[begin])) ++end;
    const auto len = end - begin;
    const auto take = static_cast<std::size_t>(std::ceil(train_frac * static_cast<double>(len)));
    for (std::size_t i = 0; i < std::min(take, len); ++i) out.push_back(begin + i);
    begin = end;
  }
  return out;
}

FeatureFrame fuse_raw(const ingest::DataSet& data, const FusionConfig& cfg, Exec exec) {
  cfg.validate();
  const StationIndex stations(data.airports);
  const geo::GeoPoint airport = stations.at(cfg.airport);
  const auto congestion = compute_congestion(data.flights, data.trajectories, stations, cfg);
  const FeatureFrame dt = build_dt(data.trajectories, data.weather, stations, cfg, exec);
  FeatureFrame f = build_df(data.flights, data.weather, congestion, cfg);
  f = attach_inflight(f, dt, data.flights, cfg);
  f = attach_atc(f, data.atc, airport);
  f = attach_enroute(f, congestion.enroute);
  f.validate();
  return f;
}

FusedDataset featurize(const ingest::DataSet& data, const PipelineConfig& cfg, Exec exec) {
  if (!(cfg.train_frac > 0.0 && cfg.train_frac < 1.0)) throw ConfigError("train_frac must lie in (0, 1)");
  const FeatureFrame raw = fuse_raw(data, cfg.fusion, exec);
  const auto train_rows = leading_rows_per_day(raw.timestamps, cfg.train_frac);

  // Selection statistics come from the training rows only.
  FeatureFrame train_view;
  for (std::size_t r : train_rows) train_view.timestamps.push_back(raw.timestamps[r]);
  for (const auto& c : raw.columns) {
    Column sub = c;
    sub.numeric.clear();
    sub.categorical.clear();
    for (std::size_t r : train_rows) {
      if (c.kind == ColumnKind::Numeric) {
        sub.numeric.push_back(c.numeric[r]);
      } else {
        sub.categorical.push_back(c.categorical[r]);
      }
    }
    train_view.columns.push_back(std::move(sub));
  }
  auto selection = features::select_features(train_view, cfg.selection);
  FeatureFrame selected;
  selected.timestamps = raw.timestamps;
  for (const auto& c : raw.columns) {
    if (selection.frame.find(c.name)) selected.columns.push_back(c);
  }
  selected.refresh_meta();

  features::CategoricalEncoder encoder(cfg.cardinality_thresh);
  encoder.fit(selected, train_rows);
  FeatureFrame encoded = encoder.transform(selected);
  features::Imputer imputer;
  imputer.fit(encoded, train_rows);
  FeatureFrame complete = imputer.transform(encoded);

  FusedDataset out;
  out.rows = compute_target(complete, data.flights, cfg.fusion);
  out.selection = std::move(selection.report);
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : complete.columns) {
    out.columns.push_back(c.name);
    out.groups.push_back(c.meta.group);
    nlohmann::json j{{"name", c.name}, {"type", "real"}, {"group", group_name(c.meta.group)},
                     {"encoding", encoding_name(c.meta.encoding)}};
    if (!c.meta.source.empty()) j["source"] = c.meta.source;
    cols.push_back(std::move(j));
  }
  out.sidecar = {
      {"version", 1},
      {"columns", cols},
      {"encoders", encoder.provenance()},
      {"imputation_means", imputer.means()},
      {"inflight_variables", inflight_variables()},
      {"selection", features::to_json(out.selection)},
      {"fusion",
       {{"airport", cfg.fusion.airport},
        {"tau_min", cfg.fusion.tau_min},
        {"target_window_min", cfg.fusion.target_window_min},
        {"weather_join_tolerance_min", cfg.fusion.weather_join_tolerance_min},
        {"inflight_staleness_min", cfg.fusion.inflight_staleness_min}}},
      {"train_frac", cfg.train_frac},
  };
  return out;
}

std::vector<std::size_t> mode_columns(const FusedDataset& ds, const std::string& mode) {
  if (mode != "T" && mode != "ST") throw InvalidInput("feature mode must be T or ST, got " + mode);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.columns.size(); ++i) {
    if (mode == "ST" || ds.groups[i] == FeatureGroup::Temporal) out.push_back(i);
  }
  return out;
}

void write_fused(const std::filesystem::path& csv_path, const FusedDataset& ds) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error("cannot write " + csv_path.string());
  out << "ts,target_available,target_delay_min";
  for (const auto& c : ds.columns) out << ',' << csv::escape(c);
  out << '\n';
  for (const auto& r : ds.rows) {
    out << format_timestamp(r.ts) << ',' << (r.target_available ? 1 : 0) << ','
        << (r.target_available ? csv::format_double(r.target_delay_min) : "");
    for (double v : r.features) out << ',' << csv::format_double(v);
    out << '\n';
  }
  auto sidecar_path = csv_path;
  sidecar_path.replace_extension(".json");
  std::ofstream side(sidecar_path, std::ios::binary);
  side << ds.sidecar.dump(2) << '\n';
}

FusedDataset read_fused(const std::filesystem::path& csv_path) {
  const auto lines = csv::read_lines(csv_path);
  if (lines.empty()) throw SchemaError("fused CSV is empty: " + csv_path.string());
  auto header = csv::split_line(lines[0]);
  if (header.size() < 3 || header[0] != "ts" || header[1] != "target_available" || header[2] != "target_delay_min") {
    throw SchemaError("fused CSV header must start with ts,target_available,target_delay_min");
  }
  FusedDataset ds;
  ds.columns.assign(header.begin() + 3, header.end());
  auto sidecar_path = csv_path;
  sidecar_path.replace_extension(".json");
  std::ifstream side(sidecar_path);
  if (!side) throw FileNotFound("sidecar not found: " + sidecar_path.string());
  ds.sidecar = nlohmann::json::parse(side);
  std::map<std::string, FeatureGroup> groups;
  for (const auto& c : ds.sidecar.at("columns")) {
    groups[c.at("name").get<std::string>()] =
        c.at("group").get<std::string>() == "temporal" ? FeatureGroup::Temporal : FeatureGroup::Spatial;
  }
  for (const auto& name : ds.columns) {
    auto it = groups.find(name);
    if (it == groups.end()) throw SchemaError("sidecar does not describe column " + name);
    ds.groups.push_back(it->second);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = csv::split_line(lines[i]);
    if (f.size() != header.size()) throw SchemaError("fused CSV row " + std::to_string(i + 1) + " has wrong width");
    LabeledRow row;
    auto ts = parse_timestamp(f[0]);
    if (!ts) throw SchemaError("bad timestamp in fused CSV row " + std::to_string(i + 1));
    row.ts = *ts;
    row.target_available = f[1] == "1";
    if (row.target_available) row.target_delay_min = csv::parse_double(f[2]).value_or(0.0);
    for (std::size_t k = 3; k < f.size(); ++k) {
      auto v = csv::parse_double(f[k]);
      if (!v) throw SchemaError("non-numeric feature in fused CSV row " + std::to_string(i + 1));
      row.features.push_back(*v);
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

}  // namespace avdelay::fusion
