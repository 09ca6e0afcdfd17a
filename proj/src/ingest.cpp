#include "avdelay/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "avdelay/csv.hpp"
#include "avdelay/error.hpp"

namespace avdelay::ingest {
namespace {

// Locates the named columns in a header row.
class Columns {
 public:
  Columns(const std::string& header, std::initializer_list<const char*> required) {
    const auto names = csv::split_line(header);
    for (std::size_t i = 0; i < names.size(); ++i) index_[names[i]] = i;
    for (const char* name : required) {
      if (!index_.count(name)) throw SchemaError(std::string("missing required column: ") + name);
    }
    width_ = names.size();
  }
  std::size_t operator[](const char* name) const { return index_.at(name); }
  std::size_t width() const { return width_; }

 private:
  std::map<std::string, std::size_t> index_;
  std::size_t width_ = 0;
};

struct RowError {
  std::string reason;
};

std::string require_text(const std::vector<std::string>& f, std::size_t i, const char* name) {
  if (csv::is_missing(f[i])) throw RowError{std::string("missing ") + name};
  return f[i];
}

Timestamp require_ts(const std::vector<std::string>& f, std::size_t i, const char* name) {
  if (csv::is_missing(f[i])) throw RowError{std::string("missing ") + name};
  auto ts = parse_timestamp(f[i]);
  if (!ts) throw RowError{std::string("unparseable timestamp in ") + name + ": " + f[i]};
  return *ts;
}

std::optional<Timestamp> optional_ts(const std::vector<std::string>& f, std::size_t i, const char* name) {
  if (csv::is_missing(f[i])) return std::nullopt;
  auto ts = parse_timestamp(f[i]);
  if (!ts) throw RowError{std::string("unparseable timestamp in ") + name + ": " + f[i]};
  return ts;
}

double require_num(const std::vector<std::string>& f, std::size_t i, const char* name) {
  auto v = csv::parse_double(f[i]);
  if (!v) throw RowError{std::string("missing or invalid ") + name};
  return *v;
}

std::optional<double> optional_num(const std::vector<std::string>& f, std::size_t i, const char* name) {
  if (csv::is_missing(f[i])) return std::nullopt;
  auto v = csv::parse_double(f[i]);
  if (!v) throw RowError{std::string("invalid ") + name + ": " + f[i]};
  return v;
}

geo::GeoPoint require_point(const std::vector<std::string>& f, std::size_t lat_i, std::size_t lon_i) {
  const double lat = require_num(f, lat_i, "lat");
  const double lon = require_num(f, lon_i, "lon");
  if (lat < -90.0 || lat > 90.0) throw RowError{"latitude out of range"};
  return {lat, geo::normalize_longitude(lon)};
}

std::string opt_text(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

template <typename Record, typename RowFn>
ParseResult<Record> parse_stream(std::istream& in, std::initializer_list<const char*> required, RowFn&& row_fn) {
  ParseResult<Record> out;
  std::string header;
  if (!std::getline(in, header)) throw SchemaError("empty file: missing header row");
  const Columns cols(header, required);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ++out.input_rows;
    const auto fields = csv::split_line(line);
    if (fields.size() != cols.width()) {
      out.rejects.push_back({line_no, "expected " + std::to_string(cols.width()) + " fields, got " +
                                          std::to_string(fields.size())});
      continue;
    }
    try {
      out.records.push_back(row_fn(fields, cols));
    } catch (const RowError& e) {
      out.rejects.push_back({line_no, e.reason});
    }
  }
  return out;
}

template <typename Result>
Result open_and_parse(const std::filesystem::path& path, Result (*fn)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("file not found: " + path.string());
  return fn(in);
}

void check_offset(int offset) {
  if (offset < -14 * 60 || offset > 14 * 60) {
    throw InvalidInput("timezone offset out of range [-840, 840] minutes: " + std::to_string(offset));
  }
}

}  // namespace

ParseResult<FlightRecord> parse_flights(std::istream& in) {
  auto result = parse_stream<FlightRecord>(
      in, {"flight_id", "tail_id", "origin", "dest", "airline", "sched_dep", "sched_arr", "actual_dep", "actual_arr"},
      [](const std::vector<std::string>& f, const Columns& c) {
        FlightRecord r;
        r.flight_id = require_text(f, c["flight_id"], "flight_id");
        r.tail_id = require_text(f, c["tail_id"], "tail_id");
        r.origin = require_text(f, c["origin"], "origin");
        r.dest = require_text(f, c["dest"], "dest");
        r.airline = require_text(f, c["airline"], "airline");
        r.sched_dep = require_ts(f, c["sched_dep"], "sched_dep");
        r.sched_arr = require_ts(f, c["sched_arr"], "sched_arr");
        r.actual_dep = optional_ts(f, c["actual_dep"], "actual_dep");
        r.actual_arr = optional_ts(f, c["actual_arr"], "actual_arr");
        if (r.actual_dep && r.actual_arr && *r.actual_arr < *r.actual_dep) {
          throw RowError{"actual_arr precedes actual_dep"};
        }
        r.refresh_delays();
        return r;
      });
  std::stable_sort(result.records.begin(), result.records.end(), [](const FlightRecord& a, const FlightRecord& b) {
    // Flights without an actual arrival sort last, by schedule.
    if (a.actual_arr.has_value() != b.actual_arr.has_value()) return a.actual_arr.has_value();
    if (a.actual_arr && *a.actual_arr != *b.actual_arr) return *a.actual_arr < *b.actual_arr;
    return a.sched_arr < b.sched_arr;
  });
  return result;
}

ParseResult<TrajectoryPoint> parse_trajectories(std::istream& in) {
  auto result = parse_stream<TrajectoryPoint>(
      in, {"tail_id", "ts", "lat", "lon", "alt_ft", "speed_kt", "track_deg", "model"},
      [](const std::vector<std::string>& f, const Columns& c) {
        TrajectoryPoint p;
        p.tail_id = require_text(f, c["tail_id"], "tail_id");
        p.ts = require_ts(f, c["ts"], "ts");
        p.pos = require_point(f, c["lat"], c["lon"]);
        p.alt_ft = optional_num(f, c["alt_ft"], "alt_ft");
        p.speed_kt = optional_num(f, c["speed_kt"], "speed_kt");
        if (p.speed_kt && *p.speed_kt < 0.0) throw RowError{"negative speed_kt"};
        p.track_deg = optional_num(f, c["track_deg"], "track_deg");
        if (p.track_deg && (*p.track_deg < 0.0 || *p.track_deg >= 360.0)) throw RowError{"track_deg outside [0,360)"};
        if (!csv::is_missing(f[c["model"]])) p.model = f[c["model"]];
        return p;
      });
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.ts < b.ts; });
  return result;
}

ParseResult<WeatherRecord> parse_weather(std::istream& in) {
  auto result = parse_stream<WeatherRecord>(
      in,
      {"station", "ts", "temp_c", "precip_mm", "humidity_pct", "wind_speed_kt", "wind_dir_deg", "sky_condition"},
      [](const std::vector<std::string>& f, const Columns& c) {
        WeatherRecord w;
        w.station = require_text(f, c["station"], "station");
        w.ts = require_ts(f, c["ts"], "ts");
        w.temp_c = optional_num(f, c["temp_c"], "temp_c");
        w.precip_mm = optional_num(f, c["precip_mm"], "precip_mm");
        w.humidity_pct = optional_num(f, c["humidity_pct"], "humidity_pct");
        if (w.humidity_pct && (*w.humidity_pct < 0.0 || *w.humidity_pct > 100.0)) {
          throw RowError{"humidity_pct outside [0,100]"};
        }
        w.wind_speed_kt = optional_num(f, c["wind_speed_kt"], "wind_speed_kt");
        w.wind_dir_deg = optional_num(f, c["wind_dir_deg"], "wind_dir_deg");
        if (w.wind_dir_deg && (*w.wind_dir_deg < 0.0 || *w.wind_dir_deg >= 360.0)) {
          throw RowError{"wind_dir_deg outside [0,360)"};
        }
        if (!csv::is_missing(f[c["sky_condition"]])) w.sky_condition = f[c["sky_condition"]];
        return w;
      });
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const WeatherRecord& a, const WeatherRecord& b) { return a.ts < b.ts; });
  return result;
}

ParseResult<AtcRecord> parse_atc(std::istream& in) {
  return parse_stream<AtcRecord>(in, {"facility_id", "lat", "lon", "staffing", "controller_training_time_hr"},
                                 [](const std::vector<std::string>& f, const Columns& c) {
                                   AtcRecord a;
                                   a.facility_id = require_text(f, c["facility_id"], "facility_id");
                                   a.centroid = require_point(f, c["lat"], c["lon"]);
                                   auto staffing = csv::parse_int(f[c["staffing"]]);
                                   if (!staffing || *staffing < 0) throw RowError{"invalid staffing"};
                                   a.staffing = *staffing;
                                   a.controller_training_time_hr =
                                       require_num(f, c["controller_training_time_hr"], "controller_training_time_hr");
                                   if (a.controller_training_time_hr < 0.0) throw RowError{"negative training time"};
                                   return a;
                                 });
}

ParseResult<Airport> parse_airports(std::istream& in) {
  return parse_stream<Airport>(in, {"code", "lat", "lon"}, [](const std::vector<std::string>& f, const Columns& c) {
    return Airport{require_text(f, c["code"], "code"), require_point(f, c["lat"], c["lon"])};
  });
}

ParseResult<FlightRecord> parse_flights(const std::filesystem::path& path) {
  return open_and_parse(path, static_cast<ParseResult<FlightRecord> (*)(std::istream&)>(&parse_flights));
}
ParseResult<TrajectoryPoint> parse_trajectories(const std::filesystem::path& path) {
  return open_and_parse(path, static_cast<ParseResult<TrajectoryPoint> (*)(std::istream&)>(&parse_trajectories));
}
ParseResult<WeatherRecord> parse_weather(const std::filesystem::path& path) {
  return open_and_parse(path, static_cast<ParseResult<WeatherRecord> (*)(std::istream&)>(&parse_weather));
}
ParseResult<AtcRecord> parse_atc(const std::filesystem::path& path) {
  return open_and_parse(path, static_cast<ParseResult<AtcRecord> (*)(std::istream&)>(&parse_atc));
}
ParseResult<Airport> parse_airports(const std::filesystem::path& path) {
  return open_and_parse(path, static_cast<ParseResult<Airport> (*)(std::istream&)>(&parse_airports));
}

void write_flights(std::ostream& out, const std::vector<FlightRecord>& rows) {
  out << kFlightsHeader << '\n';
  for (const auto& r : rows) {
    out << csv::escape(r.flight_id) << ',' << csv::escape(r.tail_id) << ',' << csv::escape(r.origin) << ','
        << csv::escape(r.dest) << ',' << csv::escape(r.airline) << ',' << format_timestamp(r.sched_dep) << ','
        << format_timestamp(r.sched_arr) << ',' << (r.actual_dep ? format_timestamp(*r.actual_dep) : "") << ','
        << (r.actual_arr ? format_timestamp(*r.actual_arr) : "") << '\n';
  }
}

void write_trajectories(std::ostream& out, const std::vector<TrajectoryPoint>& rows) {
  out << kTrajectoriesHeader << '\n';
  for (const auto& p : rows) {
    out << csv::escape(p.tail_id) << ',' << format_timestamp(p.ts) << ',' << csv::format_double(p.pos.lat_deg) << ','
        << csv::format_double(p.pos.lon_deg) << ',' << opt_text(p.alt_ft) << ',' << opt_text(p.speed_kt) << ','
        << opt_text(p.track_deg) << ',' << (p.model ? csv::escape(*p.model) : "") << '\n';
  }
}

void write_weather(std::ostream& out, const std::vector<WeatherRecord>& rows) {
  out << kWeatherHeader << '\n';
  for (const auto& w : rows) {
    out << csv::escape(w.station) << ',' << format_timestamp(w.ts) << ',' << opt_text(w.temp_c) << ','
        << opt_text(w.precip_mm) << ',' << opt_text(w.humidity_pct) << ',' << opt_text(w.wind_speed_kt) << ','
        << opt_text(w.wind_dir_deg) << ',' << (w.sky_condition ? csv::escape(*w.sky_condition) : "") << '\n';
  }
}

void write_atc(std::ostream& out, const std::vector<AtcRecord>& rows) {
  out << kAtcHeader << '\n';
  for (const auto& a : rows) {
    out << csv::escape(a.facility_id) << ',' << csv::format_double(a.centroid.lat_deg) << ','
        << csv::format_double(a.centroid.lon_deg) << ',' << a.staffing << ','
        << csv::format_double(a.controller_training_time_hr) << '\n';
  }
}

void write_airports(std::ostream& out, const std::vector<Airport>& rows) {
  out << kAirportsHeader << '\n';
  for (const auto& a : rows) {
    out << csv::escape(a.code) << ',' << csv::format_double(a.pos.lat_deg) << ','
        << csv::format_double(a.pos.lon_deg) << '\n';
  }
}

std::vector<FlightRecord> normalize_to_utc(std::vector<FlightRecord> rows, int offset) {
  check_offset(offset);
  const Minutes shift{offset};
  for (auto& r : rows) {
    r.sched_dep -= shift;
    r.sched_arr -= shift;
    if (r.actual_dep) *r.actual_dep -= shift;
    if (r.actual_arr) *r.actual_arr -= shift;
  }
  return rows;
}

std::vector<TrajectoryPoint> normalize_to_utc(std::vector<TrajectoryPoint> rows, int offset) {
  check_offset(offset);
  for (auto& p : rows) p.ts -= Minutes{offset};
  return rows;
}

std::vector<WeatherRecord> normalize_to_utc(std::vector<WeatherRecord> rows, int offset) {
  check_offset(offset);
  for (auto& w : rows) w.ts -= Minutes{offset};
  return rows;
}

DataSet load_directory(const std::filesystem::path& dir, LoadReport* report) {
  if (!std::filesystem::is_directory(dir)) throw FileNotFound("data directory not found: " + dir.string());
  DataSet data;
  auto flights = parse_flights(dir / "flights.csv");
  auto traj = parse_trajectories(dir / "trajectories.csv");
  auto weather = parse_weather(dir / "weather.csv");
  auto atc = parse_atc(dir / "atc.csv");
  if (std::filesystem::exists(dir / "airports.csv")) data.airports = parse_airports(dir / "airports.csv").records;
  if (report) {
    report->flight_rejects = flights.rejects.size();
    report->trajectory_rejects = traj.rejects.size();
    report->weather_rejects = weather.rejects.size();
    report->atc_rejects = atc.rejects.size();
    auto note = [&](const char* file, const std::vector<Reject>& rejects) {
      for (const auto& r : rejects) {
        report->messages.push_back(std::string(file) + ":" + std::to_string(r.line) + ": " + r.reason);
      }
    };
    note("flights.csv", flights.rejects);
    note("trajectories.csv", traj.rejects);
    note("weather.csv", weather.rejects);
    note("atc.csv", atc.rejects);
  }
  data.flights = std::move(flights.records);
  data.trajectories = std::move(traj.records);
  data.weather = std::move(weather.records);
  data.atc = std::move(atc.records);
  return data;
}

void write_directory(const std::filesystem::path& dir, const DataSet& data) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("flights.csv");
    write_flights(out, data.flights);
  }
  {
    auto out = open("trajectories.csv");
    write_trajectories(out, data.trajectories);
  }
  {
    auto out = open("weather.csv");
    write_weather(out, data.weather);
  }
  {
    auto out = open("atc.csv");
    write_atc(out, data.atc);
  }
  if (!data.airports.empty()) {
    auto out = open("airports.csv");
    write_airports(out, data.airports);
  }
}

}  // namespace avdelay::ingest
