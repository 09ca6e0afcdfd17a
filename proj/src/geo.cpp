#include "avdelay/geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "avdelay/error.hpp"
#include "avdelay/records.hpp"

namespace avdelay::geo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

using Vec3 = std::array<double, 3>;

Vec3 to_unit(const GeoPoint& p) {
  const double lat = p.lat_deg * kDegToRad;
  const double lon = p.lon_deg * kDegToRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

GeoPoint from_unit(const Vec3& v) {
  const double lat = std::atan2(v[2], std::hypot(v[0], v[1])) / kDegToRad;
  const double lon = std::atan2(v[1], v[0]) / kDegToRad;
  return {lat, normalize_longitude(lon)};
}

bool is_integral(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat_deg) || !std::isfinite(p.lon_deg)) {
    throw InvalidInput("non-finite coordinate");
  }
  if (p.lat_deg < -90.0 || p.lat_deg > 90.0) {
    throw InvalidInput("latitude out of range: " + std::to_string(p.lat_deg));
  }
  if (p.lon_deg <= -180.0 || p.lon_deg > 180.0) {
    // -180 is accepted as the same meridian as +180.
    if (p.lon_deg != -180.0) throw InvalidInput("longitude out of range: " + std::to_string(p.lon_deg));
  }
}

double normalize_longitude(double lon_deg) {
  double x = std::fmod(lon_deg, 360.0);
  if (x <= -180.0) x += 360.0;
  if (x > 180.0) x -= 360.0;
  return x;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b, double earth_radius_km) {
  validate(a);
  validate(b);
  if (!(earth_radius_km > 0.0) || !std::isfinite(earth_radius_km)) {
    throw InvalidInput("earth radius must be positive");
  }
  const double phi1 = a.lat_deg * kDegToRad;
  const double phi2 = b.lat_deg * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dpsi = (b.lon_deg - a.lon_deg) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dpsi / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * earth_radius_km * std::asin(std::sqrt(h));
}

int SectorGrid::rows() const { return static_cast<int>(std::lround(180.0 / cell_lat_deg)); }
int SectorGrid::cols() const { return static_cast<int>(std::lround(360.0 / cell_lon_deg)); }

void SectorGrid::validate() const {
  if (!(cell_lat_deg > 0.0) || !(cell_lon_deg > 0.0)) throw InvalidInput("sector cell sizes must be positive");
  if (!is_integral(180.0 / cell_lat_deg) || !is_integral(360.0 / cell_lon_deg)) {
    throw InvalidInput("sector cell sizes must evenly tile the globe");
  }
  if (!(floor_alt_ft > 0.0)) throw InvalidInput("sector floor altitude must be positive");
}

SectorId sector_index(const GeoPoint& p, const SectorGrid& grid) {
  validate(p);
  grid.validate();
  const double lon = p.lon_deg == 180.0 ? -180.0 : p.lon_deg;
  int row = static_cast<int>(std::floor((p.lat_deg + 90.0) / grid.cell_lat_deg));
  int col = static_cast<int>(std::floor((lon + 180.0) / grid.cell_lon_deg));
  // The north pole belongs to the last row.
  row = std::min(row, grid.rows() - 1);
  col = std::min(col, grid.cols() - 1);
  return {row, col};
}

bool in_terminal_airspace(const TrajectoryPoint& p, const GeoPoint& airport, const TerminalAirspace& zone) {
  if (!p.alt_ft) return false;
  if (*p.alt_ft < zone.min_alt_ft || *p.alt_ft > zone.max_alt_ft) return false;
  return haversine_distance(p.pos, airport) < zone.max_dist_km;
}

std::size_t nearest_index(const GeoPoint& p, std::span<const GeoPoint> candidates) {
  if (candidates.empty()) throw InvalidInput("nearest_index: no candidates");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double d = haversine_distance(p, candidates[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void distances_from(const GeoPoint& origin, std::span<const GeoPoint> points, std::span<double> out,
                    Exec exec) {
  if (out.size() != points.size()) throw InvalidInput("distances_from: output size mismatch");
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = haversine_distance(origin, points[i]);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = haversine_distance(origin, points[i]);
}

GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double f) {
  const Vec3 u = to_unit(a);
  const Vec3 v = to_unit(b);
  const double dot = std::clamp(u[0] * v[0] + u[1] * v[1] + u[2] * v[2], -1.0, 1.0);
  const double omega = std::acos(dot);
  if (omega < 1e-12) return a;
  const double s = std::sin(omega);
  const double wa = std::sin((1.0 - f) * omega) / s;
  const double wb = std::sin(f * omega) / s;
  return from_unit({wa * u[0] + wb * v[0], wa * u[1] + wb * v[1], wa * u[2] + wb * v[2]});
}

double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat_deg * kDegToRad;
  const double phi2 = b.lat_deg * kDegToRad;
  const double dl = (b.lon_deg - a.lon_deg) * kDegToRad;
  const double y = std::sin(dl) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dl);
  double deg = std::atan2(y, x) / kDegToRad;
  deg = std::fmod(deg + 360.0, 360.0);
  if (deg >= 360.0) deg = 0.0;
  return deg;
}

GeoPoint destination_point(const GeoPoint& a, double bearing_deg, double dist_km, double earth_radius_km) {
  const double phi1 = a.lat_deg * kDegToRad;
  const double lam1 = a.lon_deg * kDegToRad;
  const double theta = bearing_deg * kDegToRad;
  const double delta = dist_km / earth_radius_km;
  const double sphi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(std::clamp(sphi2, -1.0, 1.0));
  const double lam2 =
      lam1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1), std::cos(delta) - std::sin(phi1) * sphi2);
  return {phi2 / kDegToRad, normalize_longitude(lam2 / kDegToRad)};
}

}  // namespace avdelay::geo
