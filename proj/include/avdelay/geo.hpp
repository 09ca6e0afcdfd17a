#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "avdelay/parallel.hpp"

namespace avdelay {
struct TrajectoryPoint;
}

namespace avdelay::geo {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kKmPerNauticalMile = 1.852;

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Throws InvalidInput on non-finite or out-of-range coordinates.
void validate(const GeoPoint& p);

// Maps any finite longitude into (-180, 180].
double normalize_longitude(double lon_deg);

// Great-circle distance by the haversine formula.
double haversine_distance(const GeoPoint& a, const GeoPoint& b,
                          double earth_radius_km = kEarthRadiusKm);

// Rectangular lat/lon partition of the airspace above `floor_alt_ft`.
// Cells are half-open [lo, hi) in both axes with origin (-90, -180).
struct SectorGrid {
  double cell_lat_deg = 10.0;
  double cell_lon_deg = 10.0;
  double floor_alt_ft = 18000.0;

  int rows() const;
  int cols() const;
  void validate() const;
};

struct SectorId {
  int row = 0;
  int col = 0;

  auto operator<=>(const SectorId&) const = default;
};

SectorId sector_index(const GeoPoint& p, const SectorGrid& grid);

struct TerminalAirspace {
  double max_dist_km = 200.0;  // strict
  double min_alt_ft = 1200.0;  // inclusive
  double max_alt_ft = 10000.0; // inclusive
};

// True iff the point is strictly within `max_dist_km` of the airport and its
// altitude lies in the closed band. A missing altitude yields false.
bool in_terminal_airspace(const TrajectoryPoint& p, const GeoPoint& airport,
                          const TerminalAirspace& zone = {});

// Index of the candidate nearest to `p` (first one on ties). Requires a
// nonempty candidate list.
std::size_t nearest_index(const GeoPoint& p, std::span<const GeoPoint> candidates);

// Distances from `origin` to every point, written into `out`.
void distances_from(const GeoPoint& origin, std::span<const GeoPoint> points,
                    std::span<double> out, Exec exec = Exec::Parallel);

// Point at fraction `f` along the great circle from `a` to `b`.
GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double f);

// Initial bearing from `a` to `b` in [0, 360).
double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b);

// Point reached by travelling `dist_km` from `a` along the great circle with
// initial bearing `bearing_deg`.
GeoPoint destination_point(const GeoPoint& a, double bearing_deg, double dist_km,
                           double earth_radius_km = kEarthRadiusKm);

}  // namespace avdelay::geo

template <>
struct std::hash<avdelay::geo::SectorId> {
  std::size_t operator()(const avdelay::geo::SectorId& s) const noexcept {
    return std::hash<std::int64_t>{}((static_cast<std::int64_t>(s.row) << 32) ^
                                     static_cast<std::uint32_t>(s.col));
  }
};
