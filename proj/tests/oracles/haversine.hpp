#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

// Haversine evaluated with 50 significant digits; atan2 keeps the antipodal
// case well conditioned.
inline double haversine_km(double lat1, double lon1, double lat2, double lon2, double r_km = 6371.0) {
  const Big pi = boost::math::constants::pi<Big>();
  const Big p1 = Big(lat1) * pi / 180, p2 = Big(lat2) * pi / 180;
  const Big dphi = (Big(lat2) - Big(lat1)) * pi / 180;
  const Big dlam = (Big(lon2) - Big(lon1)) * pi / 180;
  const Big s1 = sin(dphi / 2), s2 = sin(dlam / 2);
  Big a = s1 * s1 + cos(p1) * cos(p2) * s2 * s2;
  if (a > 1) a = 1;
  const Big c = 2 * atan2(sqrt(a), sqrt(1 - a));
  return static_cast<double>(Big(r_km) * c);
}

}  // namespace oracle
